# gcn engine package
