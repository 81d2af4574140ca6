# ml package
