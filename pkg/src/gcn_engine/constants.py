"""
Engine Constants
----------------
Centralized defaults shared across the engine, data layer and harness.
"""

# 🧮 Numerics
PROB_CLAMP = 1e-12            # probabilities clamped to [PROB_CLAMP, 1 - PROB_CLAMP] before log
DECISION_THRESHOLD = 0.5      # positive-class score threshold for binary predictions

# 🕸️ Graph construction
DEFAULT_KNN_K = 5
DEFAULT_KNN_METRIC = "euclidean"

# 🧠 Model
DEFAULT_HIDDEN = (32,)

# 🎯 Trainer defaults
DEFAULT_ALPHA = 0.01
DEFAULT_ETA = 1.0
DEFAULT_EPOCHS = 300

# 🔀 Split proportions: train / val / test / meta pool
SPLIT_FRACTIONS = (0.6, 0.1, 0.2, 0.1)
SPLIT_NAMES = ("train", "val", "test", "meta")

# ⚖️ SMOTE baseline
DEFAULT_SMOTE_SCALE = 0.8
DEFAULT_SMOTE_K = 5

# 🧪 Experiment methods
METHODS = ("mlp", "gcn", "gcn_weighted", "smote", "graph_smote_external", "meta_gcn")
EXTERNAL_METHODS = ("graph_smote_external",)

# 🏷️ Display names used in reports
METHOD_LABELS = {
    "mlp": "MLP",
    "gcn": "GCN",
    "gcn_weighted": "GCN-Weighted",
    "smote": "SMOTE",
    "graph_smote_external": "GraphSMOTE",
    "meta_gcn": "Meta-GCN",
}

TRAINLOG_COLUMNS = [
    "epoch", "train_loss", "meta_loss", "val_accuracy", "val_macro_f1", "val_auc",
    "w_min", "w_mean", "w_max",
]
