"""Classifiers producing per-label score vectors."""
from .base import (
    MAGIC,
    Model,
    ScoreVector,
    load_model,
    predict_scores,
    save_model,
    sorted_labels,
)
from .knn import KnnClassifier, fit_knn
from .mlp import MlpClassifier, MlpParams, fit_mlp, glorot_init, mlp_loss_and_grads, zeros_init
from .svm import SvmClassifier, fit_svm, kkt_residual, platt_sigmoid, rbf_kernel, scale_gamma
from .tree import ForestClassifier, TreeClassifier, TreeNode, TreeParams, class_weights, fit_dt, fit_rf

CLASSIFIER_IDS = ("KNN", "DT", "RF", "SVM", "MLP")

__all__ = [
    "CLASSIFIER_IDS",
    "MAGIC",
    "Model",
    "ScoreVector",
    "KnnClassifier",
    "TreeClassifier",
    "TreeNode",
    "TreeParams",
    "ForestClassifier",
    "SvmClassifier",
    "MlpClassifier",
    "MlpParams",
    "class_weights",
    "fit_knn",
    "fit_dt",
    "fit_rf",
    "fit_svm",
    "fit_mlp",
    "glorot_init",
    "zeros_init",
    "mlp_loss_and_grads",
    "kkt_residual",
    "platt_sigmoid",
    "rbf_kernel",
    "scale_gamma",
    "load_model",
    "predict_scores",
    "save_model",
    "sorted_labels",
]
