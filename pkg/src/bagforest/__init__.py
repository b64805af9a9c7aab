"""Bagged CART classifier, evaluation metrics and exploratory-analysis
emitters for binary-labelled tabular data."""

from .data import Dataset, DataError, ImputePolicy, SplitResult, class_counts, load_csv, save_csv, stratified_split
from .forest import ForestConfig, ForestModel, ModelError, fit, oob_score
from .metrics import ClassificationReport, ConfusionMatrix, RocCurve, cohen_kappa, report, roc_curve

__version__ = "0.1.0"

__all__ = [
    "ClassificationReport",
    "ConfusionMatrix",
    "DataError",
    "Dataset",
    "ForestConfig",
    "ForestModel",
    "ImputePolicy",
    "ModelError",
    "RocCurve",
    "SplitResult",
    "class_counts",
    "cohen_kappa",
    "fit",
    "load_csv",
    "oob_score",
    "report",
    "roc_curve",
    "save_csv",
    "stratified_split",
]
