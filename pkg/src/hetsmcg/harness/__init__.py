"""Cross-validation, training, metrics, significance tests and the experiment matrix."""

from hetsmcg.harness.folds import FoldSplit, load_folds, save_folds, stratified_kfold
from hetsmcg.harness.matrix import comparison_pairs, run_cell, run_matrix
from hetsmcg.harness.metrics import ClassificationMetrics, classification_metrics, mean_metrics
from hetsmcg.harness.report import Cell, ExperimentReport, MatrixResult, render_table
from hetsmcg.harness.significance import SignificanceResult, bonferroni, paired_test, significance
from hetsmcg.harness.training import (
    EvaluationResult,
    TrainConfig,
    TrainResult,
    class_weights,
    evaluate,
    train_fold,
)

__all__ = [
    "Cell",
    "ClassificationMetrics",
    "EvaluationResult",
    "ExperimentReport",
    "FoldSplit",
    "MatrixResult",
    "SignificanceResult",
    "TrainConfig",
    "TrainResult",
    "bonferroni",
    "class_weights",
    "classification_metrics",
    "comparison_pairs",
    "evaluate",
    "load_folds",
    "mean_metrics",
    "paired_test",
    "render_table",
    "run_cell",
    "run_matrix",
    "save_folds",
    "significance",
    "stratified_kfold",
    "train_fold",
]
