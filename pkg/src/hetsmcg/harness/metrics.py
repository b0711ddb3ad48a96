"""Classification metrics of binary real/fake predictions."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from sklearn.metrics import accuracy_score, confusion_matrix, precision_recall_fscore_support

logger = logging.getLogger(__name__)

CLASSES = [0, 1]
METRIC_NAMES = ["precision", "recall", "macro_f1", "accuracy"]


@dataclass
class ClassificationMetrics:
    """Macro averaged precision, recall and F1 plus accuracy of one evaluation.

    Per class scores with a zero denominator are 0, the affected classes are listed
    in ``zero_division``.

    Attributes:
        precision (float): Unweighted mean of the per class precisions.
        recall (float): Unweighted mean of the per class recalls.
        macro_f1 (float): Unweighted mean of the per class F1 scores.
        accuracy (float): Share of correct predictions.
        per_class_f1 (list): F1 of real and fake.
        confusion (list): 2x2 confusion matrix, rows are true labels.
        zero_division (list): Descriptions of zero denominators, e.g. "precision of class 1".
    """

    precision: float
    recall: float
    macro_f1: float
    accuracy: float
    per_class_f1: list = field(default_factory=list)
    confusion: list = field(default_factory=list)
    zero_division: list = field(default_factory=list)

    def to_json(self) -> dict:
        """Returns the metrics as a json dict."""
        return {
            "precision": self.precision,
            "recall": self.recall,
            "macro_f1": self.macro_f1,
            "accuracy": self.accuracy,
            "per_class_f1": list(self.per_class_f1),
            "confusion": [list(row) for row in self.confusion],
            "zero_division": list(self.zero_division),
        }

    @classmethod
    def from_json(cls, data: dict) -> ClassificationMetrics:
        """Creates metrics from :meth:`to_json` output."""
        return cls(**data)

    def value(self, name: str) -> float:
        """One of precision, recall, macro_f1 and accuracy by name."""
        return float(getattr(self, name))


def classification_metrics(labels, predictions) -> ClassificationMetrics:
    """Computes the metrics of binary predictions.

    Args:
        labels: True classes, 0 real and 1 fake.
        predictions: Predicted classes.

    Returns:
        ClassificationMetrics: The metrics.
    """
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    predictions = np.asarray(predictions, dtype=np.int64).reshape(-1)

    precision, recall, f1, _ = precision_recall_fscore_support(
        labels, predictions, labels=CLASSES, average=None, zero_division=0
    )
    confusion = confusion_matrix(labels, predictions, labels=CLASSES)

    zero_division = []
    for label in CLASSES:
        if confusion[:, label].sum() == 0:
            zero_division.append(f"precision of class {label}")
        if confusion[label, :].sum() == 0:
            zero_division.append(f"recall of class {label}")
    if zero_division:
        logger.warning("Zero denominators set to 0: %s", ", ".join(zero_division))

    return ClassificationMetrics(
        precision=float(np.mean(precision)),
        recall=float(np.mean(recall)),
        macro_f1=float(np.mean(f1)),
        accuracy=float(accuracy_score(labels, predictions)),
        per_class_f1=[float(value) for value in f1],
        confusion=confusion.tolist(),
        zero_division=zero_division,
    )


def mean_metrics(fold_metrics: list) -> dict:
    """Arithmetic means of the four metrics over folds."""
    return {
        name: float(np.mean([metrics.value(name) for metrics in fold_metrics]))
        for name in METRIC_NAMES
    }
