"""Paired significance tests between experiment cells with Bonferroni correction."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from hetsmcg.errors import ConfigurationError, ContractError

logger = logging.getLogger(__name__)

TEST_FAMILY = "paired two-sided t-test on per-fold macro-F1, Bonferroni corrected"
ALPHA = 0.05


@dataclass(frozen=True)
class SignificanceResult:
    """The comparison of two cells.

    Attributes:
        a (str): Name of the first cell.
        b (str): Name of the second cell.
        mean_difference (float): Mean of the per-fold macro-F1 differences a - b.
        statistic (float): The t statistic, 0 if the differences have no variance.
        p_value (float): The raw two-sided p-value.
        n_comparisons (int): The Bonferroni family size.
        alpha (float): The family wise significance level.
        threshold (float): alpha / n_comparisons.
        significant (bool): If p_value < threshold.
        note (str): Explains degenerate cases, empty otherwise.
    """

    a: str
    b: str
    mean_difference: float
    statistic: float
    p_value: float
    n_comparisons: int
    alpha: float
    threshold: float
    significant: bool
    note: str = ""

    def to_json(self) -> dict:
        """Returns the result as a json dict."""
        return asdict(self)


def bonferroni(p_value: float, n_comparisons: int, alpha: float = ALPHA) -> tuple[float, bool]:
    """The corrected threshold and whether a raw p-value passes it.

    Args:
        p_value (float): The raw p-value.
        n_comparisons (int): The family size.
        alpha (float): The family wise level.

    Returns:
        tuple[float, bool]: alpha / n_comparisons and p_value < that threshold.
    """
    if n_comparisons < 1:
        raise ConfigurationError(f"n_comparisons must be at least 1, got {n_comparisons}")
    threshold = alpha / n_comparisons
    return threshold, bool(p_value < threshold)


def paired_test(scores_a, scores_b) -> tuple[float, float, str]:
    """Two-sided paired t-test of two score vectors.

    Zero variance differences are handled without scipy: identical scores give
    p = 1, a constant nonzero difference gives p = 0.

    Returns:
        tuple[float, float, str]: statistic, p-value and a note for degenerate cases.
    """
    a = np.asarray(scores_a, dtype=np.float64)
    b = np.asarray(scores_b, dtype=np.float64)
    if a.shape != b.shape or a.size < 2:
        raise ContractError("Paired tests need two score vectors of equal length of at least 2")
    differences = a - b
    if np.all(differences == differences[0]):
        if differences[0] == 0:
            return 0.0, 1.0, "no difference"
        return 0.0, 0.0, "constant nonzero difference"
    result = stats.ttest_rel(a, b)
    return float(result.statistic), float(result.pvalue), ""


def significance(report_a, report_b, n_comparisons: int = 1, alpha: float = ALPHA) -> SignificanceResult:
    """Compares two cells by their per-fold macro-F1.

    Args:
        report_a (ExperimentReport): The first cell.
        report_b (ExperimentReport): The second cell.
        n_comparisons (int): The Bonferroni family size.
        alpha (float): The family wise significance level.

    Returns:
        SignificanceResult: The test result.

    Raises:
        ContractError: If the reports were not evaluated on the same folds.
    """
    if report_a.fold_fingerprint != report_b.fold_fingerprint:
        raise ContractError(f"{report_a.name} and {report_b.name} were evaluated on different folds")
    scores_a = [metrics.macro_f1 for metrics in report_a.fold_metrics]
    scores_b = [metrics.macro_f1 for metrics in report_b.fold_metrics]
    if len(scores_a) != len(scores_b):
        raise ContractError(f"{report_a.name} and {report_b.name} have different fold counts")

    statistic, p_value, note = paired_test(scores_a, scores_b)
    threshold, significant = bonferroni(p_value, n_comparisons, alpha)
    logger.debug("%s vs %s: p = %.4g, threshold %.4g", report_a.name, report_b.name, p_value, threshold)
    return SignificanceResult(
        a=report_a.name,
        b=report_b.name,
        mean_difference=float(np.mean(np.subtract(scores_a, scores_b))),
        statistic=statistic,
        p_value=p_value,
        n_comparisons=n_comparisons,
        alpha=alpha,
        threshold=threshold,
        significant=significant,
        note=note,
    )
