"""Experiment reports of matrix cells and the plain-text results table."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from hetsmcg.errors import ConfigurationError
from hetsmcg.harness.metrics import ClassificationMetrics, mean_metrics
from hetsmcg.harness.significance import TEST_FAMILY
from hetsmcg.helpers import fingerprint

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Cell:
    """One combination of setup, feature mode, convolution and graph mode.

    Attributes:
        setup (int): The setup, 1 to 5.
        features (str): "text" or "text+social".
        conv (str): "sage", "gat" or "hgt".
        mode (str): "hetero", "homo-truncate" or "homo-pad".
    """

    setup: int
    features: str
    conv: str
    mode: str

    @property
    def name(self) -> str:
        """E.g. "S5/text/hgt/hetero"."""
        return f"S{self.setup}/{self.features}/{self.conv}/{self.mode}"

    @classmethod
    def parse(cls, text: str) -> Cell:
        """Parses "5/text/hgt/hetero", a leading S on the setup is optional."""
        parts = text.split("/")
        if len(parts) != 4:
            raise ConfigurationError(f"A cell is setup/features/conv/mode, got {text!r}")
        setup, features, conv, mode = parts
        try:
            return cls(int(setup.upper().lstrip("S")), features, conv, mode)
        except ValueError:
            raise ConfigurationError(f"Invalid setup in cell {text!r}")

    def to_json(self) -> dict:
        """Returns the cell as a json dict."""
        return {"setup": self.setup, "features": self.features, "conv": self.conv, "mode": self.mode}


@dataclass
class ExperimentReport:
    """Cross-validated results of one cell.

    Attributes:
        cell (Cell): The cell.
        fold_metrics (list): ClassificationMetrics per fold.
        fold_fingerprint (str): Fingerprint of the fold split.
        model_config (dict): The model config as json.
        train_config (dict): The train config as json.
        fold_seeds (list): Seed of every fold.
        final_losses (list): Last epoch loss of every fold.
        n_graphs (int): The number of graphs.
        wall_clock (list): Seconds per fold, left out of the deterministic json.
    """

    cell: Cell
    fold_metrics: list
    fold_fingerprint: str
    model_config: dict
    train_config: dict
    fold_seeds: list = field(default_factory=list)
    final_losses: list = field(default_factory=list)
    n_graphs: int = 0
    wall_clock: list = field(default_factory=list)

    @property
    def name(self) -> str:
        """The cell name."""
        return self.cell.name

    @property
    def mean(self) -> dict:
        """Arithmetic means of the metrics over folds."""
        return mean_metrics(self.fold_metrics)

    @property
    def config_fingerprint(self) -> str:
        """SHA-256 over cell, configs and folds."""
        return fingerprint(
            {
                "cell": self.cell.to_json(),
                "model": self.model_config,
                "train": self.train_config,
                "folds": self.fold_fingerprint,
            }
        )

    @property
    def zero_division(self) -> list:
        """Zero denominators per fold, e.g. "fold 2: precision of class 1"."""
        return [
            f"fold {fold}: {entry}"
            for fold, metrics in enumerate(self.fold_metrics)
            for entry in metrics.zero_division
        ]

    def to_json(self, include_timing: bool = False) -> dict:
        """Returns the report as a json dict.

        Args:
            include_timing (bool): If wall-clock times are included.
        """
        data = {
            "cell": self.cell.to_json(),
            "name": self.name,
            "folds": [metrics.to_json() for metrics in self.fold_metrics],
            "mean": self.mean,
            "fold_fingerprint": self.fold_fingerprint,
            "config_fingerprint": self.config_fingerprint,
            "model_config": self.model_config,
            "train_config": self.train_config,
            "fold_seeds": self.fold_seeds,
            "final_losses": self.final_losses,
            "n_graphs": self.n_graphs,
            "zero_division": self.zero_division,
        }
        if include_timing:
            data["wall_clock"] = self.wall_clock
        return data

    @classmethod
    def from_json(cls, data: dict) -> ExperimentReport:
        """Creates a report from :meth:`to_json` output."""
        return cls(
            cell=Cell(**data["cell"]),
            fold_metrics=[ClassificationMetrics.from_json(entry) for entry in data["folds"]],
            fold_fingerprint=data["fold_fingerprint"],
            model_config=data["model_config"],
            train_config=data["train_config"],
            fold_seeds=data.get("fold_seeds", []),
            final_losses=data.get("final_losses", []),
            n_graphs=data.get("n_graphs", 0),
            wall_clock=data.get("wall_clock", []),
        )


@dataclass
class MatrixResult:
    """All cells of a matrix run and the comparisons between them.

    Attributes:
        reports (list): ExperimentReport per cell, in matrix order.
        comparisons (list): SignificanceResult per compared pair.
        n_comparisons (int): The Bonferroni family size used.
        settings (dict): The settings of the run.
        folds (dict): The fold split as json.
        data (dict): Kept and skipped article counts.
    """

    reports: list
    comparisons: list = field(default_factory=list)
    n_comparisons: int = 0
    settings: dict = field(default_factory=dict)
    folds: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)

    def report(self, name: str) -> ExperimentReport:
        """Returns the report of a cell by name."""
        for report in self.reports:
            if report.name == name:
                return report
        raise KeyError(name)

    def to_json(self, include_timing: bool = False) -> dict:
        """Returns the result as a json dict, deterministic unless timing is included."""
        return {
            "test_family": TEST_FAMILY,
            "n_comparisons": self.n_comparisons,
            "settings": self.settings,
            "folds": self.folds,
            "data": self.data,
            "reports": [report.to_json(include_timing) for report in self.reports],
            "comparisons": [comparison.to_json() for comparison in self.comparisons],
        }

    def timing_json(self) -> dict:
        """Wall-clock seconds per fold of every cell."""
        return {report.name: report.wall_clock for report in self.reports}


def render_table(result: MatrixResult) -> str:
    """Renders one row per (graph mode, conv, features) with F1 and ACC per setup.

    A ``**`` marks the F1 of a cell that differs significantly from the cell it was
    compared against.

    Args:
        result (MatrixResult): The matrix result.

    Returns:
        str: The table.
    """
    marked = {comparison.b for comparison in result.comparisons if comparison.significant}
    setups = sorted({report.cell.setup for report in result.reports})
    rows = []
    for report in result.reports:
        key = (report.cell.mode, report.cell.conv, report.cell.features)
        if key not in rows:
            rows.append(key)
    by_key = {
        (report.cell.mode, report.cell.conv, report.cell.features, report.cell.setup): report
        for report in result.reports
    }

    header = f"{'mode':<14} {'conv':<5} {'features':<12}"
    for setup in setups:
        header += f" {'S' + str(setup) + ' F1':>9} {'S' + str(setup) + ' ACC':>9}"
    lines = [header, "-" * len(header)]

    for mode, conv, features in rows:
        line = f"{mode:<14} {conv:<5} {features:<12}"
        for setup in setups:
            report = by_key.get((mode, conv, features, setup))
            if report is None:
                line += f" {'-':>9} {'-':>9}"
                continue
            mean = report.mean
            mark = "**" if report.name in marked else ""
            line += f" {format(mean['macro_f1'], '.3f') + mark:>9} {mean['accuracy']:>9.3f}"
        lines.append(line)

    lines.append("")
    lines.append(
        f"** significant at p < {result.settings.get('alpha', 0.05)} "
        f"with Bonferroni correction over {result.n_comparisons} comparisons ({TEST_FAMILY})"
    )
    return "\n".join(lines) + "\n"

