"""Stratified k-fold splits shared by every cell of an experiment."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.model_selection import StratifiedKFold

from hetsmcg.errors import ConfigurationError, ContractError, InputError
from hetsmcg.helpers import fingerprint, write_json

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FoldSplit:
    """Assignment of every sample to one of k folds.

    Attributes:
        assignment (tuple): Fold index per sample.
        k (int): The number of folds.
        seed (int): The seed the split was drawn with.
        ids (tuple | None): Optional sample ids, e.g. article ids, in sample order.
    """

    assignment: tuple
    k: int
    seed: int
    ids: tuple = None

    def __len__(self) -> int:
        """The number of samples."""
        return len(self.assignment)

    @property
    def folds(self) -> list:
        """The sample indices of every fold."""
        assignment = np.asarray(self.assignment)
        return [np.flatnonzero(assignment == fold) for fold in range(self.k)]

    def train_test(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        """The train and test indices when holding out one fold."""
        if not 0 <= fold < self.k:
            raise ConfigurationError(f"Fold {fold} does not exist, there are {self.k}")
        assignment = np.asarray(self.assignment)
        return np.flatnonzero(assignment != fold), np.flatnonzero(assignment == fold)

    @property
    def fingerprint(self) -> str:
        """SHA-256 of the assignment, equal for equal splits."""
        return fingerprint({"assignment": list(self.assignment), "k": self.k, "ids": self.ids})

    def check_ids(self, ids: list) -> None:
        """Checks that the split was made for these samples.

        Raises:
            ContractError: If the number or the ids of the samples differ.
        """
        if len(ids) != len(self.assignment) or (self.ids is not None and tuple(ids) != self.ids):
            raise ContractError("The fold split was made for other samples")

    def to_json(self) -> dict:
        """Returns the split as a json dict."""
        return {
            "assignment": list(self.assignment),
            "k": self.k,
            "seed": self.seed,
            "ids": None if self.ids is None else list(self.ids),
        }

    @classmethod
    def from_json(cls, data: dict) -> FoldSplit:
        """Creates a split from :meth:`to_json` output."""
        ids = data.get("ids")
        return cls(
            assignment=tuple(int(fold) for fold in data["assignment"]),
            k=int(data["k"]),
            seed=int(data.get("seed", 0)),
            ids=None if ids is None else tuple(ids),
        )


def stratified_kfold(labels, k: int = 5, seed: int = 0, ids: list = None) -> FoldSplit:
    """Splits samples into k folds with per-class proportional allocation.

    Per-class counts of any two folds differ by at most one, and so do fold sizes.

    Args:
        labels: The class label of every sample.
        k (int): The number of folds.
        seed (int): Seed of the shuffling.
        ids (list, optional): Sample ids stored with the split.

    Returns:
        FoldSplit: The split.

    Raises:
        ConfigurationError: If a class has fewer than k samples.
    """
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if k < 2:
        raise ConfigurationError(f"Need at least 2 folds, got {k}")
    for label, count in zip(*np.unique(labels, return_counts=True)):
        if count < k:
            raise ConfigurationError(f"Class {label} has {count} samples, {k} folds need at least {k}")

    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed)
    assignment = np.zeros(labels.size, dtype=np.int64)
    for fold, (_, test) in enumerate(splitter.split(np.zeros(labels.size), labels)):
        assignment[test] = fold

    split = FoldSplit(
        assignment=tuple(int(fold) for fold in assignment),
        k=k,
        seed=seed,
        ids=None if ids is None else tuple(ids),
    )
    logger.info("Split %d samples into %d folds, sizes %s", labels.size, k, [f.size for f in split.folds])
    return split


def save_folds(split: FoldSplit, path: Path | str) -> None:
    """Writes a split to a json file."""
    write_json(path, split.to_json())


def load_folds(path: Path | str) -> FoldSplit:
    """Reads a split written by :func:`save_folds`.

    Raises:
        InputError: If the file is missing or not valid json.
    """
    path = Path(path)
    try:
        return FoldSplit.from_json(json.loads(path.read_text(encoding="utf-8")))
    except FileNotFoundError:
        raise InputError(f"Folds file {path} not found")
    except (json.JSONDecodeError, KeyError) as error:
        raise InputError(f"Folds file {path} is not valid: {error}")
