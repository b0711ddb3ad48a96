"""Central finite difference checks for analytic gradients."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from hetsmcg.numkit.tensor import Tape, Tensor

logger = logging.getLogger(__name__)


@dataclass
class GradCheckResult:
    """Analytic and numeric gradients of one check.

    Attributes:
        analytic (list): Analytic gradient per checked tensor.
        numeric (list): Finite difference gradient per checked tensor.
        relative_errors (list): Entrywise relative error per checked tensor.
    """

    analytic: list
    numeric: list
    relative_errors: list

    @property
    def max_error(self) -> float:
        """The largest relative error over all entries."""
        return max((float(err.max()) for err in self.relative_errors if err.size), default=0.0)

    def fraction_within(self, tolerance: float) -> float:
        """The fraction of entries with a relative error below the tolerance."""
        errors = np.concatenate([err.reshape(-1) for err in self.relative_errors])
        if errors.size == 0:
            return 1.0
        return float(np.mean(errors <= tolerance))


def numeric_gradient(fn: Callable[[], Tensor], tensor: Tensor, h: float = 1e-5) -> np.ndarray:
    """Central difference gradient of a scalar function with respect to one tensor.

    Args:
        fn (Callable): Evaluates the scalar loss from the current tensor values.
        tensor (Tensor): The tensor to perturb, its values are restored afterwards.
        h (float): The step size.

    Returns:
        np.ndarray: The gradient estimate, same shape as the tensor.
    """
    grad = np.zeros_like(tensor.data)
    for index in np.ndindex(tensor.data.shape):
        original = tensor.data[index]
        tensor.data[index] = original + h
        upper = fn().item()
        tensor.data[index] = original - h
        lower = fn().item()
        tensor.data[index] = original
        grad[index] = (upper - lower) / (2.0 * h)
    return grad


def gradcheck(
    fn: Callable[[], Tensor], tensors: list, h: float = 1e-5, floor: float = 1e-6
) -> GradCheckResult:
    """Compares tape gradients with central finite differences.

    The relative error of an entry is |a - n| / max(|a|, |n|, floor).

    Args:
        fn (Callable): Builds the scalar loss from the tensors, called with and without a tape.
        tensors (list): The tensors to check, they need ``requires_grad``.
        h (float): The finite difference step.
        floor (float): Lower bound of the denominator for entries close to zero.

    Returns:
        GradCheckResult: The gradients and errors.
    """
    for tensor in tensors:
        tensor.zero_grad()
    with Tape() as tape:
        loss = fn()
    tape.backward(loss)

    analytic = [
        tensor.grad.copy() if tensor.grad is not None else np.zeros_like(tensor.data)
        for tensor in tensors
    ]
    numeric = [numeric_gradient(fn, tensor, h) for tensor in tensors]
    errors = [
        np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        for a, n in zip(analytic, numeric)
    ]
    result = GradCheckResult(analytic, numeric, errors)
    logger.debug("Gradient check max relative error %.3e", result.max_error)
    return result
