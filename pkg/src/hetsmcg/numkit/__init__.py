"""Small dense tensor engine with reverse-mode automatic differentiation."""

from hetsmcg.numkit.tensor import Operation, Tape, Tensor, active_tape, backward
from hetsmcg.numkit.optim import Adam, AdamState, adam_step
from hetsmcg.numkit.gradcheck import GradCheckResult, gradcheck, numeric_gradient

__all__ = [
    "Adam",
    "AdamState",
    "GradCheckResult",
    "Operation",
    "Tape",
    "Tensor",
    "active_tape",
    "adam_step",
    "backward",
    "gradcheck",
    "numeric_gradient",
]
