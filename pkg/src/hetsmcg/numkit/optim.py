"""Adam optimizer for named tensors."""

from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from hetsmcg.errors import DimensionError
from hetsmcg.numkit.tensor import Tensor

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    """Moment buffers and hyperparameters of the Adam optimizer.

    Attributes:
        lr (float): The learning rate.
        beta1 (float): Decay of the first moment.
        beta2 (float): Decay of the second moment.
        eps (float): Added to the denominator.
        step (int): The number of updates performed so far.
        first_moment (dict): Per parameter first moment buffers.
        second_moment (dict): Per parameter second moment buffers.
    """

    lr: float = 8e-5
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    first_moment: dict = field(default_factory=dict)
    second_moment: dict = field(default_factory=dict)


def adam_step(params: dict, grads: dict, state: AdamState) -> dict:
    """Performs one bias corrected Adam update.

    The moment buffers and the step counter of ``state`` are updated in place,
    the parameters are returned as new arrays.

    Args:
        params (dict): Parameter name to array.
        grads (dict): Parameter name to gradient array of the same shape.
        state (AdamState): The optimizer state, buffers start at zero.

    Returns:
        dict: Parameter name to the updated array.

    Raises:
        DimensionError: If a gradient or buffer shape differs from its parameter.
    """
    state.step += 1
    correction1 = 1.0 - state.beta1**state.step
    correction2 = 1.0 - state.beta2**state.step

    updated = OrderedDict()
    for name, value in params.items():
        grad = grads[name]
        if grad.shape != value.shape:
            raise DimensionError(
                f"Gradient of {name} has shape {grad.shape}, parameter has {value.shape}"
            )
        m = state.first_moment.get(name)
        v = state.second_moment.get(name)
        if m is None:
            m = np.zeros_like(value)
            v = np.zeros_like(value)
        elif m.shape != value.shape:
            raise DimensionError(f"Moment buffers of {name} do not match its shape")

        m = state.beta1 * m + (1.0 - state.beta1) * grad
        v = state.beta2 * v + (1.0 - state.beta2) * grad * grad
        state.first_moment[name] = m
        state.second_moment[name] = v

        m_hat = m / correction1
        v_hat = v / correction2
        updated[name] = value - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)

    return updated


class Adam:
    """Adam optimizer over a mapping of named tensors.

    Args:
        params (dict): Parameter name to tensor. The tensors are updated in place.
        lr (float): The learning rate.
        beta1 (float): Decay of the first moment.
        beta2 (float): Decay of the second moment.
        eps (float): Added to the denominator.
    """

    def __init__(
        self,
        params: dict,
        lr: float = 8e-5,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ) -> None:
        """Initializes the optimizer."""
        self.params = params
        self.state = AdamState(lr=lr, beta1=beta1, beta2=beta2, eps=eps)

    def step(self) -> None:
        """Applies one update using the accumulated gradients, missing gradients count as zero."""
        values = OrderedDict((name, tensor.data) for name, tensor in self.params.items())
        grads = {
            name: tensor.grad if tensor.grad is not None else np.zeros_like(tensor.data)
            for name, tensor in self.params.items()
        }
        updated = adam_step(values, grads, self.state)
        for name, tensor in self.params.items():
            tensor.data = updated[name]

    def zero_grad(self) -> None:
        """Drops the gradients of all parameters."""
        tensor: Tensor
        for tensor in self.params.values():
            tensor.zero_grad()
