"""Dense 2-D float64 tensors and the gradient tape that records operations on them."""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from typing import Callable

import numpy as np

from hetsmcg.errors import ContractError, DimensionError

logger = logging.getLogger(__name__)

_local = threading.local()


class Tensor:
    """A dense two dimensional array of float64 values.

    Tensors take part in gradient computation when they are created with
    ``requires_grad=True`` or when they are the output of an operation that
    was recorded on an active :class:`Tape`.

    Args:
        data: Anything numpy can turn into an array. Scalars become 1x1 and vectors become row vectors.
        requires_grad (bool): If gradients should be collected for this tensor.
        name (str): An optional name, used in log messages and checkpoints.

    Attributes:
        data (np.ndarray): The values, shape (rows, cols).
        requires_grad (bool): If gradients are collected for this tensor.
        grad (np.ndarray | None): The accumulated gradient, same shape as data.
        name (str): The name of the tensor.
    """

    def __init__(self, data, requires_grad: bool = False, name: str = "") -> None:
        """Initializes the tensor."""
        array = np.asarray(data, dtype=np.float64)
        if array.ndim == 0:
            array = array.reshape(1, 1)
        elif array.ndim == 1:
            array = array.reshape(1, -1)
        elif array.ndim != 2:
            raise DimensionError(f"Tensors are two dimensional, got shape {array.shape}")

        self.data = array
        self.requires_grad = requires_grad
        self.grad = None
        self.name = name
        self._tape = None

    @classmethod
    def zeros(cls, rows: int, cols: int, requires_grad: bool = False, name: str = "") -> Tensor:
        """Creates a tensor filled with zeros."""
        return cls(np.zeros((rows, cols)), requires_grad=requires_grad, name=name)

    @property
    def shape(self) -> tuple[int, int]:
        """The shape of the tensor as (rows, cols)."""
        return self.data.shape

    @property
    def rows(self) -> int:
        """The number of rows."""
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        """The number of columns."""
        return self.data.shape[1]

    def item(self) -> float:
        """Returns the value of a 1x1 tensor as a float."""
        if self.shape != (1, 1):
            raise ContractError(f"item() needs a 1x1 tensor, got {self.shape}")
        return float(self.data[0, 0])

    def zero_grad(self) -> None:
        """Drops the accumulated gradient."""
        self.grad = None

    def backward(self) -> None:
        """Backpropagates from this scalar tensor, see :func:`backward`."""
        backward(self)

    def __add__(self, other: Tensor) -> Tensor:
        from hetsmcg.numkit import ops

        return ops.add(self, other)

    def __mul__(self, other: Tensor) -> Tensor:
        from hetsmcg.numkit import ops

        return ops.mul(self, other)

    def __matmul__(self, other: Tensor) -> Tensor:
        from hetsmcg.numkit import ops

        return ops.matmul(self, other)

    def __repr__(self) -> str:
        grad = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{grad}, name={self.name!r})"


@dataclass
class Operation:
    """A single recorded operation on the tape.

    Attributes:
        name (str): The name of the operation, e.g. "matmul".
        inputs (tuple): The input tensors.
        output (Tensor): The output tensor.
        backward (Callable): Maps the output gradient to a tuple with one gradient (or None) per input.
    """

    name: str
    inputs: tuple
    output: Tensor
    backward: Callable[[np.ndarray], tuple]


class Tape:
    """Records operations in execution order so gradients can be computed in reverse.

    A tape is activated with a ``with`` block. While it is active on the current
    thread, every operation with at least one input that requires gradients is
    appended to it. The order of recording is a topological order by construction.

    Example:
        with Tape() as tape:
            loss = ops.sum_all(ops.matmul(x, w))
        tape.backward(loss)
    """

    def __init__(self) -> None:
        """Initializes an empty tape."""
        self.operations = []

    def __enter__(self) -> Tape:
        """Activates the tape on the current thread."""
        stack = getattr(_local, "stack", None)
        if stack is None:
            stack = _local.stack = []
        stack.append(self)
        return self

    def __exit__(self, *args) -> None:
        """Deactivates the tape."""
        _local.stack.pop()

    def __len__(self) -> int:
        """The number of recorded operations."""
        return len(self.operations)

    def record(self, operation: Operation) -> None:
        """Appends an operation to the tape.

        Args:
            operation (Operation): The operation to record.
        """
        self.operations.append(operation)

    def backward(self, loss: Tensor) -> None:
        """Computes gradients of a scalar loss for every tensor that requires them.

        Gradients are added to existing ``grad`` buffers, callers zero them between steps.

        Args:
            loss (Tensor): A 1x1 tensor produced by operations on this tape.

        Raises:
            ContractError: If the loss is not 1x1.
        """
        if loss.shape != (1, 1):
            raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")

        grads = {id(loss): np.ones((1, 1))}
        tensors = {id(loss): loss}

        for operation in reversed(self.operations):
            output_grad = grads.pop(id(operation.output), None)
            if output_grad is None:
                continue
            _accumulate(operation.output, output_grad)

            input_grads = operation.backward(output_grad)
            for tensor, grad in zip(operation.inputs, input_grads):
                if grad is None or not tensor.requires_grad:
                    continue
                key = id(tensor)
                if key in grads:
                    grads[key] = grads[key] + grad
                else:
                    grads[key] = grad
                    tensors[key] = tensor

        # Whatever is left was not produced on this tape
        for key, grad in grads.items():
            _accumulate(tensors[key], grad)

        logger.debug("Backward pass over %d operations", len(self.operations))


def _accumulate(tensor: Tensor, grad: np.ndarray) -> None:
    if not tensor.requires_grad:
        return
    if grad.shape != tensor.shape:
        raise DimensionError(
            f"Gradient shape {grad.shape} does not match tensor shape {tensor.shape}"
        )
    if tensor.grad is None:
        tensor.grad = np.array(grad, dtype=np.float64)
    else:
        tensor.grad = tensor.grad + grad


def active_tape() -> Tape | None:
    """Returns the innermost active tape of the current thread, if any."""
    stack = getattr(_local, "stack", None)
    if not stack:
        return None
    return stack[-1]


def record(name: str, inputs: tuple, data: np.ndarray, backward_rule: Callable) -> Tensor:
    """Wraps the result of an operation and records it on the active tape.

    Args:
        name (str): The name of the operation.
        inputs (tuple): The input tensors.
        data (np.ndarray): The forward result.
        backward_rule (Callable): Maps the output gradient to one gradient per input.

    Returns:
        Tensor: The output tensor.
    """
    output = Tensor(data)
    tape = active_tape()
    if tape is not None and any(tensor.requires_grad for tensor in inputs):
        output.requires_grad = True
        output._tape = tape
        tape.record(Operation(name, tuple(inputs), output, backward_rule))
    return output


def backward(loss: Tensor) -> None:
    """Backpropagates from a scalar loss on the tape that produced it.

    Args:
        loss (Tensor): A 1x1 tensor.

    Raises:
        ContractError: If the loss is not scalar or was not produced on a tape.
    """
    if loss.shape != (1, 1):
        raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")
    if loss._tape is None:
        if loss.requires_grad:
            _accumulate(loss, np.ones((1, 1)))
            return
        raise ContractError("The loss was not produced by recorded operations")
    loss._tape.backward(loss)
