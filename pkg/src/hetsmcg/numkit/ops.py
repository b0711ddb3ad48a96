"""Differentiable operations on :class:`~hetsmcg.numkit.tensor.Tensor` objects.

Every operation computes its forward result with numpy and records a backward
rule on the active tape. Only two kinds of broadcasting exist: a 1xn row vector
against an mxn matrix (bias broadcast) and an mx1 column of row weights in
:func:`scale_rows`.
"""

from __future__ import annotations

import logging

import numpy as np

from hetsmcg.errors import ContractError, DimensionError
from hetsmcg.numkit.tensor import Tensor, record

logger = logging.getLogger(__name__)


def _reduce_to(grad: np.ndarray, shape: tuple) -> np.ndarray:
    if grad.shape == shape:
        return grad
    return grad.sum(axis=0, keepdims=True)


def _check_broadcast(a: Tensor, b: Tensor, name: str) -> None:
    if a.shape == b.shape:
        return
    if a.cols == b.cols and (a.rows == 1 or b.rows == 1):
        return
    raise DimensionError(f"{name}: incompatible shapes {a.shape} and {b.shape}")


def _check_index(index, size: int, name: str) -> np.ndarray:
    index = np.asarray(index, dtype=np.int64).reshape(-1)
    if index.size and (index.min() < 0 or index.max() >= size):
        raise IndexError(f"{name}: index out of range for size {size}")
    return index


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of an (m, k) and a (k, n) tensor.

    Args:
        a (Tensor): The left factor.
        b (Tensor): The right factor.

    Returns:
        Tensor: The (m, n) product.

    Raises:
        DimensionError: If the inner dimensions differ.
    """
    if a.cols != b.rows:
        raise DimensionError(f"matmul: inner dimensions differ, {a.shape} x {b.shape}")

    def backward(grad):
        return grad @ b.data.T, a.data.T @ grad

    return record("matmul", (a, b), a.data @ b.data, backward)


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum, a 1xn row vector is broadcast over the rows of the other operand."""
    _check_broadcast(a, b, "add")

    def backward(grad):
        return _reduce_to(grad, a.shape), _reduce_to(grad, b.shape)

    return record("add", (a, b), a.data + b.data, backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise product, with the same broadcasting as :func:`add`."""
    _check_broadcast(a, b, "mul")

    def backward(grad):
        return _reduce_to(grad * b.data, a.shape), _reduce_to(grad * a.data, b.shape)

    return record("mul", (a, b), a.data * b.data, backward)


def scale(x: Tensor, factor: float) -> Tensor:
    """Multiplies every entry by a constant."""
    factor = float(factor)

    def backward(grad):
        return (grad * factor,)

    return record("scale", (x,), x.data * factor, backward)


def relu(x: Tensor) -> Tensor:
    """max(x, 0), with gradient 0 at x = 0."""
    mask = x.data > 0

    def backward(grad):
        return (grad * mask,)

    return record("relu", (x,), np.where(mask, x.data, 0.0), backward)


def elu(x: Tensor) -> Tensor:
    """x for positive x, exp(x) - 1 otherwise."""
    mask = x.data > 0
    negative = np.expm1(np.minimum(x.data, 0.0))

    def backward(grad):
        return (grad * np.where(mask, 1.0, negative + 1.0),)

    return record("elu", (x,), np.where(mask, x.data, negative), backward)


def leaky_relu(x: Tensor, alpha: float = 0.2) -> Tensor:
    """x for positive x, alpha * x otherwise."""
    mask = x.data > 0

    def backward(grad):
        return (grad * np.where(mask, 1.0, alpha),)

    return record("leaky_relu", (x,), np.where(mask, x.data, alpha * x.data), backward)


def exp(x: Tensor) -> Tensor:
    """Elementwise exponential."""
    out = np.exp(x.data)

    def backward(grad):
        return (grad * out,)

    return record("exp", (x,), out, backward)


ELEMENTWISE = {
    "add": add,
    "mul": mul,
    "relu": relu,
    "elu": elu,
    "leaky_relu": leaky_relu,
    "exp": exp,
}


def elementwise(op: str, *inputs: Tensor, **kwargs) -> Tensor:
    """Applies one of the pointwise operations by name.

    Args:
        op (str): One of "add", "mul", "relu", "elu", "leaky_relu" and "exp".
        *inputs (Tensor): The operands.
        **kwargs: Extra arguments, e.g. ``alpha`` for leaky_relu.

    Returns:
        Tensor: The pointwise result.
    """
    try:
        function = ELEMENTWISE[op]
    except KeyError:
        raise ContractError(f"Unknown elementwise operation {op}")
    return function(*inputs, **kwargs)


def row_softmax(x: Tensor) -> Tensor:
    """Softmax over every row, stabilized by subtracting the row maximum."""
    shifted = x.data - x.data.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=1, keepdims=True)

    def backward(grad):
        return (out * (grad - (grad * out).sum(axis=1, keepdims=True)),)

    return record("row_softmax", (x,), out, backward)


def segment_sum(values: Tensor, segments, num_segments: int) -> Tensor:
    """Sums the rows of ``values`` that share a segment id.

    Args:
        values (Tensor): The (n, d) rows.
        segments: n integer segment ids.
        num_segments (int): The number of output rows.

    Returns:
        Tensor: (num_segments, d), empty segments are zero rows.
    """
    segments = _check_index(segments, num_segments, "segment_sum")
    if segments.size != values.rows:
        raise DimensionError(
            f"segment_sum: {segments.size} segment ids for {values.rows} rows"
        )
    out = np.zeros((num_segments, values.cols))
    np.add.at(out, segments, values.data)

    def backward(grad):
        return (grad[segments],)

    return record("segment_sum", (values,), out, backward)


def segment_mean(values: Tensor, segments, num_segments: int) -> Tensor:
    """Averages the rows of ``values`` that share a segment id.

    Args:
        values (Tensor): The (n, d) rows.
        segments: n integer segment ids.
        num_segments (int): The number of output rows.

    Returns:
        Tensor: (num_segments, d), empty segments are zero rows.

    Raises:
        IndexError: If a segment id is out of range.
    """
    segments = _check_index(segments, num_segments, "segment_mean")
    if segments.size != values.rows:
        raise DimensionError(
            f"segment_mean: {segments.size} segment ids for {values.rows} rows"
        )
    counts = np.maximum(np.bincount(segments, minlength=num_segments), 1)[:, None]
    out = np.zeros((num_segments, values.cols))
    np.add.at(out, segments, values.data)
    out /= counts

    def backward(grad):
        return ((grad / counts)[segments],)

    return record("segment_mean", (values,), out, backward)


def segment_softmax(scores: Tensor, segments, num_segments: int) -> Tensor:
    """Softmax over the rows of every segment, separately for each column.

    This is the normalisation of attention scores over the in-neighbours of a node.

    Args:
        scores (Tensor): The (n, k) scores.
        segments: n integer segment ids.
        num_segments (int): The number of segments.

    Returns:
        Tensor: (n, k) weights, summing to one within every segment and column.
    """
    segments = _check_index(segments, num_segments, "segment_softmax")
    if segments.size != scores.rows:
        raise DimensionError(
            f"segment_softmax: {segments.size} segment ids for {scores.rows} rows"
        )
    maxima = np.full((num_segments, scores.cols), -np.inf)
    np.maximum.at(maxima, segments, scores.data)
    e = np.exp(scores.data - maxima[segments])
    totals = np.zeros((num_segments, scores.cols))
    np.add.at(totals, segments, e)
    out = e / totals[segments]

    def backward(grad):
        weighted = np.zeros((num_segments, scores.cols))
        np.add.at(weighted, segments, grad * out)
        return (out * (grad - weighted[segments]),)

    return record("segment_softmax", (scores,), out, backward)


def gather_rows(x: Tensor, index) -> Tensor:
    """Selects rows of ``x``, rows may repeat.

    Raises:
        IndexError: If an index is out of range.
    """
    index = _check_index(index, x.rows, "gather_rows")

    def backward(grad):
        out = np.zeros_like(x.data)
        np.add.at(out, index, grad)
        return (out,)

    return record("gather_rows", (x,), x.data[index], backward)


def concat_rows(tensors: list[Tensor]) -> Tensor:
    """Stacks tensors with equal column counts on top of each other."""
    if not tensors:
        raise ContractError("concat_rows needs at least one tensor")
    cols = {tensor.cols for tensor in tensors}
    if len(cols) != 1:
        raise DimensionError(f"concat_rows: differing column counts {sorted(cols)}")
    bounds = np.cumsum([tensor.rows for tensor in tensors])[:-1]

    def backward(grad):
        return tuple(np.split(grad, bounds, axis=0))

    data = np.concatenate([tensor.data for tensor in tensors], axis=0)
    return record("concat_rows", tuple(tensors), data, backward)


def concat_cols(tensors: list[Tensor]) -> Tensor:
    """Places tensors with equal row counts next to each other."""
    if not tensors:
        raise ContractError("concat_cols needs at least one tensor")
    rows = {tensor.rows for tensor in tensors}
    if len(rows) != 1:
        raise DimensionError(f"concat_cols: differing row counts {sorted(rows)}")
    bounds = np.cumsum([tensor.cols for tensor in tensors])[:-1]

    def backward(grad):
        return tuple(np.split(grad, bounds, axis=1))

    data = np.concatenate([tensor.data for tensor in tensors], axis=1)
    return record("concat_cols", tuple(tensors), data, backward)


def scale_rows(x: Tensor, weights: Tensor) -> Tensor:
    """Multiplies every row of an (m, n) tensor by the matching entry of an (m, 1) tensor."""
    if weights.shape != (x.rows, 1):
        raise DimensionError(f"scale_rows: weights {weights.shape} for rows of {x.shape}")

    def backward(grad):
        return grad * weights.data, (grad * x.data).sum(axis=1, keepdims=True)

    return record("scale_rows", (x, weights), x.data * weights.data, backward)


def row_dot(a: Tensor, b: Tensor) -> Tensor:
    """Dot product of matching rows, (m, n) and (m, n) to (m, 1)."""
    if a.shape != b.shape:
        raise DimensionError(f"row_dot: shapes {a.shape} and {b.shape} differ")

    def backward(grad):
        return grad * b.data, grad * a.data

    return record("row_dot", (a, b), (a.data * b.data).sum(axis=1, keepdims=True), backward)


def mean_rows(x: Tensor) -> Tensor:
    """Mean over the rows, (m, n) to (1, n)."""
    if x.rows == 0:
        raise ContractError("mean_rows of a tensor without rows")
    rows = x.rows

    def backward(grad):
        return (np.repeat(grad / rows, rows, axis=0),)

    return record("mean_rows", (x,), x.data.mean(axis=0, keepdims=True), backward)


def sum_all(x: Tensor) -> Tensor:
    """Sum of all entries as a 1x1 tensor."""

    def backward(grad):
        return (np.full(x.shape, grad[0, 0]),)

    return record("sum_all", (x,), np.array([[x.data.sum()]]), backward)


def weighted_cross_entropy(logits: Tensor, labels, class_weights) -> Tensor:
    """Mean over the batch of the class weighted negative log likelihood.

    loss = 1/b * sum_i w[l_i] * -log(softmax(logits_i)[l_i])

    Args:
        logits (Tensor): (b, c) unnormalized scores.
        labels: b integer class labels.
        class_weights: c positive weights.

    Returns:
        Tensor: The 1x1 loss.

    Raises:
        IndexError: If a label is not a valid class.
        ContractError: If a weight is not positive.
    """
    labels = _check_index(labels, logits.cols, "weighted_cross_entropy")
    weights = np.asarray(class_weights, dtype=np.float64).reshape(-1)
    if weights.size != logits.cols:
        raise DimensionError(
            f"weighted_cross_entropy: {weights.size} class weights for {logits.cols} classes"
        )
    if np.any(weights <= 0):
        raise ContractError("Class weights need to be positive")
    if labels.size != logits.rows:
        raise DimensionError(
            f"weighted_cross_entropy: {labels.size} labels for {logits.rows} rows"
        )

    batch = logits.rows
    rows = np.arange(batch)
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_norm
    sample_weights = weights[labels]
    loss = -(sample_weights * log_probs[rows, labels]).sum() / batch

    def backward(grad):
        probs = np.exp(log_probs)
        probs[rows, labels] -= 1.0
        return (grad[0, 0] * probs * sample_weights[:, None] / batch,)

    return record("weighted_cross_entropy", (logits,), np.array([[loss]]), backward)
