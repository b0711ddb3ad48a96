"""Training of one fold and evaluation of trained parameters."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from hetsmcg.errors import ConfigurationError, ContractError, NumericalError
from hetsmcg.gnn import GraphView, ModelConfig, ModelParams, forward, init_params, predict
from hetsmcg.harness.metrics import ClassificationMetrics, classification_metrics
from hetsmcg.helpers import fingerprint
from hetsmcg.numkit import Adam, Tape, Tensor
from hetsmcg.numkit import ops

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of the training loop.

    Attributes:
        epochs (int): Passes over the training graphs.
        batch_size (int): Graphs per Adam step.
        learning_rate (float): Adam learning rate.
        use_class_weights (bool): If the loss uses inverse frequency class weights.
        seed (int): Seed of initialization and shuffling.
    """

    epochs: int = 20
    batch_size: int = 16
    learning_rate: float = 8e-5
    use_class_weights: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        """Validates the hyperparameters."""
        if self.epochs <= 0 or self.batch_size <= 0:
            raise ConfigurationError("epochs and batch_size must be positive")
        if self.learning_rate <= 0:
            raise ConfigurationError(f"learning_rate must be positive, got {self.learning_rate}")

    def to_json(self) -> dict:
        """Returns the config as a json dict."""
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> TrainConfig:
        """Creates a config from :meth:`to_json` output."""
        return cls(**data)

    @property
    def fingerprint(self) -> str:
        """SHA-256 of the json form."""
        return fingerprint(self.to_json())


def class_weights(labels) -> np.ndarray:
    """Inverse frequency weights n / (2 n_c), balanced data gets [1, 1].

    Args:
        labels: The labels of the training graphs.

    Returns:
        np.ndarray: [w_real, w_fake].

    Raises:
        ConfigurationError: If a class is missing.
    """
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    counts = np.bincount(labels, minlength=2)
    if counts.size != 2 or np.any(counts == 0):
        raise ConfigurationError(f"Class weights need both classes, got counts {counts.tolist()}")
    return labels.size / (2.0 * counts)


@dataclass
class TrainResult:
    """The outcome of training one fold.

    Attributes:
        params (ModelParams): The final parameters.
        epoch_losses (list): Mean batch loss of every epoch.
        batch_losses (list): Loss of every batch in order.
        class_weights (list): The class weights used.
    """

    params: ModelParams
    epoch_losses: list = field(default_factory=list)
    batch_losses: list = field(default_factory=list)
    class_weights: list = field(default_factory=list)


def batch_loss(views: list, labels, params: ModelParams, weights) -> Tensor:
    """Mean weighted cross entropy of a batch of graphs."""
    logits = ops.concat_rows([forward(view, params) for view in views])
    return ops.weighted_cross_entropy(logits, labels, weights)


def train_fold(
    graphs: list,
    train_config: TrainConfig,
    model_config: ModelConfig,
    seed: int = None,
) -> TrainResult:
    """Trains a fresh model on the given graphs.

    Every epoch shuffles the graphs, then takes one Adam step per batch on the
    mean weighted cross entropy. There is no early stopping.

    Args:
        graphs (list): The training graphs, HeteroGraph or GraphView.
        train_config (TrainConfig): The hyperparameters.
        model_config (ModelConfig): The architecture.
        seed (int, optional): Overrides the seed of the train config.

    Returns:
        TrainResult: The parameters and the loss curve.

    Raises:
        ContractError: If there are no training graphs.
        NumericalError: If a loss or gradient is not finite.
    """
    if not graphs:
        raise ContractError("Cannot train on an empty set of graphs")
    seed = train_config.seed if seed is None else seed
    views = [GraphView.from_graph(graph, model_config.mode) for graph in graphs]
    labels = np.array([view.label for view in views], dtype=np.int64)
    weights = class_weights(labels) if train_config.use_class_weights else np.ones(2)

    params = init_params(model_config, view_input_dims(views[0]), seed)
    optimizer = Adam(params.tensors, lr=train_config.learning_rate)
    rng = np.random.default_rng(seed)

    result = TrainResult(params=params, class_weights=weights.tolist())
    for epoch in range(train_config.epochs):
        order = rng.permutation(len(views))
        losses = []
        for start in range(0, len(order), train_config.batch_size):
            batch = order[start : start + train_config.batch_size]
            with Tape() as tape:
                loss = batch_loss([views[i] for i in batch], labels[batch], params, weights)
            value = loss.item()
            if not np.isfinite(value):
                raise NumericalError(
                    f"Loss became {value} in epoch {epoch}",
                    {"epoch": epoch, "batch": start // train_config.batch_size, "loss": value},
                )
            tape.backward(loss)
            for name, tensor in params.items():
                if tensor.grad is not None and not np.all(np.isfinite(tensor.grad)):
                    raise NumericalError(
                        f"Gradient of {name} is not finite in epoch {epoch}",
                        {"epoch": epoch, "parameter": name},
                    )
            optimizer.step()
            optimizer.zero_grad()
            losses.append(value)
        result.batch_losses.extend(losses)
        result.epoch_losses.append(float(np.mean(losses)))
        logger.debug("Epoch %d: mean loss %.6f", epoch, result.epoch_losses[-1])

    logger.info(
        "Trained %s (%s) on %d graphs, final loss %.4f",
        model_config.conv_type.value,
        model_config.mode.value,
        len(views),
        result.epoch_losses[-1],
    )
    return result


def view_input_dims(view: GraphView) -> dict:
    """Node type name to the feature width of a graph view."""
    return {node_type: block.shape[1] for node_type, block in view.features.items()}


@dataclass
class EvaluationResult:
    """Predictions and metrics on a set of graphs.

    Attributes:
        metrics (ClassificationMetrics): The metrics.
        predictions (list): Predicted class per graph.
        labels (list): True class per graph.
    """

    metrics: ClassificationMetrics
    predictions: list
    labels: list


def evaluate(params: ModelParams, graphs: list) -> EvaluationResult:
    """Predicts every graph by the argmax of its logits, ties going to real.

    Args:
        params (ModelParams): Trained parameters.
        graphs (list): The test graphs.

    Returns:
        EvaluationResult: Predictions and metrics.
    """
    if not graphs:
        raise ContractError("Cannot evaluate on an empty set of graphs")
    predictions = []
    labels = []
    for graph in graphs:
        view = GraphView.from_graph(graph, params.config.mode)
        predictions.append(predict(forward(view, params)))
        labels.append(int(view.label))
    return EvaluationResult(classification_metrics(labels, predictions), predictions, labels)
