"""The two layer graph classifier: input projections, two convolutions, readout and head."""

from __future__ import annotations

import logging

import numpy as np

from hetsmcg.errors import ContractError, DimensionError
from hetsmcg.gnn.config import Activation, ConvType, GraphMode, ModelConfig, Readout
from hetsmcg.gnn.layers import GraphView, gat_layer, hgt_layer, sage_layer
from hetsmcg.gnn.params import HOMO_NODE, ModelParams, init_params
from hetsmcg.hetgraph import USER_SOCIAL_FEATURES, HeteroGraph, NodeType
from hetsmcg.numkit import Tensor
from hetsmcg.numkit import ops

logger = logging.getLogger(__name__)

ACTIVATIONS = {
    Activation.ELU: ops.elu,
    Activation.RELU: ops.relu,
    Activation.LEAKY_RELU: ops.leaky_relu,
}


def input_dims(graph: HeteroGraph, mode: GraphMode) -> dict:
    """The input feature dimension per node type name a model for this graph needs.

    Args:
        graph (HeteroGraph): A representative graph of the dataset.
        mode (GraphMode): The graph mode.

    Returns:
        dict: Node type name to dimension.
    """
    mode = GraphMode(mode)
    if mode == GraphMode.HOMO_TRUNCATE:
        return {HOMO_NODE: graph.d_text}
    if mode == GraphMode.HOMO_PAD:
        return {HOMO_NODE: graph.d_text + USER_SOCIAL_FEATURES}
    return {node_type.value: graph.feature_dim(node_type) for node_type in NodeType}


def _layer(view: GraphView, h: dict, params: ModelParams, layer: int, final: bool, trace) -> dict:
    conv = params.config.conv_type
    if conv == ConvType.SAGE:
        return sage_layer(view, h, params, layer, trace=trace)
    if conv == ConvType.GAT:
        return gat_layer(view, h, params, layer, final=final, trace=trace)
    return hgt_layer(view, h, params, layer, trace=trace)


def embed_nodes(graph, params: ModelParams, trace: dict = None) -> dict:
    """Runs the input projections and both layers.

    Args:
        graph (HeteroGraph | HomoGraph | GraphView): The graph.
        params (ModelParams): The parameters.
        trace (dict, optional): Receives attention weights, see the layers.

    Returns:
        dict: Node type name to the final (n, hidden) representations.
    """
    config = params.config
    view = GraphView.from_graph(graph, config.mode)

    h = {}
    for node_type, features in view.features.items():
        if node_type not in params.node_types:
            raise ContractError(f"The model has no parameters for node type {node_type!r}")
        expected = params.input_dims[node_type]
        if features.shape[1] != expected:
            raise DimensionError(
                f"Features of {node_type} have {features.shape[1]} columns, the model expects {expected}"
            )
        projected = ops.matmul(Tensor(features), params[f"proj.{node_type}.W"])
        h[node_type] = ops.add(projected, params[f"proj.{node_type}.b"])

    activation = ACTIVATIONS[config.activation]
    h = _layer(view, h, params, 0, False, trace)
    h = {node_type: activation(x) for node_type, x in h.items()}
    return _layer(view, h, params, 1, True, trace)


def forward(graph, params: ModelParams, config: ModelConfig = None, trace: dict = None) -> Tensor:
    """Computes the two class logits of a graph.

    Args:
        graph (HeteroGraph | HomoGraph | GraphView): The graph.
        params (ModelParams): The parameters.
        config (ModelConfig, optional): Must equal the config of the parameters if given.
        trace (dict, optional): Receives attention weights, see the layers.

    Returns:
        Tensor: The (1, 2) logits.

    Raises:
        ContractError: If the config differs from the parameters' or the graph has unknown node types.
    """
    if config is not None and config != params.config:
        raise ContractError("The parameters were created for another model config")
    config = params.config
    view = GraphView.from_graph(graph, config.mode)
    h = embed_nodes(view, params, trace)

    if config.readout == Readout.NEWS_NODE:
        pooled = ops.gather_rows(h[view.readout_type], [view.readout_index])
    else:
        blocks = [x for x in h.values() if x.rows]
        pooled = ops.mean_rows(blocks[0] if len(blocks) == 1 else ops.concat_rows(blocks))

    return ops.add(ops.matmul(pooled, params["head.W"]), params["head.b"])


def predict(logits: Tensor | np.ndarray) -> int:
    """The predicted class of one graph, ties go to class 0 (real)."""
    values = logits.data if isinstance(logits, Tensor) else np.asarray(logits)
    values = values.reshape(-1)
    return 1 if values[1] > values[0] else 0


class GraphClassifier:
    """A model config together with its parameters.

    Args:
        config (ModelConfig): The architecture.
        input_dims (dict): Node type name to input feature dimension.
        seed (int): Seed of the initialization.
        params (ModelParams, optional): Existing parameters instead of a fresh initialization.
    """

    def __init__(self, config: ModelConfig, input_dims: dict = None, seed: int = 0, params: ModelParams = None) -> None:
        """Initializes the classifier."""
        if params is None:
            params = init_params(config, input_dims, seed)
        elif params.config != config:
            raise ContractError("The parameters were created for another model config")
        self.config = config
        self.params = params

    @classmethod
    def for_graph(cls, config: ModelConfig, graph: HeteroGraph, seed: int = 0) -> GraphClassifier:
        """Creates a freshly initialized classifier sized for the graphs of a dataset."""
        return cls(config, input_dims(graph, config.mode), seed)

    def view(self, graph) -> GraphView:
        """The view of a graph this model works on."""
        return GraphView.from_graph(graph, self.config.mode)

    def __call__(self, graph, trace: dict = None) -> Tensor:
        """Computes the logits of a graph."""
        return forward(graph, self.params, trace=trace)

    def predict(self, graph) -> int:
        """The predicted class of a graph."""
        return predict(self(graph))
