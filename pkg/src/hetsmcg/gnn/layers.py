"""Message passing layers: SAGE style, GAT style and HGT style convolutions.

All layers take a :class:`GraphView` and a mapping from node type name to the
current representations and return the new representations per node type,
before the activation. Relations without edges do not take part.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from hetsmcg.errors import ContractError, DimensionError
from hetsmcg.gnn.params import HOMO_NODE, HOMO_RELATION, ModelParams
from hetsmcg.hetgraph import HeteroGraph, HomoGraph, NodeType, flatten
from hetsmcg.numkit import Tensor
from hetsmcg.numkit import ops

logger = logging.getLogger(__name__)

GAT_NEGATIVE_SLOPE = 0.2


@dataclass(frozen=True)
class Relation:
    """The edges of one relation as index arrays.

    Attributes:
        name (str): The relation name.
        source (str): The source node type name.
        target (str): The target node type name.
        src (np.ndarray): Source index of every edge.
        dst (np.ndarray): Target index of every edge.
    """

    name: str
    source: str
    target: str
    src: np.ndarray
    dst: np.ndarray


@dataclass
class GraphView:
    """What a model sees of a graph: typed feature blocks and typed edge lists.

    Attributes:
        features (dict): Node type name to (n, d) features, in a fixed order.
        relations (list): The relations with at least one edge.
        readout_type (str): The node type of the news node.
        readout_index (int): The index of the news node inside its block.
        label (int): The label of the graph.
    """

    features: dict
    relations: list
    readout_type: str
    readout_index: int
    label: int

    def num_nodes(self, node_type: str) -> int:
        """The number of nodes of a type."""
        return self.features[node_type].shape[0]

    def incoming(self, node_type: str) -> list:
        """The relations ending at a node type."""
        return [relation for relation in self.relations if relation.target == node_type]

    @classmethod
    def from_hetero(cls, graph: HeteroGraph) -> GraphView:
        """Views a heterogeneous graph with one block per node type."""
        features = {}
        for node_type in graph.features:
            if not isinstance(node_type, NodeType):
                raise ContractError(f"Unknown node type {node_type!r} in graph {graph.article_id}")
        for node_type in NodeType:
            block = graph.features.get(node_type)
            features[node_type.value] = np.zeros((0, graph.d_text)) if block is None else block

        relations = []
        for (source, relation, target), pairs in graph.edges.items():
            if pairs.shape[0] == 0:
                continue
            relations.append(
                Relation(relation.value, source.value, target.value, pairs[:, 0], pairs[:, 1])
            )
        relations.sort(key=lambda relation: relation.name)
        return cls(features, relations, NodeType.NEWS.value, graph.news_index, graph.label)

    @classmethod
    def from_homo(cls, graph: HomoGraph) -> GraphView:
        """Views a flattened graph with a single node type and relation."""
        relations = []
        if graph.edges.shape[0]:
            relations.append(
                Relation(HOMO_RELATION, HOMO_NODE, HOMO_NODE, graph.edges[:, 0], graph.edges[:, 1])
            )
        return cls({HOMO_NODE: graph.features}, relations, HOMO_NODE, graph.news_index, graph.label)

    @classmethod
    def from_graph(cls, graph, mode) -> GraphView:
        """Views a graph as required by a graph mode, flattening hetero graphs for homo modes.

        Args:
            graph (HeteroGraph | HomoGraph): The graph.
            mode (GraphMode): The graph mode of the model.

        Raises:
            ContractError: If a flattened graph is given to a heterogeneous model.
        """
        if isinstance(graph, GraphView):
            return graph
        if mode.is_homo:
            if isinstance(graph, HeteroGraph):
                graph = flatten(graph, mode.flatten_mode)
            return cls.from_homo(graph)
        if not isinstance(graph, HeteroGraph):
            raise ContractError("Heterogeneous models need a HeteroGraph")
        return cls.from_hetero(graph)


def _check_types(view: GraphView, h: dict, params: ModelParams) -> None:
    for node_type in h:
        if node_type not in params.node_types:
            raise ContractError(f"The model has no parameters for node type {node_type!r}")
    for relation in view.relations:
        if relation.name not in params.relations:
            raise ContractError(f"The model has no parameters for relation {relation.name!r}")


def _zeros(rows: int, cols: int) -> Tensor:
    return Tensor(np.zeros((rows, cols)))


def sage_layer(
    view: GraphView,
    h: dict,
    params: ModelParams,
    layer: int,
    trace: dict = None,
) -> dict:
    """Mean aggregation per relation plus a self transform, summed over relations.

    h'_t = W_self,t h_t + sum over relations r ending at t of W_r mean(h_s of r-neighbours)

    Args:
        view (GraphView): The graph.
        h (dict): Node type name to (n, hidden) representations.
        params (ModelParams): The parameters.
        layer (int): The layer index.
        trace (dict, optional): Unused, SAGE has no attention.

    Returns:
        dict: Node type name to new representations.
    """
    _check_types(view, h, params)
    out = {}
    for node_type, x in h.items():
        result = ops.matmul(x, params[f"layer{layer}.self.{node_type}.W"])
        for relation in view.incoming(node_type):
            messages = ops.gather_rows(h[relation.source], relation.src)
            mean = ops.segment_mean(messages, relation.dst, x.rows)
            result = ops.add(result, ops.matmul(mean, params[f"layer{layer}.rel.{relation.name}.W"]))
        out[node_type] = result
    return out


def gat_layer(
    view: GraphView,
    h: dict,
    params: ModelParams,
    layer: int,
    final: bool = False,
    trace: dict = None,
    self_loops: bool = True,
) -> dict:
    """Attention over the in-neighbours of every relation, summed over relations.

    The score of an edge from j to i is LeakyReLU(a_dst . W h_i + a_src . W h_j),
    normalized over the in-neighbours of i within the relation. Every target node
    also attends to itself through each relation ending at its type. Heads are
    concatenated in the hidden layer and averaged in the final layer.

    Args:
        view (GraphView): The graph.
        h (dict): Node type name to (n, hidden) representations.
        params (ModelParams): The parameters.
        layer (int): The layer index.
        final (bool): If this is the last layer.
        trace (dict, optional): Receives (layer, relation, head) to (targets, weights).
        self_loops (bool): If target nodes attend to themselves.

    Returns:
        dict: Node type name to new representations.
    """
    _check_types(view, h, params)
    config = params.config
    head_dim = config.hidden_dim if final else config.head_dim
    out = {}
    for node_type, x in h.items():
        n = x.rows
        heads = []
        for head in range(config.heads):
            total = None
            for relation in view.incoming(node_type):
                prefix = f"layer{layer}.rel.{relation.name}.head{head}"
                weight = params[f"{prefix}.W"]
                source = ops.matmul(h[relation.source], weight)
                target = ops.matmul(x, weight)

                values = ops.gather_rows(source, relation.src)
                dst = relation.dst
                if self_loops:
                    values = ops.concat_rows([values, target])
                    dst = np.concatenate([dst, np.arange(n)])

                score_src = ops.matmul(values, params[f"{prefix}.a_src"])
                score_dst = ops.gather_rows(ops.matmul(target, params[f"{prefix}.a_dst"]), dst)
                scores = ops.leaky_relu(ops.add(score_src, score_dst), GAT_NEGATIVE_SLOPE)
                weights = ops.segment_softmax(scores, dst, n)
                message = ops.segment_sum(ops.scale_rows(values, weights), dst, n)
                total = message if total is None else ops.add(total, message)
                if trace is not None:
                    trace[(layer, relation.name, head)] = (dst.copy(), weights.data[:, 0].copy())
            heads.append(_zeros(n, head_dim) if total is None else total)

        if final:
            combined = heads[0]
            for other in heads[1:]:
                combined = ops.add(combined, other)
            out[node_type] = ops.scale(combined, 1.0 / len(heads)) if len(heads) > 1 else combined
        else:
            out[node_type] = heads[0] if len(heads) == 1 else ops.concat_cols(heads)
    return out


def hgt_layer(
    view: GraphView,
    h: dict,
    params: ModelParams,
    layer: int,
    trace: dict = None,
) -> dict:
    """Typed transformer attention with a residual connection.

    For an edge s -> t of relation r the logit is (K h_s)^T W_att,r (Q h_t) / sqrt(d),
    normalized jointly over all in-edges of t across relations. The message
    W_msg,r V h_s is weighted by the attention, summed, transformed by A of the
    target type and added to h_t. Nodes without in-edges keep h_t.

    Args:
        view (GraphView): The graph.
        h (dict): Node type name to (n, hidden) representations.
        params (ModelParams): The parameters.
        layer (int): The layer index.
        trace (dict, optional): Receives (layer, node type, head) to (targets, weights).

    Returns:
        dict: Node type name to new representations.
    """
    _check_types(view, h, params)
    config = params.config
    head_dim = config.head_dim
    prefix = f"layer{layer}"
    out = {}
    for node_type, x in h.items():
        n = x.rows
        incoming = view.incoming(node_type)
        heads = []
        for head in range(config.heads):
            if not incoming or n == 0:
                heads.append(_zeros(n, head_dim))
                continue
            query = ops.matmul(x, params[f"{prefix}.Q.{node_type}.head{head}"])
            logits, values, targets = [], [], []
            for relation in incoming:
                key = ops.matmul(h[relation.source], params[f"{prefix}.K.{relation.source}.head{head}"])
                value = ops.matmul(h[relation.source], params[f"{prefix}.V.{relation.source}.head{head}"])
                k = ops.matmul(
                    ops.gather_rows(key, relation.src),
                    params[f"{prefix}.att.{relation.name}.head{head}"],
                )
                q = ops.gather_rows(query, relation.dst)
                logits.append(ops.scale(ops.row_dot(k, q), 1.0 / np.sqrt(head_dim)))
                values.append(
                    ops.matmul(
                        ops.gather_rows(value, relation.src),
                        params[f"{prefix}.msg.{relation.name}.head{head}"],
                    )
                )
                targets.append(relation.dst)

            dst = np.concatenate(targets)
            weights = ops.segment_softmax(ops.concat_rows(logits), dst, n)
            messages = ops.scale_rows(ops.concat_rows(values), weights)
            heads.append(ops.segment_sum(messages, dst, n))
            if trace is not None:
                trace[(layer, node_type, head)] = (dst.copy(), weights.data[:, 0].copy())

        message = heads[0] if len(heads) == 1 else ops.concat_cols(heads)
        if message.cols != x.cols:
            raise DimensionError(f"Residual of {node_type} has {x.cols} columns, message {message.cols}")
        out[node_type] = ops.add(ops.matmul(message, params[f"{prefix}.A.{node_type}"]), x)
    return out
