"""Two layer heterogeneous and homogeneous graph neural networks."""

from hetsmcg.gnn.config import Activation, ConvType, GraphMode, ModelConfig, Readout
from hetsmcg.gnn.layers import GraphView, Relation, gat_layer, hgt_layer, sage_layer
from hetsmcg.gnn.model import GraphClassifier, embed_nodes, forward, input_dims, predict
from hetsmcg.gnn.params import (
    ModelParams,
    init_params,
    load_checkpoint,
    parameter_count,
    parameter_shapes,
    save_checkpoint,
)

__all__ = [
    "Activation",
    "ConvType",
    "GraphClassifier",
    "GraphMode",
    "GraphView",
    "ModelConfig",
    "ModelParams",
    "Readout",
    "Relation",
    "embed_nodes",
    "forward",
    "gat_layer",
    "hgt_layer",
    "init_params",
    "input_dims",
    "load_checkpoint",
    "parameter_count",
    "parameter_shapes",
    "predict",
    "sage_layer",
    "save_checkpoint",
]
