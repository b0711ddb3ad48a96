"""Parameters of the graph classifiers, their initialization and checkpoints.

Parameter names are dot separated paths whose components name the layer, the
node type or relation and the head, e.g. ``layer0.rel.cites.head0.W``. In
homogeneous mode the only node type is ``node`` and the only relation ``edge``.
"""

from __future__ import annotations

import json
import logging
from collections import OrderedDict
from pathlib import Path

import numpy as np

from hetsmcg.errors import ContractError, DimensionError, InputError
from hetsmcg.gnn.config import N_LAYERS, ConvType, ModelConfig
from hetsmcg.helpers import write_json
from hetsmcg.hetgraph import NodeType, RelationType
from hetsmcg.numkit import Tensor

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1

HOMO_NODE = "node"
HOMO_RELATION = "edge"


def schema(config: ModelConfig) -> tuple[list, dict]:
    """The node types and relations a model has parameters for.

    Returns:
        tuple[list, dict]: The node type names and relation name to (source type, target type).
    """
    if config.mode.is_homo:
        return [HOMO_NODE], {HOMO_RELATION: (HOMO_NODE, HOMO_NODE)}
    relations = OrderedDict()
    for relation in RelationType:
        source, target = relation.signature
        relations[relation.value] = (source.value, target.value)
    return [node_type.value for node_type in NodeType], relations


def glorot(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Glorot uniform samples in [-sqrt(6 / (rows + cols)), sqrt(6 / (rows + cols))]."""
    bound = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-bound, bound, size=(rows, cols))


def parameter_shapes(config: ModelConfig, input_dims: dict) -> OrderedDict:
    """Name to shape of every parameter, in initialization order.

    Args:
        config (ModelConfig): The architecture.
        input_dims (dict): Node type name to input feature dimension.

    Returns:
        OrderedDict: Parameter name to (rows, cols).
    """
    types, relations = schema(config)
    missing = set(types) - set(input_dims)
    if missing:
        raise ContractError(f"No input dimension for node types {sorted(missing)}")
    hidden = config.hidden_dim
    shapes = OrderedDict()

    for node_type in types:
        if input_dims[node_type] <= 0:
            raise DimensionError(f"Input dimension of {node_type} must be positive")
        shapes[f"proj.{node_type}.W"] = (input_dims[node_type], hidden)
        shapes[f"proj.{node_type}.b"] = (1, hidden)

    for layer in range(N_LAYERS):
        final = layer == N_LAYERS - 1
        prefix = f"layer{layer}"
        if config.conv_type == ConvType.SAGE:
            for node_type in types:
                shapes[f"{prefix}.self.{node_type}.W"] = (hidden, hidden)
            for relation in relations:
                shapes[f"{prefix}.rel.{relation}.W"] = (hidden, hidden)

        elif config.conv_type == ConvType.GAT:
            head_dim = hidden if final else config.head_dim
            for relation in relations:
                for head in range(config.heads):
                    shapes[f"{prefix}.rel.{relation}.head{head}.W"] = (hidden, head_dim)
                    shapes[f"{prefix}.rel.{relation}.head{head}.a_src"] = (head_dim, 1)
                    shapes[f"{prefix}.rel.{relation}.head{head}.a_dst"] = (head_dim, 1)

        else:
            head_dim = config.head_dim
            for node_type in types:
                for head in range(config.heads):
                    for kind in ("K", "Q", "V"):
                        shapes[f"{prefix}.{kind}.{node_type}.head{head}"] = (hidden, head_dim)
            for relation in relations:
                for head in range(config.heads):
                    shapes[f"{prefix}.att.{relation}.head{head}"] = (head_dim, head_dim)
                    shapes[f"{prefix}.msg.{relation}.head{head}"] = (head_dim, head_dim)
            for node_type in types:
                shapes[f"{prefix}.A.{node_type}"] = (hidden, hidden)

    shapes["head.W"] = (hidden, 2)
    shapes["head.b"] = (1, 2)
    return shapes


class ModelParams:
    """The named parameter tensors of one model.

    Args:
        config (ModelConfig): The architecture.
        input_dims (dict): Node type name to input feature dimension.
        tensors (OrderedDict): Parameter name to Tensor.

    Attributes:
        config (ModelConfig): The architecture.
        input_dims (dict): Node type name to input feature dimension.
        tensors (OrderedDict): Parameter name to Tensor, all with requires_grad.
    """

    def __init__(self, config: ModelConfig, input_dims: dict, tensors: OrderedDict) -> None:
        """Initializes the parameters and checks their shapes."""
        expected = parameter_shapes(config, input_dims)
        if list(expected) != list(tensors):
            raise ContractError("Parameter names do not match the model config")
        for name, shape in expected.items():
            if tensors[name].shape != shape:
                raise DimensionError(
                    f"Parameter {name} has shape {tensors[name].shape}, expected {shape}"
                )
        self.config = config
        self.input_dims = dict(input_dims)
        self.tensors = tensors

    def __getitem__(self, name: str) -> Tensor:
        """Returns a parameter by name."""
        return self.tensors[name]

    def __contains__(self, name: str) -> bool:
        """If a parameter with this name exists."""
        return name in self.tensors

    def __iter__(self):
        """Iterates over the parameter names."""
        return iter(self.tensors)

    def items(self):
        """(name, tensor) pairs."""
        return self.tensors.items()

    @property
    def node_types(self) -> list:
        """The node type names the model has parameters for."""
        return schema(self.config)[0]

    @property
    def relations(self) -> dict:
        """Relation name to (source type, target type)."""
        return schema(self.config)[1]

    def to_arrays(self) -> OrderedDict:
        """Copies of all parameter values."""
        return OrderedDict((name, tensor.data.copy()) for name, tensor in self.tensors.items())

    def load_arrays(self, arrays: dict) -> None:
        """Overwrites parameter values, e.g. after an optimizer step."""
        for name, value in arrays.items():
            if value.shape != self.tensors[name].shape:
                raise DimensionError(f"Value for {name} has shape {value.shape}")
            self.tensors[name].data = np.array(value, dtype=np.float64)

    def zero_grad(self) -> None:
        """Drops all gradients."""
        for tensor in self.tensors.values():
            tensor.zero_grad()


def init_params(config: ModelConfig, input_dims: dict, seed: int) -> ModelParams:
    """Creates Glorot uniform weights and zero biases.

    Args:
        config (ModelConfig): The architecture.
        input_dims (dict): Node type name to input feature dimension.
        seed (int): Seed of the initialization.

    Returns:
        ModelParams: The parameters, identical for identical seeds.
    """
    rng = np.random.default_rng(seed)
    tensors = OrderedDict()
    for name, (rows, cols) in parameter_shapes(config, input_dims).items():
        if name.endswith(".b"):
            value = np.zeros((rows, cols))
        else:
            value = glorot(rng, rows, cols)
        tensors[name] = Tensor(value, requires_grad=True, name=name)
    return ModelParams(config, input_dims, tensors)


def parameter_count(params: ModelParams) -> int:
    """The number of scalar parameters."""
    return int(sum(tensor.data.size for tensor in params.tensors.values()))


def save_checkpoint(path: Path | str, params: ModelParams) -> None:
    """Writes the parameters with their config as json.

    Args:
        path (Path | str): The checkpoint file.
        params (ModelParams): The parameters.
    """
    data = {
        "version": CHECKPOINT_VERSION,
        "config": params.config.to_json(),
        "config_hash": params.config.fingerprint,
        "input_dims": params.input_dims,
        "params": {
            name: {"shape": list(tensor.shape), "values": tensor.data.ravel().tolist()}
            for name, tensor in params.tensors.items()
        },
    }
    write_json(path, data)
    logger.info("Saved %d parameters to %s", parameter_count(params), path)


def load_checkpoint(path: Path | str) -> ModelParams:
    """Reads a checkpoint written by :func:`save_checkpoint`.

    Args:
        path (Path | str): The checkpoint file.

    Returns:
        ModelParams: The parameters.

    Raises:
        InputError: If the file is missing, unreadable or of another version.
        ContractError: If the stored config hash does not match the stored config.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputError(f"Checkpoint {path} not found")
    except json.JSONDecodeError as error:
        raise InputError(f"Checkpoint {path} is not valid json: {error}")
    if data.get("version") != CHECKPOINT_VERSION:
        raise InputError(f"Checkpoint {path} has unsupported version {data.get('version')}")

    config = ModelConfig.from_json(data["config"])
    if config.fingerprint != data.get("config_hash"):
        raise ContractError(f"Config hash of checkpoint {path} does not match its config")

    tensors = OrderedDict()
    for name, entry in data["params"].items():
        value = np.asarray(entry["values"], dtype=np.float64).reshape(entry["shape"])
        tensors[name] = Tensor(value, requires_grad=True, name=name)
    return ModelParams(config, data["input_dims"], tensors)
