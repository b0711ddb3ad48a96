"""Configuration of the graph classification models."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from enum import Enum

from hetsmcg.errors import ConfigurationError
from hetsmcg.helpers import fingerprint
from hetsmcg.hetgraph import FlattenMode

logger = logging.getLogger(__name__)

N_LAYERS = 2


class ConvType(str, Enum):
    """The graph convolution families."""

    SAGE = "sage"
    GAT = "gat"
    HGT = "hgt"


class GraphMode(str, Enum):
    """If the model sees the heterogeneous graph or one of its flattenings."""

    HETERO = "hetero"
    HOMO_TRUNCATE = "homo-truncate"
    HOMO_PAD = "homo-pad"

    @property
    def is_homo(self) -> bool:
        """If graphs are flattened before the forward pass."""
        return self != GraphMode.HETERO

    @property
    def flatten_mode(self) -> FlattenMode | None:
        """The flattening used by this mode, None for hetero."""
        if self == GraphMode.HOMO_TRUNCATE:
            return FlattenMode.TRUNCATE
        if self == GraphMode.HOMO_PAD:
            return FlattenMode.PAD
        return None


class Readout(str, Enum):
    """How node representations are reduced to one graph representation."""

    NEWS_NODE = "news_node"
    MEAN_ALL = "mean_all"


class Activation(str, Enum):
    """The activation between the two layers."""

    ELU = "elu"
    RELU = "relu"
    LEAKY_RELU = "leaky_relu"


def _coerce(enum_class, value, name: str):
    try:
        return enum_class(value)
    except ValueError:
        choices = ", ".join(member.value for member in enum_class)
        raise ConfigurationError(f"Unknown {name} {value!r}, expected one of {choices}")


@dataclass(frozen=True)
class ModelConfig:
    """Architecture of a two layer graph classifier.

    Attributes:
        conv_type (ConvType): SAGE, GAT or HGT.
        hidden_dim (int): Width of the hidden representations.
        n_layers (int): Always 2.
        heads (int): Attention heads of GAT and HGT, must divide hidden_dim.
        activation (Activation): Applied after the first layer.
        readout (Readout): news_node or mean_all.
        mode (GraphMode): hetero, homo-truncate or homo-pad.
    """

    conv_type: ConvType = ConvType.HGT
    hidden_dim: int = 64
    n_layers: int = N_LAYERS
    heads: int = 1
    activation: Activation = Activation.ELU
    readout: Readout = Readout.NEWS_NODE
    mode: GraphMode = GraphMode.HETERO

    def __post_init__(self) -> None:
        """Coerces strings to enums and validates the architecture."""
        object.__setattr__(self, "conv_type", _coerce(ConvType, self.conv_type, "conv type"))
        object.__setattr__(self, "activation", _coerce(Activation, self.activation, "activation"))
        object.__setattr__(self, "readout", _coerce(Readout, self.readout, "readout"))
        object.__setattr__(self, "mode", _coerce(GraphMode, self.mode, "graph mode"))
        if self.n_layers != N_LAYERS:
            raise ConfigurationError(f"Models have exactly {N_LAYERS} layers, got {self.n_layers}")
        if self.hidden_dim <= 0:
            raise ConfigurationError(f"hidden_dim must be positive, got {self.hidden_dim}")
        if self.heads <= 0 or self.hidden_dim % self.heads:
            raise ConfigurationError(
                f"heads ({self.heads}) must be positive and divide hidden_dim ({self.hidden_dim})"
            )

    @property
    def head_dim(self) -> int:
        """Columns of one head in a concatenating layer."""
        return self.hidden_dim // self.heads

    def to_json(self) -> dict:
        """Returns the config as a json dict with plain string values."""
        data = asdict(self)
        for key, value in data.items():
            if isinstance(value, Enum):
                data[key] = value.value
        return data

    @classmethod
    def from_json(cls, data: dict) -> ModelConfig:
        """Creates a config from :meth:`to_json` output."""
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigurationError(f"Unknown model parameters {sorted(unknown)}")
        return cls(**data)

    @property
    def fingerprint(self) -> str:
        """SHA-256 of the json form."""
        return fingerprint(self.to_json())
