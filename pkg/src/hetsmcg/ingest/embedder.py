"""Text embedders that turn documents into fixed size vectors.

Two kinds exist: a deterministic signed feature hashing embedder and a lookup of
precomputed vectors keyed by the SHA-256 of the text.
"""

from __future__ import annotations

import functools
import hashlib
import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.feature_extraction.text import HashingVectorizer

from hetsmcg.errors import ConfigurationError, EmbeddingMissError, InputError

logger = logging.getLogger(__name__)

TOKEN_PATTERN = re.compile(r"\w+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Splits a text on whitespace and punctuation and lowercases the tokens."""
    return TOKEN_PATTERN.findall(text.lower())


def content_key(text: str) -> str:
    """The lookup key of a text in a precomputed embedding file."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class Embedder:
    """Base class of all embedders.

    Subclasses register themselves by their ``kind`` and implement ``_embed``.
    Embedded texts are memoised per instance.

    Args:
        dim (int): The output dimension.

    Attributes:
        dim (int): The output dimension.
    """

    kind: str
    subclasses = []

    def __init_subclass__(cls, **kwargs):
        """Registers the subclass."""
        super().__init_subclass__(**kwargs)
        cls.subclasses.append(cls)

    def __init__(self, dim: int) -> None:
        """Initializes the embedder."""
        if dim <= 0:
            raise ConfigurationError(f"Embedding dimension needs to be positive, got {dim}")
        self.dim = dim
        self._cache = {}

    def embed(self, text: str) -> np.ndarray:
        """Returns the embedding of a text.

        Args:
            text (str): The text.

        Returns:
            np.ndarray: A vector of length ``dim``.
        """
        vector = self._cache.get(text)
        if vector is None:
            vector = self._embed(text)
            self._cache[text] = vector
        return vector

    def _embed(self, text: str) -> np.ndarray:
        raise NotImplementedError

    @classmethod
    def by_kind(cls, kind: str) -> type:
        """Returns the embedder class registered for a kind.

        Raises:
            ConfigurationError: If no embedder has this kind.
        """
        for subclass in cls.subclasses:
            if subclass.kind == kind:
                return subclass
        raise ConfigurationError(f"Unknown embedder kind {kind}")


def salted_tokens(text: str, seed: int) -> list[str]:
    """The tokens of a text, each prefixed with the seed so seeds hash differently."""
    return [f"{seed}:{token}" for token in tokenize(text)]


class HashingEmbedder(Embedder):
    """Signed feature hashing of lowercased word tokens, L2 normalized.

    Built on scikit-learn's ``HashingVectorizer``: every seed salted token selects
    a bucket in [0, dim) and a sign, the signed counts are accumulated and the
    vector is scaled to unit length. The empty text maps to the zero vector.

    Args:
        dim (int): The output dimension.
        seed (int): Seed of the hash function, any integer.
    """

    kind = "hashing"

    def __init__(self, dim: int, seed: int = 0) -> None:
        """Initializes the hashing embedder."""
        super().__init__(dim)
        self.seed = int(seed)
        self._vectorizer = HashingVectorizer(
            n_features=dim,
            analyzer=functools.partial(salted_tokens, seed=self.seed),
            alternate_sign=True,
            norm="l2",
        )

    def _embed(self, text: str) -> np.ndarray:
        return self._vectorizer.transform([text]).toarray()[0].astype(np.float64)


class PrecomputedEmbedder(Embedder):
    """Looks texts up in a json map from SHA-256 hex digest to vector.

    Args:
        path (Path | str): The json file.
        dim (int): The expected dimension.
        on_miss (str): "error" to raise on unknown texts, "zero" to return a zero vector with a warning.
    """

    kind = "precomputed"

    def __init__(self, path: Path | str, dim: int, on_miss: str = "error") -> None:
        """Initializes the embedder and reads the vectors."""
        super().__init__(dim)
        if on_miss not in ("error", "zero"):
            raise ConfigurationError(f"on_miss must be error or zero, got {on_miss}")
        self.path = Path(path)
        self.on_miss = on_miss
        self.misses = 0
        try:
            data = json.loads(self.path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise InputError(f"Embedding file {self.path} not found")
        except json.JSONDecodeError as error:
            raise InputError(f"Embedding file {self.path} is not valid json: {error}")

        self.vectors = {}
        for key, values in data.items():
            vector = np.asarray(values, dtype=np.float64)
            if vector.shape != (dim,):
                raise InputError(
                    f"Embedding {key} in {self.path} has shape {vector.shape}, expected ({dim},)"
                )
            self.vectors[key] = vector
        logger.info("Read %d precomputed embeddings from %s", len(self.vectors), self.path)

    def _embed(self, text: str) -> np.ndarray:
        key = content_key(text)
        vector = self.vectors.get(key)
        if vector is not None:
            return vector.copy()
        if self.on_miss == "error":
            raise EmbeddingMissError(f"No precomputed embedding for text with key {key}")
        self.misses += 1
        logger.warning("No precomputed embedding for key %s, using the zero vector", key)
        return np.zeros(self.dim)


@dataclass(frozen=True)
class EmbedderSpec:
    """Describes which embedder to build.

    Attributes:
        kind (str): "hashing" or "precomputed".
        dim (int): The output dimension D_text.
        seed (int): Seed of the hashing embedder.
        path (str | None): The embedding file of the precomputed embedder.
        on_miss (str): Miss policy of the precomputed embedder.
    """

    kind: str
    dim: int
    seed: int = 0
    path: str = None
    on_miss: str = "error"

    @classmethod
    def parse(cls, text: str, dim: int, seed: int = 0, on_miss: str = "error") -> EmbedderSpec:
        """Parses "hashing" or "precomputed:FILE".

        Args:
            text (str): The embedder description.
            dim (int): The output dimension.
            seed (int): Seed of the hashing embedder.
            on_miss (str): Miss policy of the precomputed embedder.

        Returns:
            EmbedderSpec: The spec.
        """
        kind, _, path = text.partition(":")
        if kind == HashingEmbedder.kind and not path:
            return cls(kind=kind, dim=dim, seed=seed)
        if kind == PrecomputedEmbedder.kind and path:
            return cls(kind=kind, dim=dim, path=path, on_miss=on_miss)
        raise ConfigurationError(f"Embedder must be hashing or precomputed:FILE, got {text!r}")

    def build(self) -> Embedder:
        """Creates the embedder described by this spec."""
        embedder_class = Embedder.by_kind(self.kind)
        if embedder_class is PrecomputedEmbedder:
            return PrecomputedEmbedder(self.path, self.dim, self.on_miss)
        return embedder_class(self.dim, seed=self.seed)


@functools.lru_cache(maxsize=8)
def _embedder_for(spec: EmbedderSpec) -> Embedder:
    return spec.build()


def embed_text(text: str, spec: EmbedderSpec) -> np.ndarray:
    """Embeds one text with the embedder described by ``spec``.

    Args:
        text (str): The text.
        spec (EmbedderSpec): The embedder description.

    Returns:
        np.ndarray: A vector of length ``spec.dim``.
    """
    return _embedder_for(spec).embed(text).copy()
