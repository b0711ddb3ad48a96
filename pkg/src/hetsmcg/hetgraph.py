"""The per-article heterogeneous social media context graph.

A graph holds exactly one news node, any number of tweet and user nodes and
typed edges between them. Edges are stored per (source type, relation, target
type) key as an (E, 2) array of (source index, target index) pairs, indices
counting within the node type blocks.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from hetsmcg.errors import ContractError, InputError

logger = logging.getLogger(__name__)

TWEET_SOCIAL_FEATURES = 2
USER_SOCIAL_FEATURES = 4


class NodeType(str, Enum):
    """The disjoint vertex sets of a graph."""

    NEWS = "news"
    TWEET = "tweet"
    USER = "user"


class RelationType(str, Enum):
    """The edge types, the rev_ variants only exist in undirected graphs."""

    CITES = "cites"
    POSTS = "posts"
    RETWEETS = "retweets"
    REV_CITES = "rev_cites"
    REV_POSTS = "rev_posts"
    REV_RETWEETS = "rev_retweets"

    @property
    def signature(self) -> tuple[NodeType, NodeType]:
        """The (source type, target type) pair edges of this relation connect."""
        return SIGNATURES[self]

    @property
    def is_reversed(self) -> bool:
        """If this is a reversed relation."""
        return self.value.startswith("rev_")

    @property
    def reversed(self) -> RelationType:
        """The relation pointing the other way."""
        if self.is_reversed:
            return RelationType(self.value[len("rev_") :])
        return RelationType("rev_" + self.value)


SIGNATURES = {
    RelationType.CITES: (NodeType.TWEET, NodeType.NEWS),
    RelationType.POSTS: (NodeType.USER, NodeType.TWEET),
    RelationType.RETWEETS: (NodeType.TWEET, NodeType.TWEET),
    RelationType.REV_CITES: (NodeType.NEWS, NodeType.TWEET),
    RelationType.REV_POSTS: (NodeType.TWEET, NodeType.USER),
    RelationType.REV_RETWEETS: (NodeType.TWEET, NodeType.TWEET),
}

FORWARD_RELATIONS = [RelationType.CITES, RelationType.POSTS, RelationType.RETWEETS]

# Flattening order of the node blocks
NODE_ORDER = [NodeType.NEWS, NodeType.TWEET, NodeType.USER]


def edge_key(relation: RelationType) -> tuple[NodeType, RelationType, NodeType]:
    """Returns the well typed (source type, relation, target type) key of a relation."""
    source, target = relation.signature
    return source, relation, target


def _edge_array(pairs) -> np.ndarray:
    array = np.asarray(pairs, dtype=np.int64)
    if array.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    return array.reshape(-1, 2)


@dataclass
class HeteroGraph:
    """One heterogeneous snapshot around a news article.

    Attributes:
        article_id (str): The id of the news article.
        label (int): 0 for real news, 1 for fake news.
        features (dict): NodeType to an (n, d) feature matrix, every type is present, possibly with zero rows.
        edges (dict): (source type, relation, target type) to an (E, 2) int array.
        news_index (int): Index of the news node inside the news block, always 0.
    """

    article_id: str
    label: int
    features: dict
    edges: dict = field(default_factory=dict)
    news_index: int = 0

    def num_nodes(self, node_type: NodeType) -> int:
        """Returns the number of nodes of a type."""
        block = self.features.get(node_type)
        return 0 if block is None else block.shape[0]

    def feature_dim(self, node_type: NodeType) -> int:
        """Returns the feature dimension of a node type."""
        return self.features[node_type].shape[1]

    @property
    def d_text(self) -> int:
        """The text embedding dimension, the width of the news features."""
        return self.feature_dim(NodeType.NEWS)

    @property
    def total_nodes(self) -> int:
        """The number of nodes over all types."""
        return sum(self.num_nodes(node_type) for node_type in NodeType)

    @property
    def total_edges(self) -> int:
        """The number of edges over all relations."""
        return sum(pairs.shape[0] for pairs in self.edges.values())

    @property
    def is_undirected(self) -> bool:
        """If the graph carries reversed relations."""
        return any(relation.is_reversed for _, relation, _ in self.edges)

    def relation_edges(self, relation: RelationType) -> np.ndarray:
        """Returns the edges of a relation under its well typed key, empty if there are none."""
        return self.edges.get(edge_key(relation), np.zeros((0, 2), dtype=np.int64))

    def to_json(self) -> dict:
        """Returns a json representation of the graph.

        Returns:
            dict: The json representation of the graph.
        """
        edges = {}
        for (source, relation, target), pairs in self.edges.items():
            if (source, target) != relation.signature:
                raise ContractError(
                    f"Edge key ({source.value}, {relation.value}, {target.value}) cannot be serialized"
                )
            edges[relation.value] = pairs.tolist()

        return {
            "article_id": self.article_id,
            "label": int(self.label),
            "nodes": {
                node_type.value: self.features[node_type].tolist() for node_type in NODE_ORDER
            },
            "dims": {node_type.value: self.feature_dim(node_type) for node_type in NODE_ORDER},
            "edges": edges,
        }

    @classmethod
    def from_json(cls, data: dict) -> HeteroGraph:
        """Creates a graph from its json representation.

        Args:
            data (dict): The json representation of the graph.

        Returns:
            HeteroGraph: The graph.

        Raises:
            ContractError: If a node type or relation is unknown.
            InputError: If a required entry is missing.
        """
        try:
            dims = data.get("dims", {})
            features = {}
            for name, rows in data["nodes"].items():
                node_type = NodeType(name)
                if len(rows) == 0:
                    features[node_type] = np.zeros((0, int(dims.get(name, 0))))
                else:
                    features[node_type] = np.asarray(rows, dtype=np.float64).reshape(len(rows), -1)
            for node_type in NodeType:
                features.setdefault(node_type, np.zeros((0, int(dims.get(node_type.value, 0)))))

            edges = {
                edge_key(RelationType(name)): _edge_array(pairs)
                for name, pairs in data["edges"].items()
            }
            article_id = str(data["article_id"])
            label = int(data["label"])
        except KeyError as error:
            raise InputError(f"Graph json misses the entry {error}")
        except ValueError as error:
            raise ContractError(f"Unknown node type or relation in graph: {error}")

        return cls(article_id=article_id, label=label, features=features, edges=edges)


@dataclass
class HomoGraph:
    """A flattened graph with one node type and one edge type.

    Attributes:
        article_id (str): The id of the news article.
        label (int): 0 for real news, 1 for fake news.
        features (np.ndarray): The (n, d) features of all nodes.
        edges (np.ndarray): The (E, 2) global edge list.
        news_index (int): The global index of the news node.
        offsets (dict): NodeType to the global index of the first node of that block.
    """

    article_id: str
    label: int
    features: np.ndarray
    edges: np.ndarray
    news_index: int
    offsets: dict

    @property
    def num_nodes(self) -> int:
        """The number of nodes."""
        return self.features.shape[0]


class FlattenMode(str, Enum):
    """How node features of differing width are unified when flattening."""

    TRUNCATE = "truncate"
    PAD = "pad"


@dataclass
class DegreeStats:
    """Node counts per type and edge counts per relation.

    Attributes:
        node_counts (dict): NodeType to number of nodes.
        edge_counts (dict): RelationType to number of edges, for every relation stored in the graph.
    """

    node_counts: dict
    edge_counts: dict


def validate(graph: HeteroGraph) -> list[str]:
    """Collects all violations of the graph invariants.

    Args:
        graph (HeteroGraph): The graph to check.

    Returns:
        list[str]: The violations, an empty list means the graph is valid.
    """
    violations = []

    n_news = graph.num_nodes(NodeType.NEWS)
    if n_news != 1:
        violations.append(f"|V_N| != 1 (found {n_news})")
    if graph.news_index != 0:
        violations.append(f"news index is {graph.news_index}, expected 0")
    if graph.label not in (0, 1):
        violations.append(f"label {graph.label} is not 0 or 1")

    missing = [node_type.value for node_type in NodeType if node_type not in graph.features]
    if missing:
        violations.append(f"missing feature blocks: {', '.join(missing)}")
    else:
        d_text = graph.d_text
        tweet_dim = graph.feature_dim(NodeType.TWEET)
        user_dim = graph.feature_dim(NodeType.USER)
        text_only = tweet_dim == d_text and user_dim == d_text
        with_social = (
            tweet_dim == d_text + TWEET_SOCIAL_FEATURES
            and user_dim == d_text + USER_SOCIAL_FEATURES
        )
        if not (text_only or with_social):
            violations.append(
                f"feature dims news={d_text} tweet={tweet_dim} user={user_dim} fit no feature mode"
            )
        for node_type, block in graph.features.items():
            if not np.all(np.isfinite(block)):
                violations.append(f"non-finite features in {node_type.value} block")

    seen_reversed = False
    for key, pairs in graph.edges.items():
        source, relation, target = key
        if (source, target) != relation.signature:
            violations.append(
                f"relation signature: {source.value} -{relation.value}-> {target.value}"
            )
            continue
        if relation.is_reversed:
            seen_reversed = True
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            violations.append(f"edge array of {relation.value} has shape {pairs.shape}")
            continue
        if pairs.shape[0] == 0:
            continue
        if (
            pairs[:, 0].min() < 0
            or pairs[:, 0].max() >= graph.num_nodes(source)
            or pairs[:, 1].min() < 0
            or pairs[:, 1].max() >= graph.num_nodes(target)
        ):
            violations.append(f"edge index out of range in {relation.value}")
        if np.unique(pairs, axis=0).shape[0] != pairs.shape[0]:
            violations.append(f"duplicate edges in {relation.value}")

    if seen_reversed:
        for relation in FORWARD_RELATIONS:
            forward = {tuple(pair) for pair in graph.relation_edges(relation).tolist()}
            backward = {
                (target, source)
                for source, target in graph.relation_edges(relation.reversed).tolist()
            }
            if forward != backward:
                violations.append(f"{relation.reversed.value} does not mirror {relation.value}")

    return violations


def make_undirected(graph: HeteroGraph) -> HeteroGraph:
    """Adds a reversed edge of the reversed relation type for every edge.

    Args:
        graph (HeteroGraph): A graph with forward relations only.

    Returns:
        HeteroGraph: A new graph with twice as many edges.

    Raises:
        ContractError: If the graph already carries reversed relations.
    """
    if graph.is_undirected:
        raise ContractError(f"Graph {graph.article_id} is already undirected")

    edges = {}
    for (source, relation, target), pairs in graph.edges.items():
        edges[(source, relation, target)] = pairs.copy()
        edges[(target, relation.reversed, source)] = pairs[:, ::-1].copy()

    return HeteroGraph(
        article_id=graph.article_id,
        label=graph.label,
        features=graph.features,
        edges=edges,
        news_index=graph.news_index,
    )


def flatten(graph: HeteroGraph, mode: FlattenMode | str) -> HomoGraph:
    """Flattens a heterogeneous graph into one node set and one edge list.

    Node blocks are concatenated in the order news, tweet, user. In truncate mode
    every row keeps its first d_text columns, in pad mode rows are zero padded to
    d_text + 4 columns.

    Args:
        graph (HeteroGraph): The graph to flatten.
        mode (FlattenMode | str): "truncate" or "pad".

    Returns:
        HomoGraph: The flattened graph.
    """
    mode = FlattenMode(mode)
    d_text = graph.d_text
    width = d_text if mode == FlattenMode.TRUNCATE else d_text + USER_SOCIAL_FEATURES

    offsets = {}
    blocks = []
    position = 0
    for node_type in NODE_ORDER:
        block = graph.features[node_type]
        offsets[node_type] = position
        position += block.shape[0]
        if mode == FlattenMode.TRUNCATE:
            blocks.append(block[:, :d_text])
        else:
            padded = np.zeros((block.shape[0], width))
            padded[:, : block.shape[1]] = block
            blocks.append(padded)

    pairs = []
    for (source, relation, target), relation_pairs in graph.edges.items():
        if relation_pairs.shape[0] == 0:
            continue
        shift = np.array([offsets[source], offsets[target]], dtype=np.int64)
        pairs.append(relation_pairs + shift)

    edges = np.concatenate(pairs, axis=0) if pairs else np.zeros((0, 2), dtype=np.int64)

    return HomoGraph(
        article_id=graph.article_id,
        label=graph.label,
        features=np.concatenate(blocks, axis=0),
        edges=edges,
        news_index=offsets[NodeType.NEWS] + graph.news_index,
        offsets=offsets,
    )


def degree_stats(graph: HeteroGraph) -> DegreeStats:
    """Counts nodes per type and edges per relation.

    Args:
        graph (HeteroGraph): The graph.

    Returns:
        DegreeStats: The counts.
    """
    node_counts = {node_type: graph.num_nodes(node_type) for node_type in NodeType}
    edge_counts = {}
    for (_, relation, _), pairs in graph.edges.items():
        edge_counts[relation] = edge_counts.get(relation, 0) + int(pairs.shape[0])
    return DegreeStats(node_counts=node_counts, edge_counts=edge_counts)


# Snapshot serialization


def dumps_graph(graph: HeteroGraph) -> str:
    """Serializes a graph to a deterministic json string."""
    return json.dumps(graph.to_json(), sort_keys=True)


def save_graph(graph: HeteroGraph, path: Path | str) -> None:
    """Writes one graph snapshot to a json file."""
    Path(path).write_text(dumps_graph(graph), encoding="utf-8")


def load_graph(path: Path | str) -> HeteroGraph:
    """Reads one graph snapshot from a json file.

    Raises:
        InputError: If the file does not exist or is not valid json.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputError(f"Graph file {path} not found")
    except json.JSONDecodeError as error:
        raise InputError(f"Graph file {path} is not valid json: {error}")
    return HeteroGraph.from_json(data)


@dataclass
class GraphDataset:
    """A list of graphs together with the manifest describing how they were built.

    Attributes:
        graphs (list): The graphs, ordered by article id.
        metadata (dict): Setup, feature mode, d_text and other build information.
        folds (list | None): Fold index per graph, if a fold assignment was stored.
        datasets (list): Dataset tag per graph.
    """

    graphs: list
    metadata: dict = field(default_factory=dict)
    folds: list = None
    datasets: list = None

    @property
    def labels(self) -> np.ndarray:
        """The labels of all graphs."""
        return np.array([graph.label for graph in self.graphs], dtype=np.int64)

    @property
    def article_ids(self) -> list:
        """The article ids of all graphs."""
        return [graph.article_id for graph in self.graphs]


MANIFEST = "manifest.json"
GRAPH_DIR = "graphs"


def save_dataset(dataset: GraphDataset, directory: Path | str) -> None:
    """Writes a dataset as one json file per graph plus a manifest.

    Args:
        dataset (GraphDataset): The dataset to write.
        directory (Path | str): The target directory, created if needed.
    """
    directory = Path(directory)
    (directory / GRAPH_DIR).mkdir(parents=True, exist_ok=True)

    articles = []
    for index, graph in enumerate(dataset.graphs):
        save_graph(graph, directory / GRAPH_DIR / f"{graph.article_id}.json")
        entry = {"id": graph.article_id, "label": int(graph.label)}
        if dataset.datasets is not None:
            entry["dataset"] = dataset.datasets[index]
        if dataset.folds is not None:
            entry["fold"] = int(dataset.folds[index])
        articles.append(entry)

    manifest = {"articles": articles, "metadata": dataset.metadata}
    (directory / MANIFEST).write_text(
        json.dumps(manifest, sort_keys=True, indent=2), encoding="utf-8"
    )
    logger.info("Wrote %d graphs to %s", len(dataset.graphs), directory)


def load_dataset(directory: Path | str) -> GraphDataset:
    """Reads a dataset written by :func:`save_dataset`.

    Args:
        directory (Path | str): The dataset directory.

    Returns:
        GraphDataset: The dataset in manifest order.

    Raises:
        InputError: If the directory or its manifest is missing.
    """
    directory = Path(directory)
    manifest_path = directory / MANIFEST
    if not manifest_path.is_file():
        raise InputError(f"No graph dataset manifest found in {directory}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as error:
        raise InputError(f"Manifest {manifest_path} is not valid json: {error}")

    articles = manifest["articles"]
    graphs = [load_graph(directory / GRAPH_DIR / f"{entry['id']}.json") for entry in articles]
    folds = [entry["fold"] for entry in articles] if all("fold" in e for e in articles) else None
    datasets = [entry.get("dataset", "") for entry in articles]

    logger.info("Loaded %d graphs from %s", len(graphs), directory)
    return GraphDataset(
        graphs=graphs,
        metadata=manifest.get("metadata", {}),
        folds=folds if articles else None,
        datasets=datasets,
    )
