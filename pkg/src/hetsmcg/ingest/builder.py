"""Construction of per-article heterogeneous graphs under the five experimental setups.

Building happens in two steps. :func:`plan_graph` decides which tweets, users and
edges belong to the graph of a setup, using ids only. :func:`materialize` then
embeds the texts and assembles the feature matrices. The size filter works on
plans, so the kept article set can be decided without embedding anything.
"""

from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from enum import Enum, IntEnum

import numpy as np

from hetsmcg.errors import ConfigurationError, ContractError, InputError
from hetsmcg.hetgraph import (
    HeteroGraph,
    NodeType,
    RelationType,
    edge_key,
    make_undirected,
    validate,
)
from hetsmcg.ingest.corpus import ArticleContext, CorpusIndex
from hetsmcg.ingest.embedder import Embedder, EmbedderSpec

logger = logging.getLogger(__name__)

MIN_NODES = 5
TIMELINE_CAP = 5

SKIP_NEWS_MISSING = "news missing"
SKIP_TOO_SMALL = "too small"


class Setup(IntEnum):
    """The incremental inclusion levels of social context."""

    S1_TWEETS = 1
    S2_PLUS_USERS = 2
    S3_PLUS_TIMELINE = 3
    S4_PLUS_RETWEETS = 4
    S5_ALL = 5

    @property
    def includes_users(self) -> bool:
        """If authors of tweets become user nodes."""
        return self >= Setup.S2_PLUS_USERS

    @property
    def includes_timeline(self) -> bool:
        """If timeline tweets of the citing authors are added."""
        return self in (Setup.S3_PLUS_TIMELINE, Setup.S5_ALL)

    @property
    def includes_retweets(self) -> bool:
        """If retweets of citing tweets and their authors are added."""
        return self in (Setup.S4_PLUS_RETWEETS, Setup.S5_ALL)

    @classmethod
    def parse(cls, value) -> Setup:
        """Accepts 3, "3" or "S3"."""
        text = str(value).upper().lstrip("S")
        try:
            return cls(int(text))
        except ValueError:
            raise ConfigurationError(f"Unknown setup {value!r}, expected 1 to 5")


class FeatureMode(str, Enum):
    """Which node features enter the graph."""

    TEXT_ONLY = "text"
    TEXT_PLUS_SOCIAL = "text+social"


class CountScaling(str, Enum):
    """How count features are scaled before they are appended to text embeddings."""

    LOG1P = "log1p"
    RAW = "raw"

    def apply(self, counts) -> np.ndarray:
        """Scales a sequence of non-negative counts."""
        counts = np.asarray(counts, dtype=np.float64)
        if self == CountScaling.LOG1P:
            return np.log1p(counts)
        return counts


@dataclass
class GraphPlan:
    """The nodes and edges of one graph, by record.

    Attributes:
        article (ArticleContext): The article the graph is built around.
        setup (Setup): The setup the plan was made for.
        tweets (list): Tweet records in node order.
        users (list): User records in node order.
        edges (dict): RelationType to an ordered dict of (source, target) index pairs.
    """

    article: ArticleContext
    setup: Setup
    tweets: list = field(default_factory=list)
    users: list = field(default_factory=list)
    edges: dict = field(default_factory=dict)

    def num_nodes(self, node_type: NodeType) -> int:
        """Returns the number of nodes of a type."""
        if node_type == NodeType.NEWS:
            return 1
        if node_type == NodeType.TWEET:
            return len(self.tweets)
        return len(self.users)

    def node_ids(self) -> dict:
        """NodeType to the set of record ids, for comparing setups."""
        return {
            NodeType.NEWS: {self.article.article_id},
            NodeType.TWEET: {tweet.tweet_id for tweet in self.tweets},
            NodeType.USER: {user.user_id for user in self.users},
        }

    def edge_ids(self) -> set:
        """The edges as (relation, source id, target id) triples, for comparing setups."""
        ids = {
            NodeType.NEWS: [self.article.article_id],
            NodeType.TWEET: [tweet.tweet_id for tweet in self.tweets],
            NodeType.USER: [user.user_id for user in self.users],
        }
        triples = set()
        for relation, pairs in self.edges.items():
            source, target = relation.signature
            for s, t in pairs:
                triples.add((relation.value, ids[source][s], ids[target][t]))
        return triples


def _latest(tweets: list, cap: int) -> list:
    """The cap most recent tweets, by created_at when every tweet has one, else by descending id."""
    if all(tweet.created_at is not None for tweet in tweets):
        ordered = sorted(tweets, key=lambda tweet: (tweet.created_at, tweet.tweet_id), reverse=True)
    elif all(tweet.tweet_id.isdigit() for tweet in tweets):
        ordered = sorted(tweets, key=lambda tweet: int(tweet.tweet_id), reverse=True)
    else:
        ordered = sorted(tweets, key=lambda tweet: tweet.tweet_id, reverse=True)
    return ordered[:cap]


def plan_graph(article: ArticleContext, setup: Setup, timeline_cap: int = TIMELINE_CAP) -> GraphPlan:
    """Decides the nodes and edges of an article's graph under a setup.

    Args:
        article (ArticleContext): The article.
        setup (Setup): The setup.
        timeline_cap (int): Timeline tweets per citing author.

    Returns:
        GraphPlan: The plan. First occurrences win when a tweet or user appears twice.
    """
    setup = Setup(setup)
    plan = GraphPlan(article=article, setup=setup)
    edges = {relation: OrderedDict() for relation in (RelationType.CITES, RelationType.POSTS, RelationType.RETWEETS)}
    tweet_index = {}
    user_index = {}

    def add_tweet(tweet) -> int:
        if tweet.tweet_id not in tweet_index:
            tweet_index[tweet.tweet_id] = len(plan.tweets)
            plan.tweets.append(tweet)
        return tweet_index[tweet.tweet_id]

    def add_author(tweet, tweet_position: int) -> int | None:
        user = article.users.get(tweet.user_id)
        if user is None:
            logger.debug("No profile for user %s in %s", tweet.user_id, article.article_id)
            return None
        if user.user_id not in user_index:
            user_index[user.user_id] = len(plan.users)
            plan.users.append(user)
        position = user_index[user.user_id]
        edges[RelationType.POSTS][(position, tweet_position)] = None
        return position

    for tweet in article.tweets:
        position = add_tweet(tweet)
        edges[RelationType.CITES][(position, 0)] = None

    if setup.includes_users:
        citing_authors = []
        for tweet in article.tweets:
            author = add_author(tweet, tweet_index[tweet.tweet_id])
            if author is not None and plan.users[author] not in citing_authors:
                citing_authors.append(plan.users[author])

        if setup.includes_timeline:
            for user in citing_authors:
                for tweet in _latest(article.timelines.get(user.user_id, []), timeline_cap):
                    position = add_tweet(tweet)
                    edges[RelationType.POSTS][(user_index[user.user_id], position)] = None

        if setup.includes_retweets:
            for tweet in article.retweets:
                original = tweet_index.get(tweet.of_tweet_id)
                if original is None:
                    continue
                position = add_tweet(tweet)
                if position != original:
                    edges[RelationType.RETWEETS][(position, original)] = None
                add_author(tweet, position)

    plan.edges = {relation: list(pairs) for relation, pairs in edges.items() if pairs}
    return plan


def min_size_filter(graph, setup: Setup, min_nodes: int = MIN_NODES) -> bool:
    """Checks that a graph has enough tweet and, if users are included, user nodes.

    The news type is exempt because every graph has exactly one news node.

    Args:
        graph: A HeteroGraph or GraphPlan.
        setup (Setup): The setup the graph was built for.
        min_nodes (int): The minimum number of nodes per type.

    Returns:
        bool: True if the graph passes.
    """
    if graph.num_nodes(NodeType.TWEET) < min_nodes:
        return False
    if Setup(setup).includes_users and graph.num_nodes(NodeType.USER) < min_nodes:
        return False
    return True


def materialize(
    plan: GraphPlan,
    feature_mode: FeatureMode | str,
    embedder: Embedder,
    scaling: CountScaling | str = CountScaling.LOG1P,
) -> HeteroGraph:
    """Embeds the texts of a plan and assembles the forward-only graph.

    Args:
        plan (GraphPlan): The plan.
        feature_mode (FeatureMode | str): "text" or "text+social".
        embedder (Embedder): The text embedder.
        scaling (CountScaling | str): Scaling of the count features.

    Returns:
        HeteroGraph: The graph with forward relations only.
    """
    feature_mode = FeatureMode(feature_mode)
    scaling = CountScaling(scaling)
    social = feature_mode == FeatureMode.TEXT_PLUS_SOCIAL
    dim = embedder.dim

    def block(rows: list, width: int) -> np.ndarray:
        if not rows:
            return np.zeros((0, width))
        return np.vstack(rows)

    news = embedder.embed(plan.article.news.text)

    tweet_rows = []
    for tweet in plan.tweets:
        row = embedder.embed(tweet.text)
        if social:
            row = np.concatenate([row, scaling.apply([tweet.retweet_count, tweet.favorite_count])])
        tweet_rows.append(row)

    user_rows = []
    for user in plan.users:
        row = embedder.embed(user.description)
        if social:
            row = np.concatenate([row, scaling.apply(user.counts)])
        user_rows.append(row)

    features = {
        NodeType.NEWS: np.array(news, dtype=np.float64).reshape(1, dim),
        NodeType.TWEET: block(tweet_rows, dim + 2 if social else dim),
        NodeType.USER: block(user_rows, dim + 4 if social else dim),
    }
    edges = {
        edge_key(relation): np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        for relation, pairs in plan.edges.items()
    }
    return HeteroGraph(
        article_id=plan.article.article_id,
        label=plan.article.label,
        features=features,
        edges=edges,
    )


@dataclass(frozen=True)
class Skip:
    """Why an article produced no graph.

    Attributes:
        article_id (str): The article.
        reason (str): "news missing" or "too small".
    """

    article_id: str
    reason: str


def _as_embedder(embedder) -> Embedder:
    if isinstance(embedder, EmbedderSpec):
        return embedder.build()
    return embedder


def build_graph(
    article_id: str,
    setup: Setup,
    feature_mode: FeatureMode | str,
    corpus: CorpusIndex,
    embedder,
    scaling: CountScaling | str = CountScaling.LOG1P,
    min_nodes: int = MIN_NODES,
    timeline_cap: int = TIMELINE_CAP,
) -> HeteroGraph | Skip:
    """Builds the undirected graph of one article under a setup.

    Args:
        article_id (str): The article.
        setup (Setup): The setup.
        feature_mode (FeatureMode | str): "text" or "text+social".
        corpus (CorpusIndex): The corpus.
        embedder (Embedder | EmbedderSpec): The text embedder.
        scaling (CountScaling | str): Scaling of the count features.
        min_nodes (int): The minimum number of tweet and user nodes.
        timeline_cap (int): Timeline tweets per citing author.

    Returns:
        HeteroGraph | Skip: The graph, or why there is none.

    Raises:
        ContractError: If the built graph violates the graph invariants.
    """
    setup = Setup(setup)
    article = corpus[article_id]
    if not article.available:
        return Skip(article_id, SKIP_NEWS_MISSING)

    plan = plan_graph(article, setup, timeline_cap)
    if not min_size_filter(plan, setup, min_nodes):
        return Skip(article_id, SKIP_TOO_SMALL)

    graph = materialize(plan, feature_mode, _as_embedder(embedder), scaling)
    violations = validate(graph)
    if violations:
        raise ContractError(f"Graph of {article_id} is invalid: {'; '.join(violations)}")
    return make_undirected(graph)


def select_articles(
    corpus: CorpusIndex,
    min_nodes: int = MIN_NODES,
    timeline_cap: int = TIMELINE_CAP,
) -> tuple[list, dict]:
    """Decides once which articles are kept for every setup.

    An article is kept when its news content is available and its graph passes
    the size filter under every setup, so all setups see the same articles.

    Args:
        corpus (CorpusIndex): The corpus.
        min_nodes (int): The minimum number of tweet and user nodes.
        timeline_cap (int): Timeline tweets per citing author.

    Returns:
        tuple[list, dict]: The kept article ids in id order and article id to skip reason.
    """
    kept = []
    skipped = {}
    for article_id, article in corpus.articles.items():
        if not article.available:
            skipped[article_id] = SKIP_NEWS_MISSING
            continue
        if all(
            min_size_filter(plan_graph(article, setup, timeline_cap), setup, min_nodes)
            for setup in Setup
        ):
            kept.append(article_id)
        else:
            skipped[article_id] = SKIP_TOO_SMALL
    logger.info("Kept %d of %d articles, skipped %d", len(kept), len(corpus), len(skipped))
    return kept, skipped


@dataclass
class DatasetBuild:
    """The graphs of one setup and feature mode.

    Attributes:
        graphs (list): The graphs, ordered by article id.
        skipped (dict): article_id to skip reason.
        datasets (list): The dataset tag of every graph.
    """

    graphs: list
    skipped: dict
    datasets: list

    @property
    def labels(self) -> np.ndarray:
        """The labels of the graphs."""
        return np.array([graph.label for graph in self.graphs], dtype=np.int64)


def build_dataset(
    corpus: CorpusIndex,
    setup: Setup,
    feature_mode: FeatureMode | str,
    embedder,
    scaling: CountScaling | str = CountScaling.LOG1P,
    min_nodes: int = MIN_NODES,
    timeline_cap: int = TIMELINE_CAP,
    article_ids: list = None,
) -> DatasetBuild:
    """Builds the graphs of all kept articles under a setup.

    Args:
        corpus (CorpusIndex): The corpus.
        setup (Setup): The setup.
        feature_mode (FeatureMode | str): "text" or "text+social".
        embedder (Embedder | EmbedderSpec): The text embedder.
        scaling (CountScaling | str): Scaling of the count features.
        min_nodes (int): The minimum number of tweet and user nodes.
        timeline_cap (int): Timeline tweets per citing author.
        article_ids (list, optional): A precomputed kept set from :func:`select_articles`.

    Returns:
        DatasetBuild: The graphs and the skip report.

    Raises:
        InputError: If no article is left.
    """
    setup = Setup(setup)
    embedder = _as_embedder(embedder)
    if article_ids is None:
        article_ids, skipped = select_articles(corpus, min_nodes, timeline_cap)
    else:
        skipped = {key: "not selected" for key in corpus.articles if key not in set(article_ids)}

    graphs = []
    datasets = []
    for article_id in sorted(article_ids):
        result = build_graph(
            article_id, setup, feature_mode, corpus, embedder, scaling, min_nodes, timeline_cap
        )
        if isinstance(result, Skip):
            skipped[article_id] = result.reason
            continue
        graphs.append(result)
        datasets.append(corpus[article_id].dataset)

    if not graphs:
        raise InputError(f"No graphs left for setup {setup.value}, skipped {len(skipped)} articles")

    logger.info(
        "Built %d graphs for setup %d (%s), skipped %d",
        len(graphs),
        setup.value,
        FeatureMode(feature_mode).value,
        len(skipped),
    )
    return DatasetBuild(graphs=graphs, skipped=skipped, datasets=datasets)
