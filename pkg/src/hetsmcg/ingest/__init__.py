"""Corpus loading, text embedding and per-article graph construction."""

from hetsmcg.ingest.builder import (
    CountScaling,
    DatasetBuild,
    FeatureMode,
    Setup,
    Skip,
    build_dataset,
    build_graph,
    min_size_filter,
    plan_graph,
    select_articles,
)
from hetsmcg.ingest.corpus import ArticleContext, CorpusIndex, LoadReport, load_corpus
from hetsmcg.ingest.embedder import EmbedderSpec, HashingEmbedder, PrecomputedEmbedder, embed_text
from hetsmcg.ingest.records import NewsRecord, TweetKind, TweetRecord, UserRecord

__all__ = [
    "ArticleContext",
    "CorpusIndex",
    "CountScaling",
    "DatasetBuild",
    "EmbedderSpec",
    "FeatureMode",
    "HashingEmbedder",
    "LoadReport",
    "NewsRecord",
    "PrecomputedEmbedder",
    "Setup",
    "Skip",
    "TweetKind",
    "TweetRecord",
    "UserRecord",
    "build_dataset",
    "build_graph",
    "embed_text",
    "load_corpus",
    "min_size_filter",
    "plan_graph",
    "select_articles",
]
