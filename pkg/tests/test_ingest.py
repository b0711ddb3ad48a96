import hashlib
import json

import numpy as np
import pytest

from conftest import article, tweet, user, write_corpus
from hetsmcg.errors import ConfigurationError, ContractError, EmbeddingMissError, InputError, RecordError
from hetsmcg.hetgraph import NodeType, RelationType, dumps_graph, validate
from hetsmcg.ingest import (
    EmbedderSpec,
    HashingEmbedder,
    PrecomputedEmbedder,
    Setup,
    Skip,
    TweetKind,
    TweetRecord,
    UserRecord,
    build_dataset,
    build_graph,
    embed_text,
    load_corpus,
    min_size_filter,
    plan_graph,
    select_articles,
)
from hetsmcg.ingest.embedder import tokenize


TEXT = "several quite different words in one sentence"


@pytest.fixture
def hashing():
    return HashingEmbedder(8)


# records


def test_tweet_record():
    record = TweetRecord.from_json(tweet(1, "u", created_at="2020-01-01T00:00:00Z"), TweetKind.CITING)
    assert record.tweet_id == "1" and record.created_at == pytest.approx(1577836800.0)
    with pytest.raises(RecordError):
        TweetRecord.from_json({"tweet_id": "2", "user_id": "u", "retweet_count": -1}, TweetKind.CITING)
    with pytest.raises(RecordError):
        TweetRecord.from_json(tweet(3, "u"), TweetKind.RETWEET)


def test_user_record_counts():
    record = UserRecord.from_json(user("u", counts=(1, 2, 3, 4)))
    assert record.counts == (1, 2, 3, 4)
    with pytest.raises(RecordError):
        UserRecord.from_json({"user_id": "u", "followers": "many"})


def test_counts_must_be_whole_numbers():
    assert TweetRecord.from_json(tweet(1, "u", retweet_count=3.0), TweetKind.CITING).retweet_count == 3
    for value in (3.7, float("nan"), float("inf")):
        with pytest.raises(RecordError):
            TweetRecord.from_json(tweet(1, "u", retweet_count=value), TweetKind.CITING)
    with pytest.raises(RecordError):
        UserRecord.from_json(user("u", counts=(1.5, 2, 3, 4)))


# corpus


def test_synthetic_corpus_loads_cleanly(small_corpus):
    root, bookkeeping = small_corpus
    corpus = load_corpus(root)
    assert len(corpus) == len(bookkeeping)
    assert corpus.report.total == 0
    assert corpus.metadata["embedder"] == {"kind": "hashing", "dim": 16}
    for article_id, counts in bookkeeping.items():
        context = corpus[article_id]
        assert len(context.tweets) == counts["citing"]
        assert len(context.retweets) == counts["retweets"]
        assert len(context.users) == counts["users"]


def test_dataset_filter(small_corpus):
    root, bookkeeping = small_corpus
    corpus = load_corpus(root, datasets=["gossipcop"])
    assert set(corpus.articles) == {key for key, counts in bookkeeping.items() if counts["dataset"] == "gossipcop"}


def test_missing_root_and_manifest(tmp_path):
    with pytest.raises(InputError):
        load_corpus(tmp_path / "absent")
    with pytest.raises(InputError):
        load_corpus(tmp_path)


def test_unavailable_duplicate_and_dangling(tmp_path):
    broken = article("b", label="fake")
    broken["tweets"].append(dict(broken["tweets"][0]))
    broken["retweets"].append(tweet("r1", "b-u0", of_tweet_id="nope"))
    write_corpus(tmp_path, [article("a", news=None), broken])
    corpus = load_corpus(tmp_path)
    assert not corpus["a"].available
    assert corpus["b"].label == 1
    assert len(corpus["b"].tweets) == 5
    assert corpus.report.warnings["duplicate tweet"] == 1
    assert corpus.report.warnings["dangling retweet"] == 1
    assert corpus.available_ids == ["b"]


def test_malformed_records_are_skipped(tmp_path):
    data = article("a")
    data["users"].append({"description": "no id"})
    data["tweets"].append({"tweet_id": "x", "user_id": "a-u0", "favorite_count": "lots"})
    write_corpus(tmp_path, [data])
    corpus = load_corpus(tmp_path)
    assert corpus.report.warnings["malformed user"] == 1
    assert corpus.report.warnings["malformed tweet"] == 1
    assert len(corpus["a"].users) == 5


# embedder


def test_hashing_embedder(hashing):
    assert np.array_equal(hashing.embed(""), np.zeros(8))
    assert np.array_equal(hashing.embed("Fake news!"), HashingEmbedder(8).embed("fake NEWS"))
    assert np.linalg.norm(hashing.embed("word word")) == pytest.approx(1.0)
    assert hashing.embed("a b c").shape == (8,)
    assert tokenize("Hello, world! It's") == ["hello", "world", "it", "s"]
    assert not np.array_equal(HashingEmbedder(64, seed=1).embed(TEXT), HashingEmbedder(64, seed=2).embed(TEXT))


def test_hashing_embedder_single_token_and_any_seed():
    one = HashingEmbedder(16).embed("word")
    assert np.count_nonzero(one) == 1 and np.abs(one).max() == 1.0
    assert np.array_equal(HashingEmbedder(16).embed("word word"), one)

    negative = HashingEmbedder(16, seed=-5)
    assert np.linalg.norm(negative.embed(TEXT)) == pytest.approx(1.0)
    assert np.array_equal(negative.embed(TEXT), HashingEmbedder(16, seed=-5).embed(TEXT))
    assert not np.array_equal(negative.embed(TEXT), HashingEmbedder(16, seed=5).embed(TEXT))


def test_precomputed_embedder(tmp_path):
    key = hashlib.sha256("known".encode("utf-8")).hexdigest()
    path = tmp_path / "vectors.json"
    path.write_text(json.dumps({key: [1.0, 2.0, 3.0]}), encoding="utf-8")

    embedder = PrecomputedEmbedder(path, 3)
    assert embedder.embed("known").tolist() == [1.0, 2.0, 3.0]
    with pytest.raises(EmbeddingMissError):
        embedder.embed("unknown")

    lenient = PrecomputedEmbedder(path, 3, on_miss="zero")
    assert lenient.embed("unknown").tolist() == [0.0, 0.0, 0.0]
    assert lenient.misses == 1

    with pytest.raises(InputError):
        PrecomputedEmbedder(path, 4)


def test_embedder_spec(tmp_path):
    spec = EmbedderSpec.parse("hashing", 8, seed=0)
    assert np.array_equal(embed_text("some text", spec), HashingEmbedder(8).embed("some text"))
    assert EmbedderSpec.parse("precomputed:vectors.json", 8).path == "vectors.json"
    with pytest.raises(ConfigurationError):
        EmbedderSpec.parse("bert", 8)


# builder


def build(corpus, article_id, setup, features="text", embedder=None, **kwargs):
    return build_graph(article_id, setup, features, corpus, embedder or HashingEmbedder(8), **kwargs)


def test_setup_parse():
    assert Setup.parse("S3") == Setup.S3_PLUS_TIMELINE
    assert Setup.parse(5) == Setup.S5_ALL
    with pytest.raises(ConfigurationError):
        Setup.parse(9)
    assert not Setup.S4_PLUS_RETWEETS.includes_timeline
    assert Setup.S5_ALL.includes_timeline and Setup.S5_ALL.includes_retweets


def test_setup_one_graph(tmp_path):
    write_corpus(tmp_path, [article("a", n_citing=6)])
    graph = build(load_corpus(tmp_path), "a", 1)
    assert graph.total_nodes == 7
    assert graph.relation_edges(RelationType.CITES).shape[0] == 6
    assert graph.relation_edges(RelationType.REV_CITES).shape[0] == 6
    assert graph.num_nodes(NodeType.USER) == 0
    assert validate(graph) == []


def test_timeline_tweets_are_capped(tmp_path):
    data = article("a", n_citing=6, n_users=5)
    data["timelines"] = {
        f"a-u{k}": [tweet(f"t{k}{j}", f"a-u{k}", created_at=1000 + j) for j in range(7)] for k in range(3)
    }
    write_corpus(tmp_path, [data])
    corpus = load_corpus(tmp_path)

    plan = plan_graph(corpus["a"], Setup.S3_PLUS_TIMELINE)
    assert len(plan.tweets) == 6 + 15
    assert len(plan.users) == 5
    timeline_ids = {t.tweet_id for t in plan.tweets[6:]}
    assert timeline_ids == {f"t{k}{j}" for k in range(3) for j in range(2, 7)}
    assert len(plan.edges[RelationType.POSTS]) == 6 + 15


def test_latest_falls_back_to_ids(tmp_path):
    data = article("a")
    data["timelines"] = {"a-u0": [tweet(str(100 + j), "a-u0") for j in range(8)]}
    write_corpus(tmp_path, [data])
    plan = plan_graph(load_corpus(tmp_path)["a"], Setup.S3_PLUS_TIMELINE, timeline_cap=3)
    assert [t.tweet_id for t in plan.tweets[5:]] == ["107", "106", "105"]


def test_social_features_are_log_scaled(tmp_path):
    data = article("a", retweets=2)
    data["tweets"][0].update(retweet_count=12, favorite_count=3)
    data["users"][0].update(followers=999)
    write_corpus(tmp_path, [data])
    corpus = load_corpus(tmp_path)

    graph = build(corpus, "a", 4, "text+social")
    tweets = graph.features[NodeType.TWEET]
    assert tweets.shape == (7, 10)
    assert tweets[0, -2:] == pytest.approx([np.log1p(12), np.log1p(3)])
    assert graph.features[NodeType.USER][0, -4] == pytest.approx(np.log1p(999))
    assert graph.relation_edges(RelationType.RETWEETS).tolist() == [[5, 0], [6, 1]]

    raw = build(corpus, "a", 4, "text+social", scaling="raw")
    assert raw.features[NodeType.TWEET][0, -2:].tolist() == [12.0, 3.0]


def test_shared_retweet_and_citing_author(tmp_path):
    data = article("a", n_citing=5)
    data["retweets"] = [tweet("r0", "a-u3", of_tweet_id=data["tweets"][0]["tweet_id"])]
    write_corpus(tmp_path, [data])
    plan = plan_graph(load_corpus(tmp_path)["a"], Setup.S4_PLUS_RETWEETS)
    assert len(plan.users) == 5
    assert len(plan.tweets) == 6
    assert (3, 5) in plan.edges[RelationType.POSTS]


def test_min_size_boundaries(tmp_path):
    write_corpus(
        tmp_path,
        [article("four", n_citing=4), article("five", n_citing=5), article("few_users", n_citing=9, n_users=3)],
    )
    corpus = load_corpus(tmp_path)
    assert not min_size_filter(plan_graph(corpus["four"], 1), 1)
    assert min_size_filter(plan_graph(corpus["five"], 2), 2)
    assert min_size_filter(plan_graph(corpus["few_users"], 1), 1)
    assert not min_size_filter(plan_graph(corpus["few_users"], 2), 2)
    assert build(corpus, "four", 1) == Skip("four", "too small")


def test_kept_set_is_shared_by_all_setups(tmp_path):
    write_corpus(
        tmp_path,
        [
            article("a", label="real"),
            article("b", label="fake", n_citing=9, n_users=3),
            article("c", label="fake", news=None),
        ],
    )
    corpus = load_corpus(tmp_path)
    kept, skipped = select_articles(corpus)
    assert kept == ["a"]
    assert skipped == {"b": "too small", "c": "news missing"}
    assert build(corpus, "c", 1) == Skip("c", "news missing")

    result = build_dataset(corpus, Setup.S1_TWEETS, "text", HashingEmbedder(8))
    assert [graph.article_id for graph in result.graphs] == ["a"]
    assert result.skipped == skipped


def test_empty_dataset_is_an_error(tmp_path):
    write_corpus(tmp_path, [article("a", n_citing=2)])
    with pytest.raises(InputError):
        build_dataset(load_corpus(tmp_path), 1, "text", HashingEmbedder(8))


def test_invalid_graph_is_a_contract_error(tmp_path):
    write_corpus(tmp_path, [article("a")])
    corpus = load_corpus(tmp_path)

    class Broken:
        dim = 8

        def embed(self, text):
            return np.full(self.dim, np.nan)

    with pytest.raises(ContractError):
        build(corpus, "a", 1, embedder=Broken())


def test_synthetic_graphs(small_corpus):
    root, bookkeeping = small_corpus
    corpus = load_corpus(root)
    embedder = HashingEmbedder(16)
    kept, _ = select_articles(corpus)
    assert kept == sorted(bookkeeping)

    for article_id in kept:
        context = corpus[article_id]
        plans = {setup: plan_graph(context, setup) for setup in Setup}
        for small, large in [(1, 2), (2, 3), (3, 5), (2, 4), (4, 5)]:
            small_ids, large_ids = plans[small].node_ids(), plans[large].node_ids()
            assert all(small_ids[t] <= large_ids[t] for t in NodeType)
            assert plans[small].edge_ids() <= plans[large].edge_ids()

        counts = bookkeeping[article_id]
        capped = sum(min(length, 5) for length in counts["timeline_lengths"].values())
        assert len(plans[Setup.S1_TWEETS].tweets) == counts["citing"]
        assert len(plans[Setup.S3_PLUS_TIMELINE].tweets) == counts["citing"] + capped
        assert len(plans[Setup.S4_PLUS_RETWEETS].tweets) == counts["citing"] + counts["retweets"]
        assert len(plans[Setup.S5_ALL].users) == counts["users"]

        text = build(corpus, article_id, 5, embedder=embedder)
        social = build(corpus, article_id, 5, "text+social", embedder=embedder)
        assert validate(text) == [] and validate(social) == []
        assert {key: pairs.tolist() for key, pairs in text.edges.items()} == {
            key: pairs.tolist() for key, pairs in social.edges.items()
        }
        assert social.feature_dim(NodeType.USER) == 20
        rebuilt = build(corpus, article_id, 5, embedder=HashingEmbedder(16))
        assert dumps_graph(rebuilt) == dumps_graph(text)
