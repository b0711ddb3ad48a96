import json

import numpy as np
import pytest

from hetsmcg.errors import ContractError, InputError
from hetsmcg.hetgraph import (
    GraphDataset,
    HeteroGraph,
    NodeType,
    RelationType,
    degree_stats,
    dumps_graph,
    edge_key,
    flatten,
    load_dataset,
    load_graph,
    make_undirected,
    save_dataset,
    save_graph,
    validate,
)


def small_graph(n_tweets=5, n_users=5, dim=3, social=False, news=1):
    features = {
        NodeType.NEWS: np.ones((news, dim)),
        NodeType.TWEET: np.arange(n_tweets * (dim + 2 * social), dtype=float).reshape(n_tweets, -1),
        NodeType.USER: np.full((n_users, dim + 4 * social), 2.0),
    }
    edges = {
        edge_key(RelationType.CITES): np.array([[t, 0] for t in range(n_tweets)]),
        edge_key(RelationType.POSTS): np.array([[u, u % n_tweets] for u in range(n_users)]),
    }
    return HeteroGraph(article_id="g", label=1, features=features, edges=edges)


def test_valid_graph():
    assert validate(small_graph()) == []
    assert validate(small_graph(social=True)) == []


def test_two_news_nodes():
    violations = validate(small_graph(news=2))
    assert any(violation.startswith("|V_N| != 1") for violation in violations)


def test_wrong_relation_signature():
    graph = small_graph()
    graph.edges[(NodeType.USER, RelationType.CITES, NodeType.NEWS)] = np.array([[0, 0]])
    assert any("relation signature" in violation for violation in validate(graph))


def test_out_of_range_and_duplicate_edges():
    graph = small_graph()
    graph.edges[edge_key(RelationType.RETWEETS)] = np.array([[1, 0], [1, 0], [9, 0]])
    violations = validate(graph)
    assert any("out of range" in violation for violation in violations)
    assert any("duplicate" in violation for violation in violations)


def test_feature_dims_must_fit_a_mode():
    graph = small_graph()
    graph.features[NodeType.USER] = np.zeros((5, 5))
    assert any("feature dims" in violation for violation in validate(graph))


def test_make_undirected():
    graph = small_graph()
    undirected = make_undirected(graph)
    assert undirected.total_edges == 2 * graph.total_edges
    assert validate(undirected) == []
    assert undirected.relation_edges(RelationType.REV_CITES).tolist() == [[0, t] for t in range(5)]
    with pytest.raises(ContractError):
        make_undirected(undirected)


def test_make_undirected_all_relations(make_graph):
    graph = make_graph(undirected=False)
    undirected = make_undirected(graph)
    assert len(undirected.edges) == 6
    assert undirected.total_edges == 2 * graph.total_edges
    assert validate(undirected) == []


def test_broken_mirror_is_reported():
    graph = make_undirected(small_graph())
    graph.edges[edge_key(RelationType.REV_POSTS)] = graph.relation_edges(RelationType.REV_POSTS)[1:]
    assert any("does not mirror" in violation for violation in validate(graph))


def test_flatten_pad_and_truncate():
    graph = small_graph(social=True)
    padded = flatten(graph, "pad")
    assert padded.features.shape == (11, 7)
    assert padded.features[0].tolist() == [1, 1, 1, 0, 0, 0, 0]
    truncated = flatten(graph, "truncate")
    assert truncated.features.shape == (11, 3)
    assert truncated.features[1].tolist() == graph.features[NodeType.TWEET][0, :3].tolist()
    assert padded.label == graph.label and padded.news_index == 0


def test_flatten_offsets():
    graph = make_undirected(small_graph(n_tweets=5, n_users=5))
    homo = flatten(graph, "truncate")
    assert homo.offsets == {NodeType.NEWS: 0, NodeType.TWEET: 1, NodeType.USER: 6}
    # tweet 2 -> user 2 under rev_posts
    assert [3, 8] in homo.edges.tolist()


def test_flatten_is_a_bijection(make_graph):
    graph = make_graph(n_tweets=6, n_users=4)
    homo = flatten(graph, "pad")
    assert homo.num_nodes == graph.total_nodes
    expected = sorted(
        (homo.offsets[source] + s, homo.offsets[target] + t)
        for (source, _, target), pairs in graph.edges.items()
        for s, t in pairs.tolist()
    )
    assert sorted(map(tuple, homo.edges.tolist())) == expected
    assert len(set(expected)) == len(expected)


def test_degree_stats():
    graph = HeteroGraph(
        article_id="s1",
        label=0,
        features={
            NodeType.NEWS: np.zeros((1, 2)),
            NodeType.TWEET: np.zeros((7, 2)),
            NodeType.USER: np.zeros((0, 2)),
        },
        edges={edge_key(RelationType.CITES): np.array([[t, 0] for t in range(7)])},
    )
    stats = degree_stats(graph)
    assert stats.node_counts == {NodeType.NEWS: 1, NodeType.TWEET: 7, NodeType.USER: 0}
    assert stats.edge_counts == {RelationType.CITES: 7}


def test_graph_json(tmp_path, make_graph):
    graph = make_graph(social=True)
    save_graph(graph, tmp_path / "g.json")
    loaded = load_graph(tmp_path / "g.json")
    assert dumps_graph(loaded) == dumps_graph(graph)
    assert loaded.feature_dim(NodeType.USER) == graph.feature_dim(NodeType.USER)
    with pytest.raises(InputError):
        load_graph(tmp_path / "missing.json")


def test_empty_blocks_keep_their_width():
    graph = small_graph(n_users=0)
    graph.edges.pop(edge_key(RelationType.POSTS))
    loaded = HeteroGraph.from_json(graph.to_json())
    assert loaded.features[NodeType.USER].shape == (0, 3)


def test_unknown_relation_in_json():
    data = small_graph().to_json()
    data["edges"]["follows"] = [[0, 0]]
    with pytest.raises(ContractError):
        HeteroGraph.from_json(data)


@pytest.mark.parametrize("key", ["nodes", "edges", "article_id", "label"])
def test_missing_entry_in_json(key, tmp_path):
    data = small_graph().to_json()
    del data[key]
    with pytest.raises(InputError):
        HeteroGraph.from_json(data)
    path = tmp_path / "g.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(InputError):
        load_graph(path)


def test_dataset_directory(tmp_path, make_graph):
    graphs = [make_graph(article_id=f"a{i}", label=i % 2) for i in range(4)]
    dataset = GraphDataset(
        graphs=graphs,
        metadata={"setup": 5, "feature_mode": "text", "d_text": 4},
        folds=[0, 1, 0, 1],
        datasets=["politifact"] * 4,
    )
    save_dataset(dataset, tmp_path / "graphs")
    loaded = load_dataset(tmp_path / "graphs")
    assert loaded.article_ids == ["a0", "a1", "a2", "a3"]
    assert loaded.labels.tolist() == [0, 1, 0, 1]
    assert loaded.folds == [0, 1, 0, 1]
    assert loaded.metadata["setup"] == 5
    with pytest.raises(InputError):
        load_dataset(tmp_path / "nothing")
