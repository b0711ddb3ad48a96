import json

import numpy as np
import pytest

from hetsmcg.hetgraph import HeteroGraph, NodeType, RelationType, edge_key, make_undirected
from hetsmcg.synth import SynthConfig, generate_corpus


def random_graph(
    rng,
    n_tweets: int = 5,
    n_users: int = 4,
    dim: int = 4,
    social: bool = False,
    retweets: bool = True,
    label: int = 0,
    article_id: str = "a0",
    undirected: bool = True,
) -> HeteroGraph:
    """A random well typed graph. Every tweet cites the news, every user posts at least one tweet."""
    tweet_dim = dim + 2 if social else dim
    user_dim = dim + 4 if social else dim
    features = {
        NodeType.NEWS: rng.uniform(-1, 1, size=(1, dim)),
        NodeType.TWEET: rng.uniform(-1, 1, size=(n_tweets, tweet_dim)),
        NodeType.USER: rng.uniform(-1, 1, size=(n_users, user_dim)),
    }
    edges = {edge_key(RelationType.CITES): np.array([[t, 0] for t in range(n_tweets)], dtype=np.int64)}
    if n_users:
        posts = {(u, u % n_tweets) for u in range(n_users)}
        for t in range(n_tweets):
            if rng.random() < 0.5:
                posts.add((int(rng.integers(0, n_users)), t))
        edges[edge_key(RelationType.POSTS)] = np.array(sorted(posts), dtype=np.int64)
    if retweets and n_tweets > 1:
        pairs = {(int(rng.integers(1, n_tweets)), 0)}
        for source in range(1, n_tweets):
            target = int(rng.integers(0, source))
            if rng.random() < 0.5:
                pairs.add((source, target))
        edges[edge_key(RelationType.RETWEETS)] = np.array(sorted(pairs), dtype=np.int64)
    graph = HeteroGraph(article_id=article_id, label=label, features=features, edges=edges)
    return make_undirected(graph) if undirected else graph


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def make_graph(rng):
    def factory(**kwargs):
        return random_graph(rng, **kwargs)

    return factory


def _write(path, data):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data), encoding="utf-8")


def write_corpus(root, articles: list) -> None:
    """Writes a hand made corpus.

    Every article is a dict with id, label and optional dataset, news, tweets,
    retweets, users and timelines. A news value of None leaves the content file out.
    """
    manifest = []
    for article in articles:
        aid = article["id"]
        manifest.append({"id": aid, "label": article["label"], "dataset": article.get("dataset", "politifact")})
        news = article.get("news", {"id": aid, "title": f"title {aid}", "text": f"body of {aid}"})
        if news is not None:
            _write(root / "news" / f"{aid}.json", news)
        for folder in ("tweets", "retweets", "users"):
            if folder in article:
                _write(root / folder / f"{aid}.json", article[folder])
        if "timelines" in article:
            _write(root / "timelines" / f"{aid}.json", article["timelines"])
    _write(root / "manifest.json", {"articles": manifest})


def tweet(tweet_id, user_id, text="some tweet", created_at=None, **extra) -> dict:
    data = {
        "tweet_id": str(tweet_id),
        "user_id": user_id,
        "text": text,
        "retweet_count": extra.pop("retweet_count", 0),
        "favorite_count": extra.pop("favorite_count", 0),
    }
    if created_at is not None:
        data["created_at"] = created_at
    data.update(extra)
    return data


def user(user_id, description="a user", counts=(10, 20, 30, 40)) -> dict:
    followers, friends, favorites, statuses = counts
    return {
        "user_id": user_id,
        "description": description,
        "followers": followers,
        "friends": friends,
        "favorites": favorites,
        "statuses": statuses,
    }


def article(aid, label="real", n_citing=5, n_users=None, timeline=0, retweets=0, **extra) -> dict:
    """An article with n_citing tweets by distinct users, optional timelines and retweets."""
    n_users = n_citing if n_users is None else n_users
    users = [f"{aid}-u{k}" for k in range(n_users)]
    tweets = [tweet(f"{aid}{k:03d}", users[k % n_users], text=f"tweet {k}") for k in range(n_citing)]
    data = {
        "id": aid,
        "label": label,
        "tweets": tweets,
        "users": [user(u) for u in users],
        "timelines": {
            u: [tweet(f"{aid}9{k}{j:02d}", u, created_at=1000 + j) for j in range(timeline)]
            for k, u in enumerate(users)
        },
        "retweets": [],
    }
    for r in range(retweets):
        author = f"{aid}-r{r}"
        data["users"].append(user(author))
        data["retweets"].append(tweet(f"{aid}8{r:03d}", author, of_tweet_id=tweets[r % n_citing]["tweet_id"]))
    data.update(extra)
    return data


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """A 24 article synthetic corpus with strong label signal."""
    root = tmp_path_factory.mktemp("corpus")
    config = SynthConfig(n_articles=24, seed=3, dtext=16)
    bookkeeping = generate_corpus(config, root)
    return root, bookkeeping
