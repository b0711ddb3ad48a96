"""Generator of synthetic FakeNewsNet-shaped corpora with label dependent spreading.

Fake articles draw more retweets, more favourites and less followed authors, and
their texts oversample a fake topic vocabulary. Setting ``beta`` to zero and all
shifts to their neutral values produces label independent data.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from hetsmcg.errors import ConfigurationError
from hetsmcg.helpers import fingerprint, write_json

logger = logging.getLogger(__name__)

BOOKKEEPING = "bookkeeping.json"

# Twitter like ids and epoch seconds, both increase with time
FIRST_TWEET_ID = 1_000_000
FIRST_TIMESTAMP = 1_500_000_000


@dataclass
class SynthConfig:
    """Parameters of the synthetic corpus.

    Count parameters are given for real articles. Fake articles multiply the
    retweet and favourite means by ``retweet_shift`` and add ``follower_shift``
    to the log mean of follower counts.

    Attributes:
        n_articles (int): The number of articles.
        fake_fraction (float): The share of fake articles.
        seed (int): Seed of the single random stream.
        beta (float): Probability that a word is drawn from the label's topic words.
        citing_base (int): Minimum number of citing tweets per article.
        citing_lambda_real (float): Poisson rate of extra citing tweets of real articles.
        citing_lambda_fake (float): Poisson rate of extra citing tweets of fake articles.
        retweet_mean (float): Mean number of retweets per citing tweet.
        retweet_shift (float): Factor on retweet and favourite means for fake articles.
        dispersion (float): Size parameter of the negative binomial counts.
        favorite_mean (float): Mean favourite count of a citing tweet.
        follower_mu (float): Log mean of follower counts.
        follower_sigma (float): Log standard deviation of follower counts.
        follower_shift (float): Added to the follower log mean for fake articles.
        friends_mu (float): Log mean of friends counts.
        favorites_mu (float): Log mean of favourites counts.
        statuses_mu (float): Log mean of statuses counts.
        count_sigma (float): Log standard deviation of the other user counts.
        timeline_min (int): Minimum timeline length per user.
        timeline_max (int): Maximum timeline length per user.
        retweeter_overlap (float): Probability that a retweet is posted by a citing author.
        vocab_size (int): Size of the shared vocabulary.
        topic_words (int): Size of each label's topic vocabulary.
        words_per_tweet (int): Words in a tweet.
        words_per_article (int): Words in an article body.
        datasets (list): Dataset tags, assigned uniformly.
        dtext (int): Embedding dimension advertised in the manifest.
    """

    n_articles: int = 200
    fake_fraction: float = 0.5
    seed: int = 0
    beta: float = 0.6
    citing_base: int = 5
    citing_lambda_real: float = 3.0
    citing_lambda_fake: float = 3.0
    retweet_mean: float = 1.5
    retweet_shift: float = 2.0
    dispersion: float = 2.0
    favorite_mean: float = 4.0
    follower_mu: float = 6.0
    follower_sigma: float = 1.5
    follower_shift: float = -1.0
    friends_mu: float = 5.0
    favorites_mu: float = 6.0
    statuses_mu: float = 7.0
    count_sigma: float = 1.0
    timeline_min: int = 3
    timeline_max: int = 8
    retweeter_overlap: float = 0.1
    vocab_size: int = 400
    topic_words: int = 30
    words_per_tweet: int = 12
    words_per_article: int = 40
    datasets: list = field(default_factory=lambda: ["politifact", "gossipcop"])
    dtext: int = 64

    def __post_init__(self) -> None:
        """Validates the parameters."""
        if self.n_articles < 2:
            raise ConfigurationError(f"Need at least 2 articles, got {self.n_articles}")
        if not 0 < self.fake_fraction < 1:
            raise ConfigurationError(f"fake_fraction must lie in (0, 1), got {self.fake_fraction}")
        if not 0 <= self.beta <= 1:
            raise ConfigurationError(f"beta must lie in [0, 1], got {self.beta}")
        for name in (
            "citing_lambda_real",
            "citing_lambda_fake",
            "retweet_mean",
            "retweet_shift",
            "dispersion",
            "favorite_mean",
            "follower_sigma",
            "count_sigma",
        ):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)}")
        if self.citing_base + min(self.citing_lambda_real, self.citing_lambda_fake) < 5:
            raise ConfigurationError("Expected citing tweets per article must be at least 5")
        if not 0 <= self.timeline_min <= self.timeline_max:
            raise ConfigurationError("Timeline lengths need 0 <= timeline_min <= timeline_max")
        if not 0 <= self.retweeter_overlap <= 1:
            raise ConfigurationError("retweeter_overlap must lie in [0, 1]")
        if self.vocab_size <= 0 or self.topic_words <= 0 or self.dtext <= 0:
            raise ConfigurationError("Vocabulary sizes and dtext must be positive")
        if not self.datasets:
            raise ConfigurationError("At least one dataset tag is needed")

    def to_json(self) -> dict:
        """Returns the config as a json dict."""
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> SynthConfig:
        """Creates a config from a json dict, unknown keys are a configuration error."""
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"Unknown synth parameters {sorted(unknown)}")
        return cls(**data)

    @property
    def fingerprint(self) -> str:
        """SHA-256 of the json form."""
        return fingerprint(self.to_json())


def null_signal(**overrides) -> SynthConfig:
    """A config whose data carries no label information.

    Args:
        **overrides: Further SynthConfig fields, e.g. n_articles or seed.

    Returns:
        SynthConfig: beta 0 and all label shifts neutral.
    """
    params = {"beta": 0.0, "retweet_shift": 1.0, "follower_shift": 0.0}
    params.update(overrides)
    params.setdefault("citing_lambda_fake", params.get("citing_lambda_real", SynthConfig.citing_lambda_real))
    return SynthConfig(**params)


class _Generator:
    """Draws all records from one random stream, in a fixed order."""

    def __init__(self, config: SynthConfig) -> None:
        self.config = config
        self.rng = np.random.default_rng(config.seed)
        self.shared = [f"w{i:03d}" for i in range(config.vocab_size)]
        self.topics = {
            0: [f"real{i:02d}" for i in range(config.topic_words)],
            1: [f"fake{i:02d}" for i in range(config.topic_words)],
        }
        self.next_tweet = FIRST_TWEET_ID
        self.clock = FIRST_TIMESTAMP

    def text(self, label: int, words: int) -> str:
        topical = self.rng.random(words) < self.config.beta
        shared = self.rng.integers(0, len(self.shared), size=words)
        topic = self.rng.integers(0, len(self.topics[label]), size=words)
        return " ".join(
            self.topics[label][t] if is_topic else self.shared[s]
            for is_topic, s, t in zip(topical, shared, topic)
        )

    def negative_binomial(self, mean: float) -> int:
        n = self.config.dispersion
        return int(self.rng.negative_binomial(n, n / (n + mean)))

    def tweet(self, label: int, user_id: str, favorite_mean: float, **extra) -> dict:
        self.next_tweet += 1
        self.clock += int(self.rng.integers(1, 600))
        data = {
            "tweet_id": str(self.next_tweet),
            "text": self.text(label, self.config.words_per_tweet),
            "retweet_count": 0,
            "favorite_count": self.negative_binomial(favorite_mean),
            "user_id": user_id,
            "created_at": self.clock,
        }
        data.update(extra)
        return data

    def user(self, label: int, user_id: str) -> dict:
        config = self.config
        shift = config.follower_shift if label == 1 else 0.0
        sigma = config.count_sigma

        def lognormal(mu, s):
            return int(self.rng.lognormal(mu, s))

        return {
            "user_id": user_id,
            "description": self.text(label, config.words_per_tweet // 2),
            "followers": lognormal(config.follower_mu + shift, config.follower_sigma),
            "friends": lognormal(config.friends_mu, sigma),
            "favorites": lognormal(config.favorites_mu, sigma),
            "statuses": lognormal(config.statuses_mu, sigma),
        }

    def article(self, article_id: str, label: int) -> tuple[dict, dict]:
        config = self.config
        shift = config.retweet_shift if label == 1 else 1.0
        rate = config.citing_lambda_fake if label == 1 else config.citing_lambda_real
        n_citing = config.citing_base + int(self.rng.poisson(rate))

        files = {
            "news": {
                "id": article_id,
                "title": self.text(label, 8),
                "text": self.text(label, config.words_per_article),
            },
            "tweets": [],
            "retweets": [],
            "users": [],
            "timelines": {},
        }
        citing_authors = [f"{article_id}-u{k}" for k in range(n_citing)]
        for author in citing_authors:
            files["users"].append(self.user(label, author))

        for author in citing_authors:
            files["tweets"].append(self.tweet(label, author, config.favorite_mean * shift))

        retweet_authors = []
        for citing in files["tweets"]:
            n_retweets = self.negative_binomial(config.retweet_mean * shift)
            citing["retweet_count"] = n_retweets
            for _ in range(n_retweets):
                if self.rng.random() < config.retweeter_overlap:
                    author = citing_authors[int(self.rng.integers(0, len(citing_authors)))]
                else:
                    author = f"{article_id}-r{len(retweet_authors)}"
                    retweet_authors.append(author)
                    files["users"].append(self.user(label, author))
                files["retweets"].append(
                    self.tweet(label, author, 1.0, of_tweet_id=citing["tweet_id"])
                )

        timeline_lengths = {}
        for author in citing_authors:
            length = int(self.rng.integers(config.timeline_min, config.timeline_max + 1))
            timeline_lengths[author] = length
            files["timelines"][author] = [
                self.tweet(label, author, config.favorite_mean) for _ in range(length)
            ]

        bookkeeping = {
            "label": label,
            "citing": n_citing,
            "retweets": len(files["retweets"]),
            "citing_authors": len(citing_authors),
            "retweet_authors": len(retweet_authors),
            "users": len(files["users"]),
            "timeline_lengths": timeline_lengths,
            "timeline_tweets": sum(timeline_lengths.values()),
        }
        return files, bookkeeping


def generate_corpus(config: SynthConfig, out: Path | str) -> dict:
    """Writes a synthetic corpus in the layout read by :func:`hetsmcg.ingest.load_corpus`.

    The output is byte identical for equal configs.

    Args:
        config (SynthConfig): The generator parameters.
        out (Path | str): The corpus directory, created if needed.

    Returns:
        dict: The bookkeeping, article id to exact record counts.
    """
    out = Path(out)
    generator = _Generator(config)
    rng = generator.rng

    n_fake = min(max(int(round(config.n_articles * config.fake_fraction)), 1), config.n_articles - 1)
    labels = np.zeros(config.n_articles, dtype=np.int64)
    labels[rng.permutation(config.n_articles)[:n_fake]] = 1
    tags = rng.integers(0, len(config.datasets), size=config.n_articles)

    manifest = []
    bookkeeping = {}
    for index in range(config.n_articles):
        dataset = config.datasets[int(tags[index])]
        article_id = f"{dataset}{index:05d}"
        label = int(labels[index])
        files, counts = generator.article(article_id, label)
        for folder in ("news", "tweets", "retweets", "users", "timelines"):
            write_json(out / folder / f"{article_id}.json", files[folder])
        manifest.append(
            {"id": article_id, "label": "fake" if label else "real", "dataset": dataset}
        )
        counts["dataset"] = dataset
        bookkeeping[article_id] = counts

    write_json(
        out / "manifest.json",
        {
            "articles": manifest,
            "embedder": {"kind": "hashing", "dim": config.dtext},
            "generator": config.to_json(),
        },
    )
    write_json(out / BOOKKEEPING, bookkeeping)
    logger.info(
        "Generated %d articles (%d fake) in %s with seed %d",
        config.n_articles,
        n_fake,
        out,
        config.seed,
    )
    return bookkeeping
