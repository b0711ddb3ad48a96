"""Loading of FakeNewsNet-shaped corpus directories.

Layout of a corpus root::

    manifest.json           {"articles": [{"id", "label", "dataset"}]}
    news/<id>.json          {"id", "title", "text"}
    tweets/<id>.json        [tweet objects citing the article]
    retweets/<id>.json      [tweet objects with "of_tweet_id"]
    users/<id>.json         [user objects]
    timelines/<id>.json     {user_id: [tweet objects]}
"""

from __future__ import annotations

import json
import logging
from collections import Counter, OrderedDict
from dataclasses import dataclass, field
from pathlib import Path

from hetsmcg.errors import InputError, RecordError
from hetsmcg.ingest.records import LABELS, NewsRecord, TweetKind, TweetRecord, UserRecord

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"


@dataclass
class ArticleContext:
    """Everything the corpus holds about one article.

    Attributes:
        article_id (str): The id of the article.
        label (int): 0 for real, 1 for fake.
        dataset (str): The dataset tag.
        news (NewsRecord | None): The article content, None if it is no longer available.
        tweets (list): Tweets citing the article, in file order.
        retweets (list): Retweets of citing tweets, in file order.
        users (dict): user_id to UserRecord.
        timelines (dict): user_id to that user's timeline tweets.
    """

    article_id: str
    label: int
    dataset: str
    news: NewsRecord | None = None
    tweets: list = field(default_factory=list)
    retweets: list = field(default_factory=list)
    users: dict = field(default_factory=OrderedDict)
    timelines: dict = field(default_factory=dict)

    @property
    def available(self) -> bool:
        """If the news content is available."""
        return self.news is not None


@dataclass
class LoadReport:
    """Counts of records that were skipped while loading.

    Attributes:
        warnings (Counter): Reason to number of skipped records.
    """

    warnings: Counter = field(default_factory=Counter)

    @property
    def total(self) -> int:
        """The number of warnings over all reasons."""
        return sum(self.warnings.values())

    def warn(self, reason: str, detail: str) -> None:
        """Counts one warning.

        Args:
            reason (str): The category, e.g. "duplicate tweet".
            detail (str): What was skipped, for the debug log.
        """
        self.warnings[reason] += 1
        logger.debug("Skipping record (%s): %s", reason, detail)


@dataclass
class CorpusIndex:
    """The indexed records of a corpus.

    Attributes:
        root (Path): The corpus directory.
        articles (OrderedDict): article_id to ArticleContext, ordered by id.
        report (LoadReport): The warnings raised while loading.
        metadata (dict): Extra top-level manifest entries, e.g. an embedder hint.
    """

    root: Path
    articles: OrderedDict
    report: LoadReport
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        """The number of articles."""
        return len(self.articles)

    def __getitem__(self, article_id: str) -> ArticleContext:
        """Returns the context of an article."""
        return self.articles[article_id]

    def __contains__(self, article_id: str) -> bool:
        """If the article is part of the corpus."""
        return article_id in self.articles

    @property
    def available_ids(self) -> list:
        """Ids of articles whose news content is available."""
        return [key for key, article in self.articles.items() if article.available]


def _read_json(path: Path, report: LoadReport, reason: str):
    if not path.is_file():
        return None
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as error:
        report.warn(reason, f"{path}: {error}")
        return None


def _parse_label(value) -> int:
    if isinstance(value, str) and value.lower() in LABELS:
        return LABELS[value.lower()]
    if value in (0, 1) and not isinstance(value, bool):
        return int(value)
    raise RecordError(f"unknown label {value!r}")


def _load_article(root: Path, entry: dict, report: LoadReport) -> ArticleContext:
    article_id = str(entry["id"])
    article = ArticleContext(
        article_id=article_id,
        label=_parse_label(entry.get("label")),
        dataset=str(entry.get("dataset", "")),
    )

    news = _read_json(root / "news" / f"{article_id}.json", report, "malformed news")
    if news is None:
        logger.debug("News content of %s is not available", article_id)
    else:
        try:
            if not isinstance(news, dict):
                raise RecordError("news content is not an object")
            article.news = NewsRecord.from_json(news, article.label, article.dataset)
        except RecordError as error:
            report.warn("malformed news", f"{article_id}: {error}")

    seen_tweets = set()
    for data in _read_json(root / "tweets" / f"{article_id}.json", report, "malformed file") or []:
        try:
            tweet = TweetRecord.from_json(data, TweetKind.CITING)
        except RecordError as error:
            report.warn("malformed tweet", f"{article_id}: {error}")
            continue
        if tweet.tweet_id in seen_tweets:
            report.warn("duplicate tweet", f"{article_id}: {tweet.tweet_id}")
            continue
        seen_tweets.add(tweet.tweet_id)
        article.tweets.append(tweet)

    citing = set(seen_tweets)
    for data in _read_json(root / "retweets" / f"{article_id}.json", report, "malformed file") or []:
        try:
            tweet = TweetRecord.from_json(data, TweetKind.RETWEET)
        except RecordError as error:
            report.warn("malformed tweet", f"{article_id}: {error}")
            continue
        if tweet.tweet_id in seen_tweets:
            report.warn("duplicate tweet", f"{article_id}: {tweet.tweet_id}")
            continue
        if tweet.of_tweet_id not in citing:
            report.warn("dangling retweet", f"{article_id}: {tweet.tweet_id} -> {tweet.of_tweet_id}")
            continue
        seen_tweets.add(tweet.tweet_id)
        article.retweets.append(tweet)

    for data in _read_json(root / "users" / f"{article_id}.json", report, "malformed file") or []:
        try:
            user = UserRecord.from_json(data)
        except RecordError as error:
            report.warn("malformed user", f"{article_id}: {error}")
            continue
        if user.user_id in article.users:
            report.warn("duplicate user", f"{article_id}: {user.user_id}")
            continue
        article.users[user.user_id] = user

    timelines = _read_json(root / "timelines" / f"{article_id}.json", report, "malformed file")
    if timelines is not None and not isinstance(timelines, dict):
        report.warn("malformed file", f"{article_id}: timelines are not an object")
        timelines = None
    for user_id, tweets in (timelines or {}).items():
        entries = []
        seen = set()
        for data in tweets if isinstance(tweets, list) else []:
            try:
                tweet = TweetRecord.from_json(data, TweetKind.TIMELINE, user_id=user_id)
            except RecordError as error:
                report.warn("malformed tweet", f"{article_id}: {error}")
                continue
            if tweet.tweet_id in seen:
                report.warn("duplicate tweet", f"{article_id}: {tweet.tweet_id}")
                continue
            seen.add(tweet.tweet_id)
            entries.append(tweet)
        article.timelines[str(user_id)] = entries

    return article


def load_corpus(root: Path | str, datasets: list = None) -> CorpusIndex:
    """Loads and indexes a corpus directory.

    Malformed or duplicate records are skipped and counted in the load report.

    Args:
        root (Path | str): The corpus directory.
        datasets (list, optional): Dataset tags to keep, all articles if None.

    Returns:
        CorpusIndex: The indexed corpus, articles ordered by id.

    Raises:
        InputError: If the root or its manifest is missing or unreadable.
    """
    root = Path(root)
    if not root.is_dir():
        raise InputError(f"Corpus root {root} does not exist")
    manifest_path = root / MANIFEST
    if not manifest_path.is_file():
        raise InputError(f"Corpus root {root} has no {MANIFEST}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as error:
        raise InputError(f"Manifest {manifest_path} is not valid json: {error}")
    if not isinstance(manifest, dict) or not isinstance(manifest.get("articles"), list):
        raise InputError(f"Manifest {manifest_path} has no article list")

    report = LoadReport()
    articles = {}
    for entry in manifest["articles"]:
        if not isinstance(entry, dict) or not entry.get("id"):
            report.warn("malformed manifest entry", repr(entry))
            continue
        if datasets is not None and entry.get("dataset") not in datasets:
            continue
        if str(entry["id"]) in articles:
            report.warn("duplicate article", str(entry["id"]))
            continue
        try:
            article = _load_article(root, entry, report)
        except RecordError as error:
            report.warn("malformed manifest entry", f"{entry.get('id')}: {error}")
            continue
        articles[article.article_id] = article

    ordered = OrderedDict(sorted(articles.items()))
    metadata = {key: value for key, value in manifest.items() if key != "articles"}
    corpus = CorpusIndex(root=root, articles=ordered, report=report, metadata=metadata)

    logger.info(
        "Loaded %d articles (%d available) from %s",
        len(corpus),
        len(corpus.available_ids),
        root,
    )
    if report.total:
        logger.warning("Skipped %d records while loading %s: %s", report.total, root, dict(report.warnings))
    return corpus
