"""Records of a FakeNewsNet-shaped corpus: news articles, tweets and users."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from datetime import datetime
from enum import Enum

from hetsmcg.errors import RecordError

logger = logging.getLogger(__name__)

LABELS = {"real": 0, "fake": 1}


class TweetKind(str, Enum):
    """How a tweet relates to the article."""

    CITING = "citing"
    RETWEET = "retweet"
    TIMELINE = "timeline"


def _count(data: dict, key: str) -> int:
    value = data.get(key, 0)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise RecordError(f"{key} is not a number: {value!r}")
    if isinstance(value, float) and not value.is_integer():
        raise RecordError(f"{key} is not a whole number: {value!r}")
    if value < 0:
        raise RecordError(f"{key} is negative: {value}")
    return int(value)


def _text(data: dict, key: str) -> str:
    value = data.get(key) or ""
    if not isinstance(value, str):
        raise RecordError(f"{key} is not a string")
    return value


def _timestamp(value) -> float | None:
    """Turns a created_at value (epoch seconds or ISO 8601 string) into epoch seconds."""
    if value is None:
        return None
    if isinstance(value, bool):
        raise RecordError(f"created_at is not a time: {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    try:
        return datetime.fromisoformat(str(value).replace("Z", "+00:00")).timestamp()
    except ValueError:
        raise RecordError(f"created_at is not a time: {value!r}")


@dataclass(frozen=True)
class NewsRecord:
    """A news article.

    Attributes:
        article_id (str): The id of the article.
        label (int): 0 for real, 1 for fake.
        text (str): Title and body, joined by a blank.
        dataset (str): politifact or gossipcop.
    """

    article_id: str
    label: int
    text: str
    dataset: str

    @classmethod
    def from_json(cls, data: dict, label: int, dataset: str) -> NewsRecord:
        """Creates a news record from the content file of an article.

        Args:
            data (dict): The content, with id, title and text.
            label (int): The label from the manifest.
            dataset (str): The dataset tag from the manifest.

        Returns:
            NewsRecord: The record.
        """
        article_id = str(data.get("id") or "")
        if not article_id:
            raise RecordError("news record without id")
        text = " ".join(part for part in (_text(data, "title"), _text(data, "text")) if part)
        return cls(article_id=article_id, label=label, text=text, dataset=dataset)


@dataclass(frozen=True)
class TweetRecord:
    """A tweet citing the article, a retweet of such a tweet or a timeline tweet.

    Attributes:
        tweet_id (str): The id of the tweet.
        text (str): The text.
        retweet_count (int): How often the tweet was retweeted.
        favorite_count (int): How often the tweet was liked.
        user_id (str): The author.
        kind (TweetKind): The role of the tweet.
        of_tweet_id (str | None): For retweets, the retweeted citing tweet.
        created_at (float | None): Epoch seconds, if known.
    """

    tweet_id: str
    text: str
    retweet_count: int
    favorite_count: int
    user_id: str
    kind: TweetKind
    of_tweet_id: str | None = None
    created_at: float | None = None

    @classmethod
    def from_json(cls, data: dict, kind: TweetKind, user_id: str = None) -> TweetRecord:
        """Creates a tweet record.

        Args:
            data (dict): The tweet object.
            kind (TweetKind): The role of the tweet.
            user_id (str, optional): The author, for timeline tweets stored under their user.

        Returns:
            TweetRecord: The record.

        Raises:
            RecordError: If a field is missing or invalid.
        """
        if not isinstance(data, dict):
            raise RecordError("tweet is not an object")
        tweet_id = str(data.get("tweet_id") or "")
        if not tweet_id:
            raise RecordError("tweet without tweet_id")
        author = str(data.get("user_id") or user_id or "")
        if not author:
            raise RecordError(f"tweet {tweet_id} without user_id")

        of_tweet_id = None
        if kind == TweetKind.RETWEET:
            of_tweet_id = str(data.get("of_tweet_id") or "")
            if not of_tweet_id:
                raise RecordError(f"retweet {tweet_id} without of_tweet_id")

        return cls(
            tweet_id=tweet_id,
            text=_text(data, "text"),
            retweet_count=_count(data, "retweet_count"),
            favorite_count=_count(data, "favorite_count"),
            user_id=author,
            kind=kind,
            of_tweet_id=of_tweet_id,
            created_at=_timestamp(data.get("created_at")),
        )


@dataclass(frozen=True)
class UserRecord:
    """A user profile.

    Attributes:
        user_id (str): The id of the user.
        description (str): The profile description.
        followers (int): Follower count.
        friends (int): Friends count.
        favorites (int): Favorites count.
        statuses (int): Statuses count.
    """

    user_id: str
    description: str
    followers: int
    friends: int
    favorites: int
    statuses: int

    @classmethod
    def from_json(cls, data: dict) -> UserRecord:
        """Creates a user record.

        Args:
            data (dict): The user object.

        Returns:
            UserRecord: The record.

        Raises:
            RecordError: If a field is missing or invalid.
        """
        if not isinstance(data, dict):
            raise RecordError("user is not an object")
        user_id = str(data.get("user_id") or "")
        if not user_id:
            raise RecordError("user without user_id")
        return cls(
            user_id=user_id,
            description=_text(data, "description"),
            followers=_count(data, "followers"),
            friends=_count(data, "friends"),
            favorites=_count(data, "favorites"),
            statuses=_count(data, "statuses"),
        )

    @property
    def counts(self) -> tuple[int, int, int, int]:
        """The four profile counts in feature order."""
        return self.followers, self.friends, self.favorites, self.statuses
