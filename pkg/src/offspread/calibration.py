"""Parameter estimates from an offline tweet corpus and the initial-stifler fit.

Corpus CSV header::

    tweet_id,created_at,screen_name,follower_count,friend_count,is_retweet,original_id

``created_at`` is ISO-8601 (UTC; a trailing ``Z`` or no offset are both read
as UTC). Rows that fail to parse are reported with their line number and
left out of the aggregates.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from typing import Iterable, Optional, TextIO

from .dynamics import DEFAULT_HORIZON, ModelParams, StopRule, default_initial, simulate
from .experiments import METRIC_STOP, retweets_per_tweet

FIELDS = ("tweet_id", "created_at", "screen_name", "follower_count", "friend_count", "is_retweet", "original_id")
SAMPLE_CORPUS = "sample_corpus.csv"
DEFAULT_TARGET = 1.0
DEFAULT_M_MAX = 20


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class TweetRecord:
    tweet_id: str
    created_at: datetime
    screen_name: str
    follower_count: int
    friend_count: int
    is_retweet: bool
    original_id: str = ""


@dataclass(frozen=True)
class RowError:
    line: int
    message: str

    def __str__(self):
        return f"line {self.line}: {self.message}"


@dataclass(frozen=True)
class CorpusStats:
    total_tweets: int = 0
    original_tweets: int = 0
    retweet_count: int = 0
    originals_retweeted_at_least_once: int = 0
    friends_of_offenders_sum: int = 0
    # retweets of in-corpus originals / originals retweeted at least once
    mean_duplication: float = 0.0
    retweets_per_original: float = 0.0
    # (originals + retweets) / originals
    copies_per_original: float = 0.0
    distinct_original_tweeters: int = 0
    malformed_rows: int = 0
    errors: tuple[RowError, ...] = field(default=())

    def as_dict(self) -> dict:
        return {
            "total_tweets": self.total_tweets,
            "original_tweets": self.original_tweets,
            "retweet_count": self.retweet_count,
            "originals_retweeted_at_least_once": self.originals_retweeted_at_least_once,
            "friends_of_offenders_sum": self.friends_of_offenders_sum,
            "mean_duplication": self.mean_duplication,
            "retweets_per_original": self.retweets_per_original,
            "copies_per_original": self.copies_per_original,
            "distinct_original_tweeters": self.distinct_original_tweeters,
            "malformed_rows": self.malformed_rows,
        }


_TRUE = {"true", "1", "yes", "t", "y"}
_FALSE = {"false", "0", "no", "f", "n", ""}


def _parse_time(text: str) -> datetime:
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _parse_count(text: str, name: str) -> int:
    try:
        v = int(text.strip())
    except ValueError:
        raise ValueError(f"{name} is not an integer: {text!r}") from None
    if v < 0:
        raise ValueError(f"{name} is negative: {v}")
    return v


def parse_record(row: dict) -> TweetRecord:
    try:
        created = _parse_time(row["created_at"])
    except ValueError:
        raise ValueError(f"created_at is not an ISO-8601 timestamp: {row['created_at']!r}") from None
    flag = row["is_retweet"].strip().lower()
    if flag in _TRUE:
        is_rt = True
    elif flag in _FALSE:
        is_rt = False
    else:
        raise ValueError(f"is_retweet is not a boolean: {row['is_retweet']!r}")
    original = row["original_id"].strip()
    if is_rt and not original:
        raise ValueError("retweet without original_id")
    tweet_id = row["tweet_id"].strip()
    if not tweet_id:
        raise ValueError("empty tweet_id")
    return TweetRecord(
        tweet_id=tweet_id,
        created_at=created,
        screen_name=row["screen_name"].strip(),
        follower_count=_parse_count(row["follower_count"], "follower_count"),
        friend_count=_parse_count(row["friend_count"], "friend_count"),
        is_retweet=is_rt,
        original_id=original if is_rt else "",
    )


def iter_records(stream: TextIO, errors: Optional[list] = None) -> Iterable[TweetRecord]:
    """Yield parsed rows; malformed rows are appended to ``errors`` (or raise if it is None)."""
    reader = csv.DictReader(stream)
    header = reader.fieldnames
    if header is None:
        raise CorpusError("corpus is empty: missing header row")
    missing = [f for f in FIELDS if f not in header]
    if missing:
        raise CorpusError(f"header is missing column(s): {', '.join(missing)}")
    for row in reader:
        line = reader.line_num
        try:
            if None in row or any(row[f] is None for f in FIELDS):
                raise ValueError("wrong number of fields")
            rec = parse_record(row)
        except ValueError as exc:
            if errors is None:
                raise CorpusError(f"line {line}: {exc}") from None
            errors.append(RowError(line, str(exc)))
            continue
        yield rec


def ingest(stream: TextIO, strict: bool = False) -> CorpusStats:
    """Single pass over the corpus CSV, aggregating the counts used for calibration.

    With ``strict`` the first malformed row raises :class:`CorpusError`.
    """
    errors: Optional[list] = None if strict else []
    total = originals = retweets = 0
    original_ids: set[str] = set()
    friends: dict[str, int] = {}
    targets: Counter = Counter()
    for rec in iter_records(stream, errors):
        total += 1
        if rec.is_retweet:
            retweets += 1
            targets[rec.original_id] += 1
        else:
            originals += 1
            original_ids.add(rec.tweet_id)
            # A user's friend count can change between tweets; max keeps this order-free.
            friends[rec.screen_name] = max(friends.get(rec.screen_name, 0), rec.friend_count)

    retweeted = [oid for oid in targets if oid in original_ids]
    rt_of_present = sum(targets[oid] for oid in retweeted)
    errs = tuple(errors or ())
    return CorpusStats(
        total_tweets=total,
        original_tweets=originals,
        retweet_count=retweets,
        originals_retweeted_at_least_once=len(retweeted),
        friends_of_offenders_sum=sum(friends.values()),
        mean_duplication=rt_of_present / len(retweeted) if retweeted else 0.0,
        retweets_per_original=retweets / originals if originals else 0.0,
        copies_per_original=total / originals if originals else 0.0,
        distinct_original_tweeters=len(friends),
        malformed_rows=len(errs),
        errors=errs,
    )


def ingest_path(path, strict: bool = False) -> CorpusStats:
    with open(path, newline="", encoding="utf-8") as fh:
        return ingest(fh, strict=strict)


def ingest_sample() -> CorpusStats:
    """Aggregate the bundled synthetic corpus."""
    with resources.files("offspread").joinpath("data").joinpath(SAMPLE_CORPUS).open("r", newline="", encoding="utf-8") as fh:
        return ingest(fh)


def estimate_alpha(stats: CorpusStats, numerator: str = "originals") -> float:
    """``alpha = 1 - count / friends_of_offenders_sum``.

    ``numerator="originals"`` uses the original-tweet count (the figure the
    published estimate divides by); ``"retweets"`` uses the retweet count.
    """
    if numerator == "originals":
        num = stats.original_tweets
    elif numerator == "retweets":
        num = stats.retweet_count
    else:
        raise ValueError(f"numerator must be 'originals' or 'retweets', got {numerator!r}")
    den = stats.friends_of_offenders_sum
    if den <= 0:
        raise CorpusError("cannot estimate alpha: friends_of_offenders_sum is zero")
    if num > den:
        raise CorpusError(f"cannot estimate alpha: numerator {num} exceeds denominator {den}")
    return 1.0 - num / den


def mean_degree_powerlaw(gamma: float, m_max: int = DEFAULT_M_MAX) -> float:
    """Mean of the truncated power law ``P(m) ~ m^-gamma`` on ``m = 1..m_max``."""
    if not gamma > 1.0:
        raise ValueError(f"gamma must exceed 1, got {gamma}")
    if int(m_max) != m_max or m_max < 1:
        raise ValueError(f"m_max must be an integer >= 1, got {m_max}")
    ms = range(1, int(m_max) + 1)
    weights = [m ** -gamma for m in ms]
    return math.fsum(m * w for m, w in zip(ms, weights)) / math.fsum(weights)


def s0_grid(start: float = 0.01, stop: float = 1.0, step: float = 0.01) -> tuple[float, ...]:
    if step <= 0 or stop < start:
        return ()
    count = int(round((stop - start) / step)) + 1
    return tuple(round(start + i * step, 12) for i in range(count))


@dataclass(frozen=True)
class FitResult:
    s0_frac: float
    target: float
    grid: tuple[float, ...]
    predictions: tuple[float, ...]

    @property
    def best_prediction(self) -> float:
        return self.predictions[self.grid.index(self.s0_frac)]


def predict_retweets(
    params: ModelParams,
    s0_frac: float,
    o0: float = 1.0,
    horizon: int = DEFAULT_HORIZON,
    stop: StopRule = METRIC_STOP,
) -> float:
    initial = default_initial(params, s0_frac, o0)
    return retweets_per_tweet(simulate(initial, params, horizon, stop))


def fit_s0(
    params: ModelParams = ModelParams(),
    target: float = DEFAULT_TARGET,
    grid: Optional[Iterable[float]] = None,
    o0: float = 1.0,
    horizon: int = DEFAULT_HORIZON,
) -> FitResult:
    """Grid point minimising ``|retweets_per_tweet - target|``; ties go to the smaller S0/N."""
    grid = tuple(s0_grid() if grid is None else grid)
    if not grid:
        raise ValueError("empty S0/N grid")
    if target < 0:
        raise ValueError("target must be >= 0")
    preds = tuple(predict_retweets(params, s, o0, horizon) for s in grid)
    best = min(range(len(grid)), key=lambda i: (abs(preds[i] - target), grid[i]))
    return FitResult(grid[best], target, grid, preds)
