"""News corpus handling: loading, tokenization, and duplicate filtering.

Articles flow through two filters before any scoring happens. The
single-stock filter keeps only articles that mention exactly one
ticker, so each sentiment signal maps to one firm. The novelty filter
then drops articles that are near-duplicates of anything published
about the same ticker in the recent past, measured by cosine
similarity of term-frequency vectors over the full text.
"""

from __future__ import annotations

import datetime as dt
import json
import math
import re
from collections import Counter, deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import FormatError, InputError

_WORD_RE = re.compile(r"[a-z]+")


@dataclass(frozen=True)
class NewsArticle:
    """One news item tied to a primary ticker.

    ``tickers_mentioned`` holds every ticker the article refers to;
    ``ticker`` is the primary subject and must be a member of that set.
    Timestamps carry a UTC offset and are read as exchange-local time,
    so hour-of-day comparisons use the clock in the timestamp itself.
    """

    article_id: str
    ticker: str
    timestamp: dt.datetime
    text: str
    tickers_mentioned: frozenset[str]

    def __post_init__(self) -> None:
        if self.timestamp.tzinfo is None:
            raise InputError(
                f"article {self.article_id!r}: timestamp must carry a UTC offset"
            )
        if self.ticker not in self.tickers_mentioned:
            raise InputError(
                f"article {self.article_id!r}: primary ticker {self.ticker!r} "
                "missing from tickers_mentioned"
            )


@dataclass(frozen=True)
class TermVector:
    """Sparse term-frequency vector with a cached Euclidean norm."""

    entries: dict[str, int]
    norm: float

    @classmethod
    def from_tokens(cls, tokens: Iterable[str]) -> "TermVector":
        counts = dict(Counter(tokens))
        norm = math.sqrt(sum(c * c for c in counts.values()))
        return cls(entries=counts, norm=norm)

    @classmethod
    def from_text(cls, text: str) -> "TermVector":
        return cls.from_tokens(tokenize(text))


@dataclass
class CorpusFunnel:
    """Article counts surviving each filter stage, in pipeline order."""

    all_news: int = 0
    single_stock_news: int = 0
    unique_news: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "all_news": self.all_news,
            "single_stock_news": self.single_stock_news,
            "unique_news": self.unique_news,
        }


def tokenize(text: str) -> list[str]:
    """Lowercase ``text`` and split it into runs of ASCII letters.

    Any non-letter character acts as a separator, so hyphenated and
    dotted strings break apart ("U.S.-based" -> ["u", "s", "based"]).
    This mirrors how sentiment dictionaries index plain words.
    """
    return _WORD_RE.findall(text.lower())


def term_frequency(tokens: Iterable[str]) -> TermVector:
    """Build a term-frequency vector from a token sequence."""
    return TermVector.from_tokens(tokens)


def cosine_similarity(a: TermVector, b: TermVector) -> float:
    """Cosine of the angle between two term vectors, in [0, 1].

    Counts are non-negative, so the cosine cannot go below zero. If
    either vector has zero norm the similarity is defined as 0.
    """
    if a.norm == 0.0 or b.norm == 0.0:
        return 0.0
    small, large = (a.entries, b.entries) if len(a.entries) <= len(b.entries) else (b.entries, a.entries)
    dot = sum(count * large.get(term, 0) for term, count in small.items())
    if dot == 0:
        return 0.0
    return dot / (a.norm * b.norm)


def single_stock_filter(
    articles: Sequence[NewsArticle],
) -> tuple[list[NewsArticle], list[NewsArticle]]:
    """Split articles into (kept, dropped) by the one-ticker rule.

    Kept articles mention exactly one ticker. Input order is preserved
    in both outputs.
    """
    kept: list[NewsArticle] = []
    dropped: list[NewsArticle] = []
    for article in articles:
        (kept if len(article.tickers_mentioned) == 1 else dropped).append(article)
    return kept, dropped


def novelty_filter(
    articles: Sequence[NewsArticle],
    window_days: float = 20.0,
    threshold: float = 0.8,
    same_ticker: bool = True,
) -> tuple[list[NewsArticle], list[NewsArticle]]:
    """Drop articles that repeat recent coverage.

    An article is excluded when its full-text cosine similarity against
    any earlier article in scope reaches ``threshold`` or more, where
    "in scope" means published at most ``window_days`` calendar days
    before it and, by default, about the same ticker. Earlier articles
    count whether or not they themselves were excluded, so a burst of
    copies keeps only the first.

    ``articles`` must already be sorted by ascending timestamp; passing
    an unsorted sequence is a caller bug and raises ``ValueError``.
    Thresholds above 1 keep everything because cosine never exceeds 1.
    Returns (kept, excluded), both in input order.
    """
    if window_days < 0:
        raise ValueError("window_days must be non-negative")
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    window = dt.timedelta(days=window_days)
    # Prior articles per scope key, oldest first. Entries fall out of
    # the left end once they age past the window.
    history: dict[str, deque[tuple[dt.datetime, TermVector]]] = {}
    last_ts: dt.datetime | None = None
    kept: list[NewsArticle] = []
    excluded: list[NewsArticle] = []
    for article in articles:
        if last_ts is not None and article.timestamp < last_ts:
            raise ValueError(
                "articles must be sorted by ascending timestamp before novelty filtering"
            )
        last_ts = article.timestamp
        key = article.ticker if same_ticker else ""
        bucket = history.setdefault(key, deque())
        while bucket and article.timestamp - bucket[0][0] > window:
            bucket.popleft()
        vector = TermVector.from_text(article.text)
        duplicate = any(
            cosine_similarity(vector, prior_vec) >= threshold
            for _, prior_vec in bucket
        )
        (excluded if duplicate else kept).append(article)
        bucket.append((article.timestamp, vector))
    return kept, excluded


def apply_filters(
    articles: Sequence[NewsArticle],
    window_days: float = 20.0,
    threshold: float = 0.8,
    same_ticker: bool = True,
) -> tuple[list[NewsArticle], CorpusFunnel]:
    """Run both filters in order and report the survival funnel.

    Articles are sorted by (timestamp, article_id) before the novelty
    pass so that ties break deterministically.
    """
    funnel = CorpusFunnel(all_news=len(articles))
    single, _ = single_stock_filter(articles)
    funnel.single_stock_news = len(single)
    single.sort(key=lambda a: (a.timestamp, a.article_id))
    kept, _ = novelty_filter(
        single, window_days=window_days, threshold=threshold, same_ticker=same_ticker
    )
    funnel.unique_news = len(kept)
    return kept, funnel


def parse_timestamp(raw: str) -> dt.datetime:
    """Parse an ISO-8601 timestamp, accepting a trailing 'Z' for UTC."""
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        ts = dt.datetime.fromisoformat(raw)
    except ValueError as exc:
        raise FormatError(f"bad timestamp {raw!r}: {exc}") from None
    return ts


def load_news_jsonl(path: str | Path) -> list[NewsArticle]:
    """Read articles from a JSON-lines file, one object per line.

    Required keys: article_id, ticker, tickers_mentioned, timestamp,
    text. Article ids must be unique across the file. Order in the
    file is preserved.
    """
    required = {"article_id", "ticker", "tickers_mentioned", "timestamp", "text"}
    articles: list[NewsArticle] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{line_no}: invalid JSON: {exc}") from None
            missing = required - record.keys()
            if missing:
                raise FormatError(
                    f"{path}:{line_no}: missing keys {sorted(missing)}"
                )
            article_id = str(record["article_id"])
            if article_id in seen:
                raise InputError(f"{path}:{line_no}: duplicate article_id {article_id!r}")
            seen.add(article_id)
            mentioned = record["tickers_mentioned"]
            if not isinstance(mentioned, list) or not mentioned:
                raise FormatError(
                    f"{path}:{line_no}: tickers_mentioned must be a non-empty array"
                )
            try:
                articles.append(
                    NewsArticle(
                        article_id=article_id,
                        ticker=str(record["ticker"]),
                        timestamp=parse_timestamp(str(record["timestamp"])),
                        text=str(record["text"]),
                        tickers_mentioned=frozenset(str(t) for t in mentioned),
                    )
                )
            except InputError as exc:
                raise InputError(f"{path}:{line_no}: {exc}") from None
    return articles


def write_news_jsonl(articles: Iterable[NewsArticle], path: str | Path) -> None:
    """Serialize articles to JSON lines with a stable key order."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for article in articles:
            record = {
                "article_id": article.article_id,
                "ticker": article.ticker,
                "tickers_mentioned": sorted(article.tickers_mentioned),
                "timestamp": article.timestamp.isoformat(),
                "text": article.text,
            }
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
