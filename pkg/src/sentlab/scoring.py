"""Sentiment scores from a word-list lexicon and from external models.

Every score lives on [0, 1] where values above one half lean positive.
The lexicon route counts positive and negative token hits; external
model scores arrive precomputed in a CSV and are merged into the same
table keyed by (article_id, model_name).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import NewsArticle, tokenize
from .errors import ConflictError, DuplicateError, FormatError, RangeError

LEXICON_MODEL_NAME = "lexicon"


@dataclass(frozen=True)
class SentimentLexicon:
    """Disjoint positive and negative word sets, lowercased."""

    positive: frozenset[str]
    negative: frozenset[str]

    def __post_init__(self) -> None:
        overlap = self.positive & self.negative
        if overlap:
            sample = ", ".join(sorted(overlap)[:5])
            raise ConflictError(f"terms listed as both positive and negative: {sample}")


@dataclass(frozen=True)
class ScoreRecord:
    article_id: str
    model_name: str
    score: float


def load_lexicon(path: str | Path) -> SentimentLexicon:
    """Read a sentiment word list from CSV.

    The file must have Word, Positive, and Negative columns (matched
    case-insensitively; extra columns are ignored). A word belongs to a
    set when the corresponding column holds a number greater than zero,
    the convention used by published finance dictionaries where the
    value is the inclusion year. Words are lowercased on load.
    """
    positive: set[str] = set()
    negative: set[str] = set()
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise FormatError(f"{path}: empty lexicon file")
        lookup = {name.strip().lower(): name for name in reader.fieldnames}
        try:
            word_col = lookup["word"]
            pos_col = lookup["positive"]
            neg_col = lookup["negative"]
        except KeyError as exc:
            raise FormatError(
                f"{path}: missing required column {exc.args[0]!r}"
            ) from None
        for row_no, row in enumerate(reader, start=2):
            word = (row[word_col] or "").strip().lower()
            if not word:
                raise FormatError(f"{path}:{row_no}: empty word")
            try:
                pos_val = float(row[pos_col])
                neg_val = float(row[neg_col])
            except (TypeError, ValueError):
                raise FormatError(
                    f"{path}:{row_no}: Positive/Negative must be numeric"
                ) from None
            if pos_val > 0 and neg_val > 0:
                raise ConflictError(
                    f"{path}:{row_no}: {word!r} marked both positive and negative"
                )
            if pos_val > 0:
                if word in negative:
                    raise ConflictError(f"{path}:{row_no}: {word!r} already negative")
                positive.add(word)
            elif neg_val > 0:
                if word in positive:
                    raise ConflictError(f"{path}:{row_no}: {word!r} already positive")
                negative.add(word)
    return SentimentLexicon(positive=frozenset(positive), negative=frozenset(negative))


def lexicon_score(tokens: Iterable[str], lexicon: SentimentLexicon) -> float:
    """Share of sentiment-bearing tokens that are positive.

    Counts token occurrences, not distinct words. Texts with no
    sentiment-bearing tokens score a neutral 0.5.
    """
    pos = 0
    neg = 0
    for token in tokens:
        if token in lexicon.positive:
            pos += 1
        elif token in lexicon.negative:
            neg += 1
    total = pos + neg
    if total == 0:
        return 0.5
    return pos / total


def score_articles(
    articles: Sequence[NewsArticle],
    lexicon: SentimentLexicon,
    model_name: str = LEXICON_MODEL_NAME,
) -> list[ScoreRecord]:
    """Score every article with the lexicon under ``model_name``."""
    return [
        ScoreRecord(a.article_id, model_name, lexicon_score(tokenize(a.text), lexicon))
        for a in articles
    ]


def ingest_external_scores(
    path: str | Path,
    known_ids: set[str] | None = None,
) -> tuple[list[ScoreRecord], set[str]]:
    """Read model scores from a CSV with columns article_id,model_name,score.

    Scores must lie in [0, 1]; out-of-range values raise ``RangeError``
    naming the row. A repeated (article_id, model_name) pair raises
    ``DuplicateError``. Ids absent from ``known_ids`` are not an error,
    they are collected and returned so the caller can log them.
    """
    records: list[ScoreRecord] = []
    unknown: set[str] = set()
    seen: set[tuple[str, str]] = set()
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        required = {"article_id", "model_name", "score"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise FormatError(
                f"{path}: header must contain columns article_id,model_name,score"
            )
        for row_no, row in enumerate(reader, start=2):
            article_id = row["article_id"]
            model_name = row["model_name"]
            if not article_id or not model_name:
                raise FormatError(f"{path}:{row_no}: empty article_id or model_name")
            try:
                score = float(row["score"])
            except (TypeError, ValueError):
                raise FormatError(f"{path}:{row_no}: score must be numeric") from None
            if not 0.0 <= score <= 1.0:
                raise RangeError(
                    f"{path}:{row_no}: score {score} outside [0, 1] "
                    f"for article {article_id!r}"
                )
            key = (article_id, model_name)
            if key in seen:
                raise DuplicateError(
                    f"{path}:{row_no}: duplicate score for article {article_id!r} "
                    f"model {model_name!r}"
                )
            seen.add(key)
            if known_ids is not None and article_id not in known_ids:
                unknown.add(article_id)
            records.append(ScoreRecord(article_id, model_name, score))
    return records, unknown


class ScoreTable:
    """Scores keyed by (article_id, model_name) with canonical ordering."""

    def __init__(self, records: Iterable[ScoreRecord] = ()):
        self._by_model: dict[str, dict[str, float]] = {}
        for record in records:
            self.add(record)

    def add(self, record: ScoreRecord) -> None:
        model = self._by_model.setdefault(record.model_name, {})
        if record.article_id in model:
            raise DuplicateError(
                f"duplicate score for article {record.article_id!r} "
                f"model {record.model_name!r}"
            )
        model[record.article_id] = record.score

    def extend(self, records: Iterable[ScoreRecord]) -> None:
        for record in records:
            self.add(record)

    def models(self) -> list[str]:
        return sorted(self._by_model)

    def for_model(self, model_name: str) -> dict[str, float]:
        return self._by_model.get(model_name, {})

    def __len__(self) -> int:
        return sum(len(m) for m in self._by_model.values())

    def rows(self) -> list[ScoreRecord]:
        """All records ordered by article_id then model_name."""
        out = [
            ScoreRecord(article_id, model_name, score)
            for model_name, scores in self._by_model.items()
            for article_id, score in scores.items()
        ]
        out.sort(key=lambda r: (r.article_id, r.model_name))
        return out

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["article_id", "model_name", "score"])
            for record in self.rows():
                writer.writerow([record.article_id, record.model_name, repr(record.score)])


def restrict_to_articles(
    records: Iterable[ScoreRecord], ids: set[str]
) -> list[ScoreRecord]:
    """Keep only scores whose article survived the corpus filters."""
    return [r for r in records if r.article_id in ids]
