"""Seeded synthetic market and news data with a planted signal.

The generator draws a firm-by-day grid of returns, then overwrites the
day-after-event return of every firm-day that has news so that it
follows

    r_{i,d+1} = a_i + b_d + gamma0 * score_{i,d} + noise

in percent units, where score is the mean planted score of that
firm-day's articles. Estimating the panel regression on the generated
data therefore recovers gamma0 up to sampling noise. A second score
column, "oracle", marks whether the article's three-day excess return
turned out positive, giving a perfect-foresight signal for backtest
sanity checks. Everything is a pure function of the spec, seed
included, so repeated generation is byte-identical.
"""

from __future__ import annotations

import datetime as dt
import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import NewsArticle, write_news_jsonl
from .errors import InputError
from .marketdata import BarPanel, DailyBar, TradingCalendar, event_trading_day
from .scoring import ScoreRecord

PLANTED_MODEL = "planted"
ORACLE_MODEL = "oracle"
TIMEZONE = dt.timezone(dt.timedelta(hours=-5))

FIRM_EFFECT_SIGMA = 0.30  # percent
DATE_EFFECT_SIGMA = 0.25  # percent
BASELINE_DRIFT = 0.03  # percent per day
BASELINE_SIGMA = 1.0  # percent per day
BASE_PRICE = 100.0
MEDIAN_SHARES = 2_000_000.0

POSITIVE_WORDS = [
    "gain", "growth", "profit", "strong", "record", "beat", "upgrade",
    "surge", "expand", "improve", "win", "boost",
]
NEGATIVE_WORDS = [
    "loss", "decline", "weak", "miss", "lawsuit", "drop", "downgrade",
    "slump", "recall", "warn", "cut", "default",
]
FILLER_WORDS = [
    "the", "company", "said", "quarter", "results", "market", "analysts",
    "revenue", "shares", "guidance", "report", "today", "chief", "executive",
    "board", "announced", "plans", "product", "segment", "outlook", "costs",
    "demand", "supply", "customers", "margin", "business", "statement",
    "release", "period", "fiscal", "year", "sales",
    "volume", "industry", "sector", "update", "investors", "capital",
    "operations", "management", "expects", "estimate", "forecast", "figures",
    "data", "filing", "disclosure", "trading", "exchange", "securities",
    "issued", "holders", "earnings", "dividend", "contract", "agreement",
    "partner", "deal", "unit", "division", "group",
]


@dataclass(frozen=True)
class SyntheticSpec:
    """Knobs for one synthetic dataset; all randomness hangs off ``seed``."""

    n_firms: int = 50
    n_dates: int = 500
    articles_per_day: float = 10.0
    planted_gamma: float = 0.25
    noise_sigma: float = 0.1
    duplicate_rate: float = 0.05
    multi_mention_rate: float = 0.05
    seed: int = 42
    start_date: dt.date = dt.date(2018, 1, 2)

    def __post_init__(self) -> None:
        if self.n_firms < 1 or self.n_dates < 2:
            raise InputError("need at least 1 firm and 2 trading dates")
        if self.articles_per_day < 0 or self.noise_sigma < 0:
            raise InputError("rates and sigmas must be non-negative")
        for name in ("duplicate_rate", "multi_mention_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InputError(f"{name} must lie in [0, 1]")


@dataclass
class SyntheticData:
    spec: SyntheticSpec
    articles: list[NewsArticle]
    bars: BarPanel
    calendar: TradingCalendar
    scores: list[ScoreRecord]
    duplicate_ids: set[str]
    tickers: list[str]


def _tickers(n: int) -> list[str]:
    alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    gen = ("".join(t) for t in itertools.product(alphabet, repeat=3))
    return list(itertools.islice(gen, n))


def _weekdays(start: dt.date, n: int) -> list[dt.date]:
    days: list[dt.date] = []
    d = start
    while len(days) < n:
        if d.weekday() < 5:
            days.append(d)
        d += dt.timedelta(days=1)
    return days


def _article_text(rng: np.random.Generator, score: float) -> str:
    """Assemble a headline-like text whose tone tracks ``score``."""
    n_pos = int(rng.binomial(6, score))
    n_neg = int(rng.binomial(6, 1.0 - score))
    pos = rng.choice(POSITIVE_WORDS, size=n_pos).tolist() if n_pos else []
    neg = rng.choice(NEGATIVE_WORDS, size=n_neg).tolist() if n_neg else []
    filler = rng.choice(FILLER_WORDS, size=18).tolist()
    words = filler + pos + neg
    order = rng.permutation(len(words))
    return " ".join(words[i] for i in order)


def generate_synthetic(spec: SyntheticSpec) -> SyntheticData:
    """Draw one full dataset (bars, articles, scores) from ``spec``."""
    rng = np.random.default_rng(spec.seed)
    tickers = _tickers(spec.n_firms)
    dates = _weekdays(spec.start_date, spec.n_dates)
    calendar = TradingCalendar(dates)
    date_index = {d: i for i, d in enumerate(dates)}

    firm_fx = rng.normal(0.0, FIRM_EFFECT_SIGMA, spec.n_firms)
    date_fx = rng.normal(0.0, DATE_EFFECT_SIGMA, spec.n_dates)
    returns_pct = rng.normal(BASELINE_DRIFT, BASELINE_SIGMA, (spec.n_firms, spec.n_dates))
    shares = MEDIAN_SHARES * rng.lognormal(0.0, 1.0, spec.n_firms)

    # Base articles, day by day. Planted scores drive both the text tone
    # and, below, the overwritten next-day returns.
    base: list[tuple[NewsArticle, float]] = []
    counter = 0
    for day in dates:
        for _ in range(int(rng.poisson(spec.articles_per_day))):
            firm = int(rng.integers(spec.n_firms))
            second = int(rng.integers(86_400))
            ts = dt.datetime.combine(day, dt.time(0, 0), TIMEZONE) + dt.timedelta(
                seconds=second
            )
            score = float(rng.random())
            mentioned = {tickers[firm]}
            if spec.multi_mention_rate > 0 and rng.random() < spec.multi_mention_rate:
                other = int(rng.integers(spec.n_firms))
                if other != firm:
                    mentioned.add(tickers[other])
            base.append(
                (
                    NewsArticle(
                        article_id=f"a{counter:06d}",
                        ticker=tickers[firm],
                        timestamp=ts,
                        text=_article_text(rng, score),
                        tickers_mentioned=frozenset(mentioned),
                    ),
                    score,
                )
            )
            counter += 1

    # Overwrite next-day returns for firm-days with single-ticker news.
    # Multi-ticker articles are excluded upstream by the corpus filter,
    # so they stay out of the planted relation too.
    pinned: dict[tuple[int, int], list[float]] = {}
    firm_index = {t: i for i, t in enumerate(tickers)}
    for article, score in base:
        if len(article.tickers_mentioned) != 1:
            continue
        event = event_trading_day(article.timestamp, calendar)
        if event is None:
            continue
        pinned.setdefault((firm_index[article.ticker], date_index[event]), []).append(score)
    for (firm, day_idx) in sorted(pinned):
        if day_idx + 1 >= spec.n_dates:
            continue
        mean_score = float(np.mean(pinned[(firm, day_idx)]))
        returns_pct[firm, day_idx + 1] = (
            firm_fx[firm]
            + date_fx[day_idx]
            + spec.planted_gamma * mean_score
            + rng.normal(0.0, spec.noise_sigma)
        )

    # Prices compound the final returns; the open carries the prior
    # close so intraday and close-to-close legs agree with ``ret``.
    growth = np.cumprod(1.0 + returns_pct / 100.0, axis=1)
    closes = BASE_PRICE * growth
    opens = np.empty_like(closes)
    opens[:, 0] = BASE_PRICE
    opens[:, 1:] = closes[:, :-1]
    caps = shares[:, None] * closes

    bars = [
        DailyBar(
            ticker=tickers[i],
            date=dates[t],
            open_price=float(opens[i, t]),
            close_price=float(closes[i, t]),
            total_return=float(returns_pct[i, t] / 100.0),
            market_cap=float(caps[i, t]),
        )
        for i in range(spec.n_firms)
        for t in range(spec.n_dates)
    ]
    panel = BarPanel(bars)

    # Perfect-foresight oracle: sign of the three-day excess return
    # from the event day, using value-weighted market returns with
    # prior-day cap weights (defined from the second date onward).
    returns_dec = returns_pct / 100.0
    prior_cap_total = caps[:, :-1].sum(axis=0)
    market_dec = np.full(spec.n_dates, np.nan)
    market_dec[1:] = (caps[:, :-1] * returns_dec[:, 1:]).sum(axis=0) / prior_cap_total

    def oracle_score(article: NewsArticle) -> float | None:
        event = event_trading_day(article.timestamp, calendar)
        if event is None:
            return None
        start = date_index[event]
        if start < 1 or start + 2 >= spec.n_dates:
            return None
        firm = firm_index[article.ticker]
        excess = float(
            returns_dec[firm, start : start + 3].sum() - market_dec[start : start + 3].sum()
        )
        return 1.0 if excess > 0 else 0.0

    # Duplicate injection: byte-identical text republished one to five
    # days later under a fresh id, inheriting the source's scores.
    articles = [a for a, _ in base]
    duplicate_ids: set[str] = set()
    dupes: list[tuple[NewsArticle, float]] = []
    for article, score in base:
        if spec.duplicate_rate > 0 and rng.random() < spec.duplicate_rate:
            delay = int(rng.integers(86_400, 5 * 86_400))
            dupe = NewsArticle(
                article_id=f"a{counter:06d}",
                ticker=article.ticker,
                timestamp=article.timestamp + dt.timedelta(seconds=delay),
                text=article.text,
                tickers_mentioned=article.tickers_mentioned,
            )
            counter += 1
            duplicate_ids.add(dupe.article_id)
            dupes.append((dupe, score))
            articles.append(dupe)

    scores: list[ScoreRecord] = []
    for article, score in base + dupes:
        scores.append(ScoreRecord(article.article_id, PLANTED_MODEL, score))
        oracle = oracle_score(article)
        if oracle is not None:
            scores.append(ScoreRecord(article.article_id, ORACLE_MODEL, oracle))

    articles.sort(key=lambda a: (a.timestamp, a.article_id))
    return SyntheticData(
        spec=spec,
        articles=articles,
        bars=panel,
        calendar=calendar,
        scores=scores,
        duplicate_ids=duplicate_ids,
        tickers=tickers,
    )


def write_synthetic(data: SyntheticData, out_dir: str | Path) -> dict[str, Path]:
    """Write news.jsonl, bars.csv, scores.csv, and lexicon.csv.

    The lexicon mirrors the generator's own word lists so the word-list
    scoring route has signal on this corpus.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "news": out / "news.jsonl",
        "bars": out / "bars.csv",
        "scores": out / "scores.csv",
        "lexicon": out / "lexicon.csv",
    }
    write_news_jsonl(data.articles, paths["news"])

    with open(paths["bars"], "w", encoding="utf-8", newline="") as handle:
        handle.write("date,ticker,open,close,ret,market_cap\n")
        for (ticker, day) in sorted(data.bars.by_key, key=lambda k: (k[1], k[0])):
            bar = data.bars.by_key[(ticker, day)]
            handle.write(
                f"{day.isoformat()},{ticker},{bar.open_price!r},{bar.close_price!r},"
                f"{bar.total_return!r},{bar.market_cap!r}\n"
            )

    ordered = sorted(data.scores, key=lambda r: (r.article_id, r.model_name))
    with open(paths["scores"], "w", encoding="utf-8", newline="") as handle:
        handle.write("article_id,model_name,score\n")
        for record in ordered:
            handle.write(f"{record.article_id},{record.model_name},{record.score!r}\n")

    with open(paths["lexicon"], "w", encoding="utf-8", newline="") as handle:
        handle.write("Word,Positive,Negative\n")
        for word in POSITIVE_WORDS:
            handle.write(f"{word},2009,0\n")
        for word in NEGATIVE_WORDS:
            handle.write(f"{word},0,2009\n")

    return paths
