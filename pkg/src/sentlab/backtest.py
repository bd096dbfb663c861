"""Long-short portfolio construction from article-level scores.

Publication time decides when a signal becomes tradable. News before
06:00 trades at the same day's open and exits at its close; news
during the 06:00-16:00 session enters at the same day's close and
exits at the next trading day's close; anything after 16:00, or on a
non-trading day, waits for the next trading day's open and exits at
that day's close. Signals are pooled by entry day, the top and bottom
score quantiles form the long and short books, and positions are
value-weighted by the prior trading day's market cap. Every leg pays a
fixed round-trip transaction cost.

The short book is reported two ways. The "short" series is the return
of the shorted stocks themselves (positive means the stocks went up),
with the leg's cost added, so that long minus short equals the
long-short book's profit exactly. The "short_pnl" series is its
negation, the profit of actually holding the short positions.
"""

from __future__ import annotations

import datetime as dt
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .corpus import NewsArticle
from .errors import InputError, MissingReturns
from .marketdata import BarPanel, DailyBar, TradingCalendar

logger = logging.getLogger(__name__)

MORNING_OPEN = dt.time(6, 0)
AFTERNOON_CLOSE = dt.time(16, 0)
TRADING_DAYS_PER_YEAR = 252.0


class TimingBucket(Enum):
    PRE_OPEN = "pre_open"
    INTRADAY = "intraday"
    POST_CLOSE = "post_close"


@dataclass(frozen=True)
class LegSchedule:
    """Entry and exit points of one holding period.

    Price fields are "open" or "close". A close-to-close schedule
    earns the exit day's total return (dividends included); a same-day
    open-to-close schedule earns the intraday price move.
    """

    entry_date: dt.date
    entry_price: str
    exit_date: dt.date
    exit_price: str


@dataclass(frozen=True)
class PositionLeg:
    ticker: str
    side: str  # "long" or "short"
    schedule: LegSchedule
    weight: float
    cost: float  # decimal round-trip cost charged to this leg


@dataclass
class StrategySeries:
    """Named daily return series, keyed and ordered by date."""

    name: str
    daily_returns: dict[dt.date, float]

    def returns(self) -> list[float]:
        return [self.daily_returns[d] for d in sorted(self.daily_returns)]

    def dates(self) -> list[dt.date]:
        return sorted(self.daily_returns)


@dataclass(frozen=True)
class StrategyReport:
    """Summary statistics in the shape of a performance table row."""

    name: str
    sharpe: float
    mean_daily_return_pct: float
    std_daily_pct: float
    max_drawdown_pct: float
    n_days: int
    final_value: float

    def as_dict(self) -> dict[str, float | int]:
        return {
            "sharpe": self.sharpe,
            "mean_daily_return_pct": self.mean_daily_return_pct,
            "std_daily_pct": self.std_daily_pct,
            "max_drawdown_pct": self.max_drawdown_pct,
            "n_days": self.n_days,
            "final_value": self.final_value,
        }


def timing_bucket(
    ts: dt.datetime, calendar: TradingCalendar
) -> tuple[TimingBucket, LegSchedule | None]:
    """Classify a publication timestamp and derive its holding period.

    The clock in the timestamp itself is read as exchange-local time.
    Returns the bucket and the schedule, or None for the schedule when
    the required trading days fall outside the calendar.
    """
    d = ts.date()
    on_calendar = d in calendar
    if on_calendar and ts.time() < MORNING_OPEN:
        bucket = TimingBucket.PRE_OPEN
        schedule = LegSchedule(d, "open", d, "close")
    elif on_calendar and ts.time() < AFTERNOON_CLOSE:
        bucket = TimingBucket.INTRADAY
        exit_day = calendar.next(d)
        schedule = (
            LegSchedule(d, "close", exit_day, "close") if exit_day is not None else None
        )
    else:
        bucket = TimingBucket.POST_CLOSE
        entry_day = calendar.next_after(d)
        schedule = (
            LegSchedule(entry_day, "open", entry_day, "close")
            if entry_day is not None
            else None
        )
    return bucket, schedule


def leg_gross_return(bars: BarPanel, ticker: str, schedule: LegSchedule) -> float:
    """Stock return over the schedule, before costs and sign.

    Raises ``MissingReturns`` when a needed bar is absent.
    """
    entry_bar = bars.get(ticker, schedule.entry_date)
    exit_bar = bars.get(ticker, schedule.exit_date)
    if entry_bar is None or exit_bar is None:
        raise MissingReturns(
            f"{ticker}: missing bar for leg {schedule.entry_date} -> {schedule.exit_date}"
        )
    if schedule.entry_price == "close" and schedule.exit_price == "close":
        return exit_bar.total_return
    if schedule.entry_date == schedule.exit_date and schedule.entry_price == "open":
        return exit_bar.close_price / entry_bar.open_price - 1.0
    raise ValueError(f"unsupported schedule {schedule}")


def leg_return(leg: PositionLeg, bars: BarPanel) -> float:
    """Net return of one leg: gross for longs, negated for shorts, less cost."""
    gross = leg_gross_return(bars, leg.ticker, leg.schedule)
    if leg.side == "long":
        return gross - leg.cost
    if leg.side == "short":
        return -gross - leg.cost
    raise ValueError(f"unknown side {leg.side!r}")


def select_quantiles(
    scores: Mapping[str, float], fraction: float = 0.2
) -> tuple[set[str], set[str]]:
    """Top and bottom score quantiles as (long, short) ticker sets.

    Both sets take ceil(fraction * n) names from a single ranking by
    descending score, ties broken by ticker so the choice is
    deterministic. When the books would overlap (too few names), the
    contested tickers drop from both sides.
    """
    if not 0 < fraction <= 0.5:
        raise ValueError("fraction must lie in (0, 0.5]")
    if not scores:
        return set(), set()
    ranked = sorted(scores, key=lambda t: (-scores[t], t))
    k = math.ceil(fraction * len(ranked))
    long_side = set(ranked[:k])
    short_side = set(ranked[-k:])
    contested = long_side & short_side
    return long_side - contested, short_side - contested


def value_weights(
    tickers: Iterable[str], caps: Mapping[str, float]
) -> dict[str, float]:
    """Market-cap weights over ``tickers``, normalized to sum to one.

    Tickers with a missing or non-positive cap are dropped with a
    warning; if nothing remains the basket cannot be formed.
    """
    eligible: dict[str, float] = {}
    for ticker in sorted(tickers):
        cap = caps.get(ticker, 0.0)
        if cap > 0:
            eligible[ticker] = cap
        else:
            logger.warning("dropping %s: no positive prior-day market cap", ticker)
    total = sum(eligible.values())
    if total <= 0:
        raise InputError("no ticker in the basket has a positive market cap")
    return {ticker: cap / total for ticker, cap in eligible.items()}


def round_trip_cost(cost_bps: float, convention: str = "round_trip") -> float:
    """Decimal cost charged to each leg's holding period.

    "round_trip" reads ``cost_bps`` as the full in-and-out charge;
    "per_side" reads it as a one-way charge, doubling it per leg.
    """
    if cost_bps < 0:
        raise ValueError("cost_bps must be non-negative")
    if convention == "round_trip":
        return cost_bps / 10_000.0
    if convention == "per_side":
        return 2.0 * cost_bps / 10_000.0
    raise ValueError(f"unknown cost convention {convention!r}")


@dataclass
class PortfolioResult:
    long: StrategySeries
    short: StrategySeries
    short_pnl: StrategySeries
    long_short: StrategySeries
    n_skipped_legs: int
    n_unscheduled: int


def portfolio_series(
    articles: Sequence[NewsArticle],
    model_scores: Mapping[str, float],
    bars: BarPanel,
    calendar: TradingCalendar,
    model_name: str,
    fraction: float = 0.2,
    cost_bps: float = 10.0,
    cost_convention: str = "round_trip",
    date_range: tuple[dt.date | None, dt.date | None] = (None, None),
) -> PortfolioResult:
    """Daily long, short, and long-short returns for one model's scores.

    Signals pool by entry day; multiple articles on one ticker average
    their scores, and the earliest article's schedule carries the
    ticker that day. Legs missing a bar are skipped with the day's
    weights renormalized over what remains. Days where a side has no
    tradable leg drop out of that side's series, and the long-short
    series covers days where both sides traded, as the exact difference
    long minus short.
    """
    cost = round_trip_cost(cost_bps, cost_convention)
    start, end = date_range
    # entry day -> ticker -> list of (timestamp, score, schedule)
    pools: dict[dt.date, dict[str, list[tuple[dt.datetime, float, LegSchedule]]]] = {}
    n_unscheduled = 0
    for article in articles:
        score = model_scores.get(article.article_id)
        if score is None:
            continue
        _, schedule = timing_bucket(article.timestamp, calendar)
        if schedule is None:
            n_unscheduled += 1
            continue
        day = schedule.entry_date
        if (start is not None and day < start) or (end is not None and day > end):
            continue
        pools.setdefault(day, {}).setdefault(article.ticker, []).append(
            (article.timestamp, score, schedule)
        )

    long_series: dict[dt.date, float] = {}
    short_series: dict[dt.date, float] = {}
    ls_series: dict[dt.date, float] = {}
    short_pnl: dict[dt.date, float] = {}
    n_skipped = 0

    for day in sorted(pools):
        tickers = pools[day]
        mean_scores = {
            t: sum(s for _, s, _ in sig) / len(sig) for t, sig in tickers.items()
        }
        schedules = {
            t: min(sig, key=lambda item: item[0])[2] for t, sig in tickers.items()
        }
        long_set, short_set = select_quantiles(mean_scores, fraction)

        prev_day = calendar.prev(day)
        prior_caps = bars.caps_on(prev_day) if prev_day is not None else {}

        def side_return(side_set: set[str], side: str) -> float | None:
            nonlocal n_skipped
            tradable: dict[str, float] = {}
            for ticker in sorted(side_set):
                try:
                    tradable[ticker] = leg_gross_return(bars, ticker, schedules[ticker])
                except MissingReturns:
                    n_skipped += 1
            if not tradable:
                return None
            try:
                weights = value_weights(tradable, prior_caps)
            except InputError:
                return None
            if side == "long":
                return sum(w * (tradable[t] - cost) for t, w in weights.items())
            # Stock-return view of the short book: the leg's cost raises
            # what the stocks must fall by for the book to profit.
            return sum(w * (tradable[t] + cost) for t, w in weights.items())

        long_ret = side_return(long_set, "long") if long_set else None
        short_ret = side_return(short_set, "short") if short_set else None
        if long_ret is not None:
            long_series[day] = long_ret
        if short_ret is not None:
            short_series[day] = short_ret
            short_pnl[day] = -short_ret
        if long_ret is not None and short_ret is not None:
            ls_series[day] = long_ret - short_ret

    return PortfolioResult(
        long=StrategySeries(f"{model_name}_long", long_series),
        short=StrategySeries(f"{model_name}_short", short_series),
        short_pnl=StrategySeries(f"{model_name}_short_pnl", short_pnl),
        long_short=StrategySeries(f"{model_name}_long_short", ls_series),
        n_skipped_legs=n_skipped,
        n_unscheduled=n_unscheduled,
    )


def benchmark_series(
    bars: BarPanel,
    calendar: TradingCalendar,
    date_range: tuple[dt.date | None, dt.date | None] = (None, None),
) -> tuple[StrategySeries, StrategySeries]:
    """Value-weighted and equal-weighted market series, without costs.

    Value weights need the prior trading day's caps, so both series
    start on the second calendar date to stay comparable.
    """
    start, end = date_range
    vw: dict[dt.date, float] = {}
    ew: dict[dt.date, float] = {}
    for i in range(1, len(calendar.dates)):
        day = calendar.dates[i]
        if (start is not None and day < start) or (end is not None and day > end):
            continue
        day_bars: list[DailyBar] = bars.by_date.get(day, [])
        if not day_bars:
            raise InputError(f"no bars on trading day {day}")
        prior_caps = bars.caps_on(calendar.dates[i - 1])
        weighted = 0.0
        total_cap = 0.0
        for bar in day_bars:
            cap = prior_caps.get(bar.ticker, 0.0)
            if cap > 0:
                weighted += cap * bar.total_return
                total_cap += cap
        if total_cap > 0:
            vw[day] = weighted / total_cap
        ew[day] = sum(b.total_return for b in day_bars) / len(day_bars)
    return StrategySeries("vw_market", vw), StrategySeries("ew_market", ew)


def sharpe(
    returns: Sequence[float],
    periods_per_year: float = TRADING_DAYS_PER_YEAR,
    risk_free: float = 0.0,
) -> float:
    """Annualized Sharpe ratio of a daily return series.

    ``risk_free`` is an annual rate, spread evenly over the year.
    Needs at least two observations and nonzero dispersion (sample
    standard deviation).
    """
    n = len(returns)
    if n < 2:
        raise ValueError("sharpe requires at least 2 observations")
    rf_daily = risk_free / periods_per_year
    mean = sum(returns) / n
    var = sum((r - mean) ** 2 for r in returns) / (n - 1)
    if var <= 0:
        raise ValueError("sharpe undefined for a constant return series")
    return (mean - rf_daily) / math.sqrt(var) * math.sqrt(periods_per_year)


def cumulative_growth(series: StrategySeries) -> dict[dt.date, float]:
    """Value path of one unit of capital, compounded daily.

    The unit of capital exists before the first date; each date's value
    multiplies the previous one by (1 + that day's return). A return at
    or below -100% would wipe the book and is rejected.
    """
    path: dict[dt.date, float] = {}
    value = 1.0
    for day in series.dates():
        r = series.daily_returns[day]
        if r <= -1.0:
            raise InputError(f"{series.name}: return {r} on {day} is at or below -100%")
        value *= 1.0 + r
        path[day] = value
    return path


def max_drawdown(returns: Sequence[float]) -> float:
    """Deepest peak-to-trough loss on the compounded path, in percent.

    The path starts at 1 before the first return. The result is the
    minimum over time of V_t / max_{s<=t} V_s - 1, expressed in percent
    and never positive; a never-declining path scores 0.
    """
    value = 1.0
    peak = 1.0
    worst = 0.0
    for r in returns:
        value *= 1.0 + r
        peak = max(peak, value)
        worst = min(worst, value / peak - 1.0)
    return worst * 100.0


def build_report(
    series: StrategySeries,
    periods_per_year: float = TRADING_DAYS_PER_YEAR,
    risk_free: float = 0.0,
) -> StrategyReport:
    """Performance summary row for one return series."""
    returns = series.returns()
    path = cumulative_growth(series)
    mean = sum(returns) / len(returns)
    var = sum((r - mean) ** 2 for r in returns) / (len(returns) - 1)
    return StrategyReport(
        name=series.name,
        sharpe=sharpe(returns, periods_per_year, risk_free),
        mean_daily_return_pct=mean * 100.0,
        std_daily_pct=math.sqrt(var) * 100.0,
        max_drawdown_pct=max_drawdown(returns),
        n_days=len(returns),
        final_value=path[series.dates()[-1]],
    )
