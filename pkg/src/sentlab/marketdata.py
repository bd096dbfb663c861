"""Daily bars, the trading calendar, and excess-return labeling.

Each article is anchored to an event trading day and labeled by the
sign of the firm's three-day excess return over the market, starting
on that day. The market return is a value-weighted average of all
constituents, weighted by the prior trading day's market cap so the
weights are known before the day begins.
"""

from __future__ import annotations

import csv
import datetime as dt
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import NewsArticle
from .errors import FormatError, InputError, MissingReturns

AFTERNOON_CLOSE = dt.time(16, 0)  # publications at or after this roll to the next day


@dataclass(frozen=True)
class DailyBar:
    """One ticker-day of prices, total return, and market cap.

    ``total_return`` is the close-to-close return for the day as a
    decimal (0.01 means one percent) and includes distributions, so it
    is the right quantity for close-to-close holding periods.
    """

    ticker: str
    date: dt.date
    open_price: float
    close_price: float
    total_return: float
    market_cap: float

    def __post_init__(self) -> None:
        if self.open_price <= 0 or self.close_price <= 0:
            raise InputError(f"{self.ticker} {self.date}: prices must be positive")
        if self.total_return <= -1.0:
            raise InputError(f"{self.ticker} {self.date}: return at or below -100%")
        if self.market_cap < 0:
            raise InputError(f"{self.ticker} {self.date}: negative market cap")


class TradingCalendar:
    """Sorted distinct trading dates with O(log n) neighbor lookups."""

    def __init__(self, dates: Iterable[dt.date]):
        self.dates: list[dt.date] = sorted(set(dates))
        if not self.dates:
            raise InputError("calendar requires at least one trading date")
        self._index = {d: i for i, d in enumerate(self.dates)}

    def __contains__(self, d: dt.date) -> bool:
        return d in self._index

    def __len__(self) -> int:
        return len(self.dates)

    def index(self, d: dt.date) -> int:
        try:
            return self._index[d]
        except KeyError:
            raise KeyError(f"{d} is not a trading day") from None

    def next(self, d: dt.date) -> dt.date | None:
        """Trading day after ``d`` (``d`` must be a trading day)."""
        i = self.index(d) + 1
        return self.dates[i] if i < len(self.dates) else None

    def prev(self, d: dt.date) -> dt.date | None:
        """Trading day before ``d`` (``d`` must be a trading day)."""
        i = self.index(d) - 1
        return self.dates[i] if i >= 0 else None

    def next_after(self, d: dt.date) -> dt.date | None:
        """First trading day strictly after the calendar date ``d``."""
        i = bisect_right(self.dates, d)
        return self.dates[i] if i < len(self.dates) else None

    def next_on_or_after(self, d: dt.date) -> dt.date | None:
        """First trading day at or after the calendar date ``d``."""
        i = bisect_left(self.dates, d)
        return self.dates[i] if i < len(self.dates) else None

    def shift(self, d: dt.date, offset: int) -> dt.date | None:
        """Trading day ``offset`` steps from ``d``, or None off the end."""
        i = self.index(d) + offset
        if 0 <= i < len(self.dates):
            return self.dates[i]
        return None


class BarPanel:
    """All bars keyed by (ticker, date), with per-date views."""

    def __init__(self, bars: Iterable[DailyBar]):
        self.by_key: dict[tuple[str, dt.date], DailyBar] = {}
        self.by_date: dict[dt.date, list[DailyBar]] = {}
        for bar in bars:
            key = (bar.ticker, bar.date)
            if key in self.by_key:
                raise InputError(f"duplicate bar for {bar.ticker} on {bar.date}")
            self.by_key[key] = bar
            self.by_date.setdefault(bar.date, []).append(bar)
        for day_bars in self.by_date.values():
            day_bars.sort(key=lambda b: b.ticker)

    def __len__(self) -> int:
        return len(self.by_key)

    def get(self, ticker: str, d: dt.date) -> DailyBar | None:
        return self.by_key.get((ticker, d))

    def tickers(self) -> list[str]:
        return sorted({t for t, _ in self.by_key})

    def caps_on(self, d: dt.date) -> dict[str, float]:
        """Market caps of every ticker with a bar on ``d``."""
        return {bar.ticker: bar.market_cap for bar in self.by_date.get(d, [])}


def load_bars_csv(path: str | Path) -> BarPanel:
    """Read daily bars from a CSV with columns date,ticker,open,close,ret,market_cap."""
    required = ["date", "ticker", "open", "close", "ret", "market_cap"]
    bars: list[DailyBar] = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or any(c not in reader.fieldnames for c in required):
            raise FormatError(
                f"{path}: header must contain columns {','.join(required)}"
            )
        for row_no, row in enumerate(reader, start=2):
            try:
                bars.append(
                    DailyBar(
                        ticker=row["ticker"],
                        date=dt.date.fromisoformat(row["date"]),
                        open_price=float(row["open"]),
                        close_price=float(row["close"]),
                        total_return=float(row["ret"]),
                        market_cap=float(row["market_cap"]),
                    )
                )
            except (TypeError, ValueError) as exc:
                raise FormatError(f"{path}:{row_no}: {exc}") from None
    return BarPanel(bars)


def load_market_series_csv(path: str | Path) -> dict[dt.date, float]:
    """Read an externally supplied market return series (date,market_ret)."""
    series: dict[dt.date, float] = {}
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or not {"date", "market_ret"} <= set(reader.fieldnames):
            raise FormatError(f"{path}: header must contain columns date,market_ret")
        for row_no, row in enumerate(reader, start=2):
            try:
                d = dt.date.fromisoformat(row["date"])
                r = float(row["market_ret"])
            except (TypeError, ValueError) as exc:
                raise FormatError(f"{path}:{row_no}: {exc}") from None
            if d in series:
                raise InputError(f"{path}:{row_no}: duplicate date {d}")
            series[d] = r
    return series


def build_calendar(panel: BarPanel) -> TradingCalendar:
    """Trading calendar implied by the bar data itself."""
    return TradingCalendar(d for _, d in panel.by_key)


def market_return(day_bars: Sequence[DailyBar], prior_caps: Mapping[str, float]) -> float:
    """Value-weighted mean return across ``day_bars``.

    Weights are prior-day market caps normalized to sum to one; tickers
    without a positive prior cap do not enter the average.
    """
    weighted = 0.0
    total_cap = 0.0
    for bar in day_bars:
        cap = prior_caps.get(bar.ticker, 0.0)
        if cap > 0:
            weighted += cap * bar.total_return
            total_cap += cap
    if total_cap <= 0:
        raise InputError("no constituent has a positive prior-day market cap")
    return weighted / total_cap


def market_return_series(
    panel: BarPanel,
    calendar: TradingCalendar,
    external: Mapping[dt.date, float] | None = None,
) -> dict[dt.date, float]:
    """Market return for every trading day where it is defined.

    The first calendar date has no prior-day caps, so the computed
    series starts on the second date. When an external series is
    supplied it takes precedence wherever it has a value.
    """
    series: dict[dt.date, float] = {}
    for i in range(1, len(calendar.dates)):
        d = calendar.dates[i]
        prior_caps = panel.caps_on(calendar.dates[i - 1])
        day_bars = panel.by_date.get(d, [])
        if day_bars:
            series[d] = market_return(day_bars, prior_caps)
    if external:
        series.update(external)
    return dict(sorted(series.items()))


def event_trading_day(ts: dt.datetime, calendar: TradingCalendar) -> dt.date | None:
    """Map a publication timestamp to its event trading day.

    News published on a trading day before the 16:00 close belongs to
    that day; anything else (after the close, weekends, holidays) rolls
    to the next trading day. Returns None when no trading day remains.
    """
    d = ts.date()
    if d in calendar and ts.time() < AFTERNOON_CLOSE:
        return d
    return calendar.next_after(d)


def excess_return_window(
    panel: BarPanel,
    market_returns: Mapping[dt.date, float],
    calendar: TradingCalendar,
    ticker: str,
    event_date: dt.date,
    horizon: int = 3,
    compound: bool = False,
) -> float:
    """Aggregated excess return over ``horizon`` trading days from the event day.

    The default aggregation is the arithmetic sum of daily differences,
    sum(r_ticker - r_market) over days d0 .. d0+horizon-1, in decimal
    units. With ``compound=True`` both sides compound first and the
    difference of the compounded returns is taken instead. Any missing
    bar or market return inside the window raises ``MissingReturns``.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1 day")
    if event_date not in calendar:
        raise MissingReturns(f"{event_date} is not a trading day")
    stock: list[float] = []
    market: list[float] = []
    day: dt.date | None = event_date
    for _ in range(horizon):
        if day is None:
            raise MissingReturns(f"{ticker}: window from {event_date} runs past the calendar")
        bar = panel.get(ticker, day)
        if bar is None:
            raise MissingReturns(f"{ticker}: no bar on {day}")
        if day not in market_returns:
            raise MissingReturns(f"no market return on {day}")
        stock.append(bar.total_return)
        market.append(market_returns[day])
        day = calendar.next(day)
    if compound:
        stock_total = 1.0
        market_total = 1.0
        for r, m in zip(stock, market):
            stock_total *= 1.0 + r
            market_total *= 1.0 + m
        return (stock_total - 1.0) - (market_total - 1.0)
    return sum(r - m for r, m in zip(stock, market))


def assign_label(aggregated_excess: float) -> int:
    """1 when the aggregated excess return is strictly positive, else 0."""
    return 1 if aggregated_excess > 0 else 0


@dataclass(frozen=True)
class LabeledExample:
    """An article joined with its realized excess return and class label."""

    article_id: str
    ticker: str
    publication_date: dt.date
    event_date: dt.date
    aggregated_excess_return: float
    label: int


def label_articles(
    articles: Sequence[NewsArticle],
    panel: BarPanel,
    calendar: TradingCalendar,
    market_returns: Mapping[dt.date, float],
    horizon: int = 3,
    compound: bool = False,
) -> tuple[list[LabeledExample], int]:
    """Label every article whose full return window is observable.

    Articles whose event day cannot be resolved or whose window hits a
    missing bar are skipped; the second return value counts them.
    """
    examples: list[LabeledExample] = []
    skipped = 0
    for article in articles:
        event = event_trading_day(article.timestamp, calendar)
        if event is None:
            skipped += 1
            continue
        try:
            excess = excess_return_window(
                panel,
                market_returns,
                calendar,
                article.ticker,
                event,
                horizon=horizon,
                compound=compound,
            )
        except MissingReturns:
            skipped += 1
            continue
        examples.append(
            LabeledExample(
                article_id=article.article_id,
                ticker=article.ticker,
                publication_date=article.timestamp.date(),
                event_date=event,
                aggregated_excess_return=excess,
                label=assign_label(excess),
            )
        )
    return examples, skipped
