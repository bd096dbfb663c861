"""Shared fixtures: a tiny handcrafted market and a seeded synthetic set."""

from __future__ import annotations

import datetime as dt

import numpy as np
import pytest

from sentlab.corpus import NewsArticle
from sentlab.marketdata import BarPanel, DailyBar, TradingCalendar
from sentlab.panel import PanelData
from sentlab.synth import SyntheticSpec, generate_synthetic

TZ = dt.timezone(dt.timedelta(hours=-5))


def ts(day: dt.date, hour: int, minute: int = 0) -> dt.datetime:
    return dt.datetime.combine(day, dt.time(hour, minute), TZ)


def article(
    article_id: str,
    ticker: str,
    when: dt.datetime,
    text: str,
    mentioned: set[str] | None = None,
) -> NewsArticle:
    return NewsArticle(
        article_id=article_id,
        ticker=ticker,
        timestamp=when,
        text=text,
        tickers_mentioned=frozenset(mentioned or {ticker}),
    )


# Eight consecutive weekdays: Mon 2023-01-02 .. Wed 2023-01-11.
DATES = [
    dt.date(2023, 1, 2),
    dt.date(2023, 1, 3),
    dt.date(2023, 1, 4),
    dt.date(2023, 1, 5),
    dt.date(2023, 1, 6),
    dt.date(2023, 1, 9),
    dt.date(2023, 1, 10),
    dt.date(2023, 1, 11),
]


def panel_from_arrays(
    y: np.ndarray, x: np.ndarray, firm_ids: np.ndarray, date_ids: np.ndarray
) -> PanelData:
    """Wrap raw arrays with generated firm and date labels."""
    n_firms = int(firm_ids.max()) + 1
    n_dates = int(date_ids.max()) + 1
    return PanelData(
        firm_labels=[f"F{i:03d}" for i in range(n_firms)],
        date_labels=[dt.date(2020, 1, 1) + dt.timedelta(days=int(i)) for i in range(n_dates)],
        firm_ids=firm_ids,
        date_ids=date_ids,
        y=y,
        x=x,
        model_names=[f"m{j}" for j in range(x.shape[1])],
    )


def make_bar(ticker: str, day: dt.date, close: float, ret: float, cap: float) -> DailyBar:
    return DailyBar(
        ticker=ticker,
        date=day,
        open_price=close / (1.0 + ret),
        close_price=close,
        total_return=ret,
        market_cap=cap,
    )


@pytest.fixture(scope="session")
def small_calendar() -> TradingCalendar:
    return TradingCalendar(DATES)


@pytest.fixture(scope="session")
def small_bars() -> BarPanel:
    """Three tickers over eight days with fixed returns and caps."""
    returns = {
        "AAA": [0.01, 0.02, -0.01, 0.005, 0.01, -0.02, 0.015, 0.0],
        "BBB": [0.0, -0.01, 0.03, 0.01, -0.005, 0.02, -0.01, 0.01],
        "CCC": [0.02, 0.005, 0.0, -0.02, 0.01, 0.01, 0.005, -0.005],
    }
    caps = {"AAA": 200.0, "BBB": 100.0, "CCC": 50.0}
    bars = []
    for ticker, rets in returns.items():
        close = 100.0
        for day, r in zip(DATES, rets):
            close *= 1.0 + r
            bars.append(make_bar(ticker, day, close, r, caps[ticker]))
    return BarPanel(bars)


@pytest.fixture(scope="session")
def synth_small():
    """A compact generated dataset reused across test modules."""
    spec = SyntheticSpec(
        n_firms=20,
        n_dates=60,
        articles_per_day=8.0,
        planted_gamma=0.25,
        noise_sigma=0.1,
        duplicate_rate=0.1,
        multi_mention_rate=0.1,
        seed=7,
    )
    return generate_synthetic(spec)
