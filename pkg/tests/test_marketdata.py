"""Bars, calendar arithmetic, market returns, and excess-return labels."""

from __future__ import annotations

import datetime as dt
from fractions import Fraction

import pytest

from sentlab.errors import FormatError, InputError, MissingReturns
from sentlab.marketdata import (
    BarPanel,
    DailyBar,
    TradingCalendar,
    assign_label,
    build_calendar,
    event_trading_day,
    excess_return_window,
    label_articles,
    load_bars_csv,
    load_market_series_csv,
    market_return,
    market_return_series,
)

from conftest import DATES, article, make_bar, ts

MON, TUE, WED, THU, FRI, MON2, TUE2, WED2 = DATES


class TestDailyBarValidation:
    def test_rejects_non_positive_price(self):
        with pytest.raises(InputError, match="positive"):
            DailyBar("AAA", MON, open_price=0.0, close_price=10.0, total_return=0.0, market_cap=1.0)

    def test_rejects_total_loss(self):
        with pytest.raises(InputError, match="-100%"):
            DailyBar("AAA", MON, open_price=10.0, close_price=10.0, total_return=-1.0, market_cap=1.0)

    def test_rejects_negative_cap(self):
        with pytest.raises(InputError, match="market cap"):
            DailyBar("AAA", MON, open_price=10.0, close_price=10.0, total_return=0.0, market_cap=-5.0)


class TestTradingCalendar:
    def test_sorted_and_distinct(self):
        cal = TradingCalendar([WED, MON, TUE, MON])
        assert cal.dates == [MON, TUE, WED]

    def test_neighbors(self, small_calendar):
        assert small_calendar.next(MON) == TUE
        assert small_calendar.prev(TUE) == MON
        assert small_calendar.prev(MON) is None
        assert small_calendar.next(WED2) is None

    def test_next_after_skips_weekend(self, small_calendar):
        saturday = dt.date(2023, 1, 7)
        assert small_calendar.next_after(FRI) == MON2
        assert small_calendar.next_after(saturday) == MON2
        assert small_calendar.next_after(WED2) is None

    def test_next_on_or_after(self, small_calendar):
        assert small_calendar.next_on_or_after(FRI) == FRI
        assert small_calendar.next_on_or_after(dt.date(2023, 1, 7)) == MON2

    def test_shift(self, small_calendar):
        assert small_calendar.shift(MON, 2) == WED
        assert small_calendar.shift(WED, -2) == MON
        assert small_calendar.shift(WED2, 1) is None

    def test_index_rejects_non_trading_day(self, small_calendar):
        with pytest.raises(KeyError):
            small_calendar.index(dt.date(2023, 1, 7))

    def test_empty_calendar_rejected(self):
        with pytest.raises(InputError):
            TradingCalendar([])


class TestBarPanel:
    def test_duplicate_bar_rejected(self):
        bar = make_bar("AAA", MON, 100.0, 0.0, 1.0)
        with pytest.raises(InputError, match="duplicate bar"):
            BarPanel([bar, bar])

    def test_by_date_sorted_by_ticker(self, small_bars):
        assert [b.ticker for b in small_bars.by_date[MON]] == ["AAA", "BBB", "CCC"]

    def test_calendar_from_panel(self, small_bars):
        assert build_calendar(small_bars).dates == DATES


class TestMarketReturn:
    def test_two_to_one_weighting(self):
        # Caps 2:1 with returns 3% and 0% average to exactly 2%.
        bars = [make_bar("X", TUE, 100.0, 0.03, 9.0), make_bar("Y", TUE, 100.0, 0.0, 9.0)]
        got = market_return(bars, {"X": 2e9, "Y": 1e9})
        assert got == pytest.approx(0.02, abs=1e-15)

    def test_zero_cap_ticker_excluded(self):
        bars = [make_bar("X", TUE, 100.0, 0.03, 9.0), make_bar("Y", TUE, 100.0, -0.5, 9.0)]
        assert market_return(bars, {"X": 1e9, "Y": 0.0}) == pytest.approx(0.03)

    def test_no_positive_caps_raises(self):
        bars = [make_bar("X", TUE, 100.0, 0.03, 9.0)]
        with pytest.raises(InputError, match="positive prior-day market cap"):
            market_return(bars, {"X": 0.0})

    def test_fixture_day_matches_fraction_oracle(self, small_bars):
        # Exact rational recomputation of the Tuesday market return.
        rets = {"AAA": Fraction(2, 100), "BBB": Fraction(-1, 100), "CCC": Fraction(1, 200)}
        caps = {"AAA": 200, "BBB": 100, "CCC": 50}
        expected = sum(caps[t] * rets[t] for t in rets) / sum(caps.values())
        got = market_return(small_bars.by_date[TUE], small_bars.caps_on(MON))
        assert got == pytest.approx(float(expected), abs=1e-15)


class TestMarketReturnSeries:
    def test_starts_on_second_date(self, small_bars, small_calendar):
        series = market_return_series(small_bars, small_calendar)
        assert sorted(series) == DATES[1:]

    def test_each_day_matches_direct_computation(self, small_bars, small_calendar):
        series = market_return_series(small_bars, small_calendar)
        for prior, day in zip(DATES, DATES[1:]):
            direct = market_return(small_bars.by_date[day], small_bars.caps_on(prior))
            assert series[day] == direct

    def test_external_series_takes_precedence(self, small_bars, small_calendar):
        series = market_return_series(small_bars, small_calendar, external={TUE: 0.123})
        assert series[TUE] == 0.123
        assert WED in series


class TestEventTradingDay:
    def test_morning_news_same_day(self, small_calendar):
        assert event_trading_day(ts(MON, 9, 30), small_calendar) == MON

    def test_just_before_close_same_day(self, small_calendar):
        assert event_trading_day(ts(MON, 15, 59), small_calendar) == MON

    def test_at_close_rolls_forward(self, small_calendar):
        assert event_trading_day(ts(MON, 16, 0), small_calendar) == TUE

    def test_friday_evening_rolls_to_monday(self, small_calendar):
        assert event_trading_day(ts(FRI, 17, 0), small_calendar) == MON2

    def test_weekend_ignores_time_of_day(self, small_calendar):
        saturday = dt.date(2023, 1, 7)
        assert event_trading_day(ts(saturday, 2, 0), small_calendar) == MON2
        assert event_trading_day(ts(saturday, 23, 0), small_calendar) == MON2

    def test_holiday_rolls_forward(self):
        cal = TradingCalendar([MON, TUE, THU, FRI])
        assert event_trading_day(ts(WED, 10, 0), cal) == THU

    def test_past_calendar_end_is_none(self, small_calendar):
        assert event_trading_day(ts(WED2, 16, 30), small_calendar) is None


def _example_window():
    """Three days of stock returns (1%, 2%, -1%) vs market (0.5%, 0%, 0.5%)."""
    days = [dt.date(2023, 2, 6), dt.date(2023, 2, 7), dt.date(2023, 2, 8)]
    stock = [0.01, 0.02, -0.01]
    market = [0.005, 0.0, 0.005]
    panel = BarPanel([make_bar("XYZ", d, 100.0, r, 1.0) for d, r in zip(days, stock)])
    return panel, dict(zip(days, market)), TradingCalendar(days), days


class TestExcessReturnWindow:
    def test_sum_of_daily_differences(self):
        panel, market, cal, days = _example_window()
        # (0.01-0.005) + (0.02-0.0) + (-0.01-0.005) = 0.01
        got = excess_return_window(panel, market, cal, "XYZ", days[0])
        assert got == pytest.approx(0.01, abs=1e-15)

    def test_compound_variant(self):
        panel, market, cal, days = _example_window()
        expected = (1.01 * 1.02 * 0.99 - 1.0) - (1.005 * 1.0 * 1.005 - 1.0)
        got = excess_return_window(panel, market, cal, "XYZ", days[0], compound=True)
        assert got == pytest.approx(expected, abs=1e-15)

    def test_horizon_one(self):
        panel, market, cal, days = _example_window()
        got = excess_return_window(panel, market, cal, "XYZ", days[0], horizon=1)
        assert got == pytest.approx(0.005, abs=1e-15)

    def test_window_past_calendar_end(self):
        panel, market, cal, days = _example_window()
        with pytest.raises(MissingReturns, match="past the calendar"):
            excess_return_window(panel, market, cal, "XYZ", days[1])

    def test_missing_bar_inside_window(self, small_calendar):
        bars = BarPanel([make_bar("AAA", TUE, 100.0, 0.01, 1.0), make_bar("AAA", THU, 100.0, 0.01, 1.0)])
        market = {d: 0.0 for d in DATES}
        with pytest.raises(MissingReturns, match="no bar"):
            excess_return_window(bars, market, small_calendar, "AAA", TUE)

    def test_missing_market_return(self):
        panel, market, cal, days = _example_window()
        del market[days[1]]
        with pytest.raises(MissingReturns, match="market return"):
            excess_return_window(panel, market, cal, "XYZ", days[0])

    def test_non_trading_event_date(self):
        panel, market, cal, days = _example_window()
        with pytest.raises(MissingReturns, match="not a trading day"):
            excess_return_window(panel, market, cal, "XYZ", dt.date(2023, 2, 5))

    def test_horizon_must_be_positive(self):
        panel, market, cal, days = _example_window()
        with pytest.raises(ValueError):
            excess_return_window(panel, market, cal, "XYZ", days[0], horizon=0)


class TestAssignLabel:
    def test_strictly_positive_is_one(self):
        assert assign_label(1e-15) == 1

    def test_zero_is_zero(self):
        assert assign_label(0.0) == 0

    def test_negative_is_zero(self):
        assert assign_label(-0.5) == 0


def _fixture_market(small_bars, small_calendar):
    return market_return_series(small_bars, small_calendar)


class TestLabelArticles:
    def test_labels_match_fraction_oracle(self, small_bars, small_calendar):
        # Exact rational bookkeeping for two Tuesday-event articles.
        rets = {
            "AAA": [Fraction(1, 100), Fraction(1, 50), Fraction(-1, 100), Fraction(1, 200),
                    Fraction(1, 100), Fraction(-1, 50), Fraction(3, 200), Fraction(0)],
            "BBB": [Fraction(0), Fraction(-1, 100), Fraction(3, 100), Fraction(1, 100),
                    Fraction(-1, 200), Fraction(1, 50), Fraction(-1, 100), Fraction(1, 100)],
            "CCC": [Fraction(1, 50), Fraction(1, 200), Fraction(0), Fraction(-1, 50),
                    Fraction(1, 100), Fraction(1, 100), Fraction(1, 200), Fraction(-1, 200)],
        }
        caps = {"AAA": 200, "BBB": 100, "CCC": 50}
        total = sum(caps.values())
        market = [sum(caps[t] * rets[t][i] for t in rets) / total for i in range(8)]

        def oracle(ticker: str, start: int) -> Fraction:
            return sum(rets[ticker][i] - market[i] for i in range(start, start + 3))

        articles = [
            article("b1", "BBB", ts(TUE, 9), "gains ahead"),
            article("c1", "CCC", ts(TUE, 10), "tough quarter"),
        ]
        examples, skipped = label_articles(
            articles, small_bars, small_calendar, _fixture_market(small_bars, small_calendar)
        )
        assert skipped == 0
        by_id = {e.article_id: e for e in examples}
        expected_b = oracle("BBB", 1)
        expected_c = oracle("CCC", 1)
        assert expected_b > 0 > expected_c
        assert by_id["b1"].aggregated_excess_return == pytest.approx(float(expected_b), abs=1e-12)
        assert by_id["c1"].aggregated_excess_return == pytest.approx(float(expected_c), abs=1e-12)
        assert by_id["b1"].label == 1
        assert by_id["c1"].label == 0
        assert by_id["b1"].event_date == TUE
        assert by_id["b1"].publication_date == TUE

    def test_article_after_close_gets_next_event_day(self, small_bars, small_calendar):
        arts = [article("a1", "AAA", ts(TUE, 16, 30), "after the bell")]
        examples, skipped = label_articles(
            arts, small_bars, small_calendar, _fixture_market(small_bars, small_calendar)
        )
        assert skipped == 0
        assert examples[0].event_date == WED
        assert examples[0].publication_date == TUE

    def test_unresolvable_and_truncated_windows_skipped(self, small_bars, small_calendar):
        arts = [
            article("a1", "AAA", ts(WED2, 17, 0), "past the end"),
            article("a2", "AAA", ts(TUE2, 9, 0), "window runs off"),
        ]
        examples, skipped = label_articles(
            arts, small_bars, small_calendar, _fixture_market(small_bars, small_calendar)
        )
        assert not examples
        assert skipped == 2


class TestCsvIO:
    def test_bars_round_trip(self, tmp_path):
        path = tmp_path / "bars.csv"
        path.write_text(
            "date,ticker,open,close,ret,market_cap\n"
            "2023-01-02,AAA,100.0,101.0,0.01,5000.0\n"
            "2023-01-03,AAA,101.0,100.5,-0.004950495049504955,5100.0\n"
        )
        panel = load_bars_csv(path)
        assert len(panel) == 2
        bar = panel.get("AAA", dt.date(2023, 1, 3))
        assert bar is not None
        assert bar.close_price == 100.5
        assert bar.total_return == -0.004950495049504955

    def test_bars_extra_columns_tolerated(self, tmp_path):
        path = tmp_path / "bars.csv"
        path.write_text(
            "date,ticker,open,close,ret,market_cap,volume\n"
            "2023-01-02,AAA,100.0,101.0,0.01,5000.0,123\n"
        )
        assert len(load_bars_csv(path)) == 1

    def test_bars_bad_header(self, tmp_path):
        path = tmp_path / "bars.csv"
        path.write_text("date,ticker,open,close\n2023-01-02,AAA,1,2\n")
        with pytest.raises(FormatError, match="header"):
            load_bars_csv(path)

    def test_bars_bad_value_reports_row(self, tmp_path):
        path = tmp_path / "bars.csv"
        path.write_text(
            "date,ticker,open,close,ret,market_cap\n"
            "2023-01-02,AAA,100.0,101.0,0.01,5000.0\n"
            "2023-01-03,AAA,oops,101.0,0.0,5000.0\n"
        )
        with pytest.raises(FormatError, match=":3"):
            load_bars_csv(path)

    def test_market_series_round_trip(self, tmp_path):
        path = tmp_path / "mkt.csv"
        path.write_text("date,market_ret\n2023-01-03,0.002\n2023-01-04,-0.001\n")
        series = load_market_series_csv(path)
        assert series == {dt.date(2023, 1, 3): 0.002, dt.date(2023, 1, 4): -0.001}

    def test_market_series_duplicate_date(self, tmp_path):
        path = tmp_path / "mkt.csv"
        path.write_text("date,market_ret\n2023-01-03,0.002\n2023-01-03,0.001\n")
        with pytest.raises(InputError, match="duplicate date"):
            load_market_series_csv(path)
