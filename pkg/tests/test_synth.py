"""Synthetic data generator: determinism, planted signal, oracle scores."""

from __future__ import annotations

import datetime as dt
import hashlib

import numpy as np
import pytest

from sentlab.corpus import apply_filters, load_news_jsonl, novelty_filter
from sentlab.errors import InputError
from sentlab.marketdata import (
    excess_return_window,
    event_trading_day,
    load_bars_csv,
    market_return_series,
)
from sentlab.panel import assemble_panel, clustered_se, fit_two_way_fe
from sentlab.scoring import ScoreTable, ingest_external_scores, load_lexicon
from sentlab.synth import (
    NEGATIVE_WORDS,
    ORACLE_MODEL,
    PLANTED_MODEL,
    POSITIVE_WORDS,
    SyntheticSpec,
    TIMEZONE,
    generate_synthetic,
    write_synthetic,
)


class TestSpecValidation:
    def test_rate_bounds(self):
        with pytest.raises(InputError):
            SyntheticSpec(duplicate_rate=1.5)
        with pytest.raises(InputError):
            SyntheticSpec(multi_mention_rate=-0.1)

    def test_minimum_shape(self):
        with pytest.raises(InputError):
            SyntheticSpec(n_firms=0)
        with pytest.raises(InputError):
            SyntheticSpec(n_dates=1)


class TestDeterminism:
    def test_same_spec_same_data(self, synth_small):
        again = generate_synthetic(synth_small.spec)
        assert again.articles == synth_small.articles
        assert again.scores == synth_small.scores
        assert again.bars.by_key == synth_small.bars.by_key
        assert again.duplicate_ids == synth_small.duplicate_ids

    def test_different_seed_different_data(self, synth_small):
        spec = SyntheticSpec(
            n_firms=synth_small.spec.n_firms,
            n_dates=synth_small.spec.n_dates,
            articles_per_day=synth_small.spec.articles_per_day,
            seed=synth_small.spec.seed + 1,
        )
        other = generate_synthetic(spec)
        assert other.articles != synth_small.articles


class TestShapes:
    def test_bar_grid_is_complete(self, synth_small):
        spec = synth_small.spec
        assert len(synth_small.bars) == spec.n_firms * spec.n_dates
        assert len(synth_small.calendar) == spec.n_dates

    def test_calendar_is_weekdays_from_start(self, synth_small):
        dates = synth_small.calendar.dates
        assert dates[0] == synth_small.spec.start_date
        assert all(d.weekday() < 5 for d in dates)
        assert dates == sorted(dates)

    def test_tickers_are_distinct_triples(self, synth_small):
        tickers = synth_small.tickers
        assert tickers[:3] == ["AAA", "AAB", "AAC"]
        assert len(set(tickers)) == len(tickers) == synth_small.spec.n_firms

    def test_articles_sorted_with_local_timestamps(self, synth_small):
        arts = synth_small.articles
        keys = [(a.timestamp, a.article_id) for a in arts]
        assert keys == sorted(keys)
        assert all(a.timestamp.tzinfo == TIMEZONE for a in arts)

    def test_some_multi_mention_articles(self, synth_small):
        multi = [a for a in synth_small.articles if len(a.tickers_mentioned) > 1]
        assert multi  # rate 0.1 over hundreds of draws
        assert all(a.ticker in a.tickers_mentioned for a in multi)

    def test_opens_carry_prior_close(self, synth_small):
        cal = synth_small.calendar
        for ticker in synth_small.tickers[:5]:
            for day in cal.dates[1:10]:
                bar = synth_small.bars.get(ticker, day)
                prev = synth_small.bars.get(ticker, cal.prev(day))
                assert bar.open_price == prev.close_price
                assert bar.close_price / bar.open_price - 1.0 == pytest.approx(
                    bar.total_return, rel=1e-12, abs=1e-15
                )


class TestPlantedSignal:
    def test_exact_recovery_without_noise(self):
        # noise_sigma 0 makes the pinned relation exact, so the panel
        # fit must return the planted slope to solver precision.
        spec = SyntheticSpec(
            n_firms=15,
            n_dates=60,
            articles_per_day=6.0,
            planted_gamma=0.25,
            noise_sigma=0.0,
            duplicate_rate=0.0,
            multi_mention_rate=0.0,
            seed=3,
        )
        data = generate_synthetic(spec)
        table = ScoreTable(data.scores)
        panel = assemble_panel(
            data.articles, table, data.bars, data.calendar, models=[PLANTED_MODEL]
        )
        fit = fit_two_way_fe(panel)
        assert fit.gamma[0] == pytest.approx(0.25, abs=1e-6)
        assert np.abs(fit.residuals).max() < 1e-6

    def test_noisy_recovery_within_clustered_band(self):
        spec = SyntheticSpec(
            n_firms=25,
            n_dates=120,
            articles_per_day=10.0,
            planted_gamma=0.25,
            noise_sigma=0.1,
            duplicate_rate=0.0,
            multi_mention_rate=0.0,
            seed=11,
        )
        data = generate_synthetic(spec)
        table = ScoreTable(data.scores)
        panel = assemble_panel(
            data.articles, table, data.bars, data.calendar, models=[PLANTED_MODEL]
        )
        fit = fit_two_way_fe(panel)
        se = clustered_se(fit)
        assert abs(fit.gamma[0] - 0.25) <= 3.0 * se[0]


class TestOracleScores:
    def test_oracle_marks_sign_of_three_day_excess(self, synth_small):
        by_id = {a.article_id: a for a in synth_small.articles}
        market = market_return_series(synth_small.bars, synth_small.calendar)
        oracle = {
            r.article_id: r.score for r in synth_small.scores if r.model_name == ORACLE_MODEL
        }
        checked = 0
        for article_id, value in sorted(oracle.items())[:300]:
            art = by_id[article_id]
            event = event_trading_day(art.timestamp, synth_small.calendar)
            excess = excess_return_window(
                synth_small.bars, market, synth_small.calendar, art.ticker, event
            )
            if abs(excess) < 1e-12:
                continue  # sign too close to call across float routes
            assert value == (1.0 if excess > 0 else 0.0)
            checked += 1
        assert checked > 100

    def test_oracle_missing_only_at_edges(self, synth_small):
        spec = synth_small.spec
        cal = synth_small.calendar
        idx = {d: i for i, d in enumerate(cal.dates)}
        oracle_ids = {
            r.article_id for r in synth_small.scores if r.model_name == ORACLE_MODEL
        }
        for art in synth_small.articles:
            event = event_trading_day(art.timestamp, cal)
            in_range = event is not None and 1 <= idx[event] <= spec.n_dates - 3
            assert (art.article_id in oracle_ids) == in_range

    def test_every_article_has_a_planted_score(self, synth_small):
        planted = {
            r.article_id for r in synth_small.scores if r.model_name == PLANTED_MODEL
        }
        assert planted == {a.article_id for a in synth_small.articles}


class TestDuplicates:
    def test_duplicates_copy_text_within_five_days(self, synth_small):
        by_text: dict[str, list] = {}
        for art in synth_small.articles:
            by_text.setdefault(art.text, []).append(art)
        assert synth_small.duplicate_ids
        for dup_id in synth_small.duplicate_ids:
            dup = next(a for a in synth_small.articles if a.article_id == dup_id)
            originals = [
                a
                for a in by_text[dup.text]
                if a.article_id != dup_id and a.timestamp < dup.timestamp
            ]
            assert originals
            delta = dup.timestamp - max(a.timestamp for a in originals)
            assert dt.timedelta(0) < delta <= dt.timedelta(days=5)

    def test_duplicates_inherit_planted_score(self, synth_small):
        planted = {
            r.article_id: r.score
            for r in synth_small.scores
            if r.model_name == PLANTED_MODEL
        }
        by_text: dict[str, set[float]] = {}
        for art in synth_small.articles:
            by_text.setdefault(art.text, set()).add(planted[art.article_id])
        for dup_id in synth_small.duplicate_ids:
            dup = next(a for a in synth_small.articles if a.article_id == dup_id)
            assert len(by_text[dup.text]) == 1

    def test_novelty_filter_removes_injected_duplicates(self, synth_small):
        kept, funnel = apply_filters(synth_small.articles)
        kept_ids = {a.article_id for a in kept}
        assert not kept_ids & synth_small.duplicate_ids
        assert funnel.unique_news < funnel.single_stock_news

    def test_rate_zero_injects_nothing(self):
        spec = SyntheticSpec(n_firms=5, n_dates=20, articles_per_day=4.0, duplicate_rate=0.0, seed=2)
        data = generate_synthetic(spec)
        assert data.duplicate_ids == set()
        kept, excluded = novelty_filter(
            sorted(
                (a for a in data.articles if len(a.tickers_mentioned) == 1),
                key=lambda a: (a.timestamp, a.article_id),
            )
        )
        # Random 18-filler texts are essentially never 80% similar.
        assert not excluded


class TestWriteSynthetic:
    def test_round_trip_and_byte_stability(self, synth_small, tmp_path):
        first = tmp_path / "one"
        second = tmp_path / "two"
        paths1 = write_synthetic(synth_small, first)
        paths2 = write_synthetic(generate_synthetic(synth_small.spec), second)
        for key in paths1:
            h1 = hashlib.sha256(paths1[key].read_bytes()).hexdigest()
            h2 = hashlib.sha256(paths2[key].read_bytes()).hexdigest()
            assert h1 == h2, f"{key} differs between identical runs"

        articles = load_news_jsonl(paths1["news"])
        assert articles == synth_small.articles
        bars = load_bars_csv(paths1["bars"])
        assert bars.by_key == synth_small.bars.by_key
        records, _ = ingest_external_scores(paths1["scores"])
        assert sorted(records, key=lambda r: (r.article_id, r.model_name)) == sorted(
            synth_small.scores, key=lambda r: (r.article_id, r.model_name)
        )

    def test_lexicon_matches_generator_vocabulary(self, synth_small, tmp_path):
        paths = write_synthetic(synth_small, tmp_path / "out")
        lex = load_lexicon(paths["lexicon"])
        assert lex.positive == set(POSITIVE_WORDS)
        assert lex.negative == set(NEGATIVE_WORDS)
