"""End-to-end orchestration of the research pipeline.

Stages: filter the news corpus, label articles by three-day excess
return, score them (lexicon and external models), evaluate the scores
as classifiers, run the panel regressions, and backtest long-short
portfolios. Every subcommand shares the same stage functions; a full
run writes every report plus a manifest hashing all inputs, and is
byte-for-byte reproducible given identical inputs and config.
"""

from __future__ import annotations

import datetime as dt
import itertools
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import backtest as bt
from . import classify, corpus, marketdata, panel, report, scoring
from .config import RunConfig
from .errors import InputError

logger = logging.getLogger(__name__)


@dataclass
class PipelineState:
    """Lazily populated shared state, so stages load inputs only once."""

    config: RunConfig
    articles: list[corpus.NewsArticle] | None = None
    funnel: corpus.CorpusFunnel | None = None
    bars: marketdata.BarPanel | None = None
    calendar: marketdata.TradingCalendar | None = None
    market_returns: dict[dt.date, float] | None = None
    labeled: list[marketdata.LabeledExample] | None = None
    n_label_skipped: int = 0
    scores: scoring.ScoreTable | None = None
    written: dict[str, Path] = field(default_factory=dict)

    @property
    def out_dir(self) -> Path:
        out = Path(self.config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        return out


def corpus_stage(state: PipelineState) -> PipelineState:
    if state.articles is not None:
        return state
    cfg = state.config
    cfg.require("news")
    raw = corpus.load_news_jsonl(cfg.news)
    kept, funnel = corpus.apply_filters(
        raw,
        window_days=cfg.novelty_window_days,
        threshold=cfg.similarity_threshold,
        same_ticker=cfg.novelty_scope == "ticker",
    )
    logger.info(
        "corpus funnel: %d all, %d single-stock, %d unique",
        funnel.all_news,
        funnel.single_stock_news,
        funnel.unique_news,
    )
    state.articles = kept
    state.funnel = funnel
    return state


def market_stage(state: PipelineState) -> PipelineState:
    if state.bars is not None:
        return state
    cfg = state.config
    cfg.require("bars")
    state.bars = marketdata.load_bars_csv(cfg.bars)
    state.calendar = marketdata.build_calendar(state.bars)
    external = (
        marketdata.load_market_series_csv(cfg.market_series)
        if cfg.market_series is not None
        else None
    )
    state.market_returns = marketdata.market_return_series(
        state.bars, state.calendar, external
    )
    logger.info(
        "loaded %d bars over %d trading days", len(state.bars), len(state.calendar)
    )
    return state


def label_stage(state: PipelineState) -> PipelineState:
    if state.labeled is not None:
        return state
    corpus_stage(state)
    market_stage(state)
    cfg = state.config
    state.labeled, state.n_label_skipped = marketdata.label_articles(
        state.articles,
        state.bars,
        state.calendar,
        state.market_returns,
        horizon=cfg.horizon,
        compound=cfg.compound_excess,
    )
    logger.info(
        "labeled %d articles (%d skipped for missing returns)",
        len(state.labeled),
        state.n_label_skipped,
    )
    return state


def score_stage(state: PipelineState) -> PipelineState:
    if state.scores is not None:
        return state
    corpus_stage(state)
    cfg = state.config
    cfg.require_scoring_source()
    table = scoring.ScoreTable()
    kept_ids = {a.article_id for a in state.articles}
    if cfg.lexicon is not None:
        lexicon = scoring.load_lexicon(cfg.lexicon)
        table.extend(scoring.score_articles(state.articles, lexicon))
    if cfg.external_scores is not None:
        records, unknown = scoring.ingest_external_scores(cfg.external_scores, kept_ids)
        if unknown:
            logger.warning(
                "%d external score ids not in the filtered corpus (filtered out or unknown)",
                len(unknown),
            )
        table.extend(scoring.restrict_to_articles(records, kept_ids))
    if len(table) == 0:
        raise InputError("no scores produced: check lexicon/external_scores inputs")
    state.scores = table
    logger.info("score table: %d rows across models %s", len(table), table.models())
    return state


def write_funnel(state: PipelineState) -> Path:
    corpus_stage(state)
    path = report.write_json(state.out_dir / "funnel.json", state.funnel.as_dict())
    state.written["funnel"] = path
    return path


def write_labels(state: PipelineState) -> Path:
    label_stage(state)
    path = report.write_labels_csv(state.out_dir / "labels.csv", state.labeled)
    state.written["labels"] = path
    return path


def write_scores(state: PipelineState) -> Path:
    score_stage(state)
    path = state.out_dir / "scores.csv"
    state.scores.write_csv(path)
    state.written["scores"] = path
    return path


def evaluate_stage(state: PipelineState) -> dict[str, Any]:
    label_stage(state)
    score_stage(state)
    cfg = state.config
    labels = {ex.article_id: ex.label for ex in state.labeled}
    split = classify.split_dataset(
        labels,
        seed=cfg.seed,
        test_fraction=cfg.test_fraction,
        validation_fraction=cfg.validation_fraction,
    )
    models: dict[str, Any] = {}
    for model in state.scores.models():
        model_scores = state.scores.for_model(model)
        evaluated = sorted(i for i in split.test_ids if i in model_scores)
        if not evaluated:
            logger.warning("model %s has no scored test articles; skipping", model)
            continue
        cm, suite, n_eval = classify.evaluate_model(
            model_scores, labels, split.test_ids, cfg.classify_threshold
        )
        models[model] = {
            "confusion": cm.as_dict(),
            **suite.as_dict(),
            "n_evaluated": n_eval,
        }
    return {
        "threshold": cfg.classify_threshold,
        "split": {
            "seed": split.seed,
            "train": len(split.train_ids),
            "validation": len(split.validation_ids),
            "test": len(split.test_ids),
        },
        "models": models,
    }


def write_metrics(state: PipelineState) -> Path:
    path = report.write_json(state.out_dir / "metrics.json", evaluate_stage(state))
    state.written["metrics"] = path
    return path


def regression_suite(models: list[str]) -> list[list[str]]:
    """Single-regressor runs for every model, then all two-model pairs."""
    singles = [[m] for m in models]
    pairs = [list(pair) for pair in itertools.combinations(models, 2)]
    return singles + pairs


def regress_stage(state: PipelineState) -> dict[str, Any]:
    corpus_stage(state)
    market_stage(state)
    score_stage(state)
    cfg = state.config
    data = panel.assemble_panel(
        state.articles, state.scores, state.bars, state.calendar
    )
    logger.info(
        "panel: %d rows, %d firms, %d event days (%d rows dropped)",
        data.n_obs,
        len(data.firm_labels),
        len(data.date_labels),
        data.n_dropped_missing_return,
    )
    entries = []
    for selection in regression_suite(data.model_names):
        fit = panel.fit_two_way_fe(data, selection)
        panel.clustered_se(fit, small_sample=cfg.small_sample)
        stats = panel.fit_statistics(fit)
        entries.append(
            {
                "label": "+".join(selection),
                "regressors": selection,
                "n_obs": fit.n_obs,
                "n_firms": fit.n_firms,
                "n_dates": fit.n_dates,
                "coefficients": {
                    name: {
                        "estimate": float(fit.gamma[j]),
                        "se": float(fit.se_clustered[j]),
                        "t_stat": float(fit.t_stats[j]),
                    }
                    for j, name in enumerate(fit.model_names)
                },
                "fixed_effects": {"firm": True, "date": True},
                "stats": stats.as_dict(),
            }
        )
    return {
        "dependent": "next_day_return_pct",
        "clustering": ["firm", "date"],
        "small_sample_correction": cfg.small_sample,
        "n_rows": data.n_obs,
        "n_rows_dropped_missing_return": data.n_dropped_missing_return,
        "regressions": entries,
    }


def write_regression(state: PipelineState) -> Path:
    path = report.write_json(state.out_dir / "regression.json", regress_stage(state))
    state.written["regression"] = path
    return path


def backtest_stage(state: PipelineState) -> tuple[dict[str, Any], dict[str, dict]]:
    corpus_stage(state)
    market_stage(state)
    score_stage(state)
    cfg = state.config
    stats: dict[str, Any] = {
        "cost_bps": cfg.cost_bps,
        "cost_convention": cfg.cost_convention,
        "quantile_fraction": cfg.quantile_fraction,
        "annualization": cfg.annualization,
        "models": {},
        "benchmarks": {},
    }
    growth: dict[str, dict] = {}
    for model in state.scores.models():
        result = bt.portfolio_series(
            state.articles,
            state.scores.for_model(model),
            state.bars,
            state.calendar,
            model,
            fraction=cfg.quantile_fraction,
            cost_bps=cfg.cost_bps,
            cost_convention=cfg.cost_convention,
            date_range=cfg.date_range,
        )
        entry: dict[str, Any] = {}
        for side_name, series in (
            ("long", result.long),
            ("short", result.short),
            ("short_pnl", result.short_pnl),
            ("long_short", result.long_short),
        ):
            entry[side_name] = bt.build_report(series, cfg.annualization).as_dict()
        entry["n_skipped_legs"] = result.n_skipped_legs
        entry["n_unscheduled"] = result.n_unscheduled
        stats["models"][model] = entry
        growth[result.long_short.name] = bt.cumulative_growth(result.long_short)
        logger.info(
            "backtest %s: %d long-short days, sharpe %.2f",
            model,
            entry["long_short"]["n_days"],
            entry["long_short"]["sharpe"],
        )
    vw, ew = bt.benchmark_series(state.bars, state.calendar, cfg.date_range)
    for series in (vw, ew):
        stats["benchmarks"][series.name] = bt.build_report(
            series, cfg.annualization
        ).as_dict()
        growth[series.name] = bt.cumulative_growth(series)
    return stats, growth


def write_backtest(state: PipelineState) -> list[Path]:
    stats, growth = backtest_stage(state)
    out = state.out_dir
    paths = [
        report.write_json(out / "strategies.json", stats),
        report.write_cumulative_csv(out / "cumulative.csv", growth),
        report.render_cumulative_figure(out / "cumulative.png", growth),
    ]
    state.written["strategies"] = paths[0]
    state.written["cumulative_csv"] = paths[1]
    state.written["cumulative_png"] = paths[2]
    return paths


def write_manifest(state: PipelineState) -> Path:
    cfg = state.config
    recorded = cfg.as_dict()
    # The manifest describes the computation, not where it landed, so
    # identical runs into different directories stay byte-identical.
    del recorded["output_dir"]
    path = report.write_manifest(
        state.out_dir / "manifest.json",
        recorded,
        {
            "news": cfg.news,
            "bars": cfg.bars,
            "lexicon": cfg.lexicon,
            "external_scores": cfg.external_scores,
            "market_series": cfg.market_series,
        },
    )
    state.written["manifest"] = path
    return path


def run_pipeline(config: RunConfig) -> PipelineState:
    """Full run: every stage, every report, plus the manifest."""
    state = PipelineState(config=config)
    write_funnel(state)
    write_labels(state)
    write_scores(state)
    write_metrics(state)
    write_regression(state)
    write_backtest(state)
    write_manifest(state)
    logger.info("wrote %d report files to %s", len(state.written), state.out_dir)
    return state
