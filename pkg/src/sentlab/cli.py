"""Command-line interface.

Subcommands map one-to-one onto pipeline stages; ``run`` executes all
of them and ``synth`` writes a seeded synthetic dataset to experiment
on. Exit codes: 0 on success, 1 for input or configuration problems,
2 for numerical failures inside the estimators.
"""

from __future__ import annotations

import argparse
import datetime as dt
import logging
import sys
from typing import Any, Sequence

from . import __version__, pipeline
from .config import RunConfig, build_config, parse_config_file
from .errors import InputError, NumericsError
from .pipeline import PipelineState
from .synth import SyntheticSpec, generate_synthetic, write_synthetic

logger = logging.getLogger(__name__)


def _date(raw: str) -> dt.date:
    return dt.date.fromisoformat(raw)


def _add_config_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", metavar="FILE", help="flat key=value config file")
    sub.add_argument("--news", help="news JSONL path")
    sub.add_argument("--bars", help="daily bars CSV path")
    sub.add_argument("--lexicon", help="sentiment word list CSV path")
    sub.add_argument("--scores", dest="external_scores", help="external model scores CSV path")
    sub.add_argument("--market", dest="market_series", help="external market return series CSV")
    sub.add_argument("--out", dest="output_dir", help="output directory")
    sub.add_argument("--novelty-window", dest="novelty_window_days", type=float,
                     help="duplicate lookback in calendar days")
    sub.add_argument("--similarity-threshold", dest="similarity_threshold", type=float,
                     help="cosine similarity at or above which an article is a duplicate")
    sub.add_argument("--novelty-scope", dest="novelty_scope", choices=["ticker", "corpus"],
                     help="compare against same-ticker news only, or the whole corpus")
    sub.add_argument("--quantile", dest="quantile_fraction", type=float,
                     help="fraction of names in each book")
    sub.add_argument("--cost-bps", dest="cost_bps", type=float,
                     help="transaction cost in basis points")
    sub.add_argument("--cost-convention", dest="cost_convention",
                     choices=["round_trip", "per_side"])
    sub.add_argument("--test-fraction", dest="test_fraction", type=float)
    sub.add_argument("--validation-fraction", dest="validation_fraction", type=float)
    sub.add_argument("--seed", type=int, help="split shuffling seed")
    sub.add_argument("--start-date", dest="start_date", type=_date,
                     help="backtest window start (inclusive)")
    sub.add_argument("--end-date", dest="end_date", type=_date,
                     help="backtest window end (inclusive)")
    sub.add_argument("--classify-threshold", dest="classify_threshold", type=float,
                     help="score above which the prediction is positive")
    sub.add_argument("--horizon", type=int, help="excess-return window length in trading days")
    sub.add_argument("--compound-excess", dest="compound_excess", action="store_const",
                     const=True, help="compound the return window instead of summing")
    sub.add_argument("--small-sample", dest="small_sample", action="store_const",
                     const=True, help="apply G/(G-1) cluster corrections")
    sub.add_argument("--annualization", type=float, help="periods per year for the Sharpe ratio")


_CONFIG_FIELDS = [
    "news", "bars", "lexicon", "external_scores", "market_series", "output_dir",
    "novelty_window_days", "similarity_threshold", "novelty_scope",
    "quantile_fraction", "cost_bps", "cost_convention", "test_fraction",
    "validation_fraction", "seed", "start_date", "end_date",
    "classify_threshold", "horizon", "compound_excess", "small_sample",
    "annualization",
]


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    file_values = parse_config_file(args.config) if args.config else None
    overrides: dict[str, Any] = {
        name: getattr(args, name)
        for name in _CONFIG_FIELDS
        if getattr(args, name, None) is not None
    }
    return build_config(file_values, overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sentlab",
        description="News-sentiment research pipeline: filter, label, score, "
        "evaluate, regress, and backtest.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    specs = {
        "filter": "run the corpus filters and write funnel.json",
        "label": "label articles by three-day excess return (labels.csv)",
        "score": "build the combined score table (scores.csv)",
        "evaluate": "classification metrics on the test split (metrics.json)",
        "regress": "panel regressions with clustered errors (regression.json)",
        "backtest": "long-short backtest (strategies.json, cumulative.csv/.png)",
        "run": "all stages plus manifest.json",
    }
    for name, desc in specs.items():
        sub = commands.add_parser(name, help=desc)
        _add_config_options(sub)

    synth = commands.add_parser("synth", help="write a seeded synthetic dataset")
    synth.add_argument("--out", dest="output_dir", default="synth_data")
    synth.add_argument("--firms", type=int, default=SyntheticSpec.n_firms)
    synth.add_argument("--days", type=int, default=SyntheticSpec.n_dates)
    synth.add_argument("--rate", type=float, default=SyntheticSpec.articles_per_day,
                       help="mean articles per day")
    synth.add_argument("--gamma", type=float, default=SyntheticSpec.planted_gamma,
                       help="planted slope on the sentiment score (percent units)")
    synth.add_argument("--sigma", type=float, default=SyntheticSpec.noise_sigma,
                       help="noise around the planted relation (percent units)")
    synth.add_argument("--dup-rate", type=float, default=SyntheticSpec.duplicate_rate,
                       help="share of articles republished as near-term duplicates")
    synth.add_argument("--multi-rate", type=float, default=SyntheticSpec.multi_mention_rate,
                       help="share of articles mentioning a second ticker")
    synth.add_argument("--seed", type=int, default=SyntheticSpec.seed)
    synth.add_argument("--start", type=_date, default=SyntheticSpec.start_date,
                       help="first calendar date (weekends skipped)")
    return parser


def _run_command(args: argparse.Namespace) -> int:
    if args.command == "synth":
        spec = SyntheticSpec(
            n_firms=args.firms,
            n_dates=args.days,
            articles_per_day=args.rate,
            planted_gamma=args.gamma,
            noise_sigma=args.sigma,
            duplicate_rate=args.dup_rate,
            multi_mention_rate=args.multi_rate,
            seed=args.seed,
            start_date=args.start,
        )
        paths = write_synthetic(generate_synthetic(spec), args.output_dir)
        for name, path in sorted(paths.items()):
            print(f"{name}: {path}")
        return 0

    config = _config_from_args(args)
    state = PipelineState(config=config)
    if args.command == "filter":
        pipeline.write_funnel(state)
    elif args.command == "label":
        pipeline.write_labels(state)
    elif args.command == "score":
        pipeline.write_scores(state)
    elif args.command == "evaluate":
        pipeline.write_metrics(state)
    elif args.command == "regress":
        pipeline.write_regression(state)
    elif args.command == "backtest":
        pipeline.write_backtest(state)
    elif args.command == "run":
        state = pipeline.run_pipeline(config)
    for name, path in sorted(state.written.items()):
        print(f"{name}: {path}")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _run_command(args)
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (InputError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
