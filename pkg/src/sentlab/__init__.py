"""News-sentiment research engine.

Filters a news corpus for single-stock, novel articles, labels them by
three-day excess returns, scores them with a word-list lexicon or
externally supplied model scores, evaluates the scores as classifiers,
estimates two-way fixed-effects panel regressions with double-clustered
standard errors, and backtests daily long-short quantile portfolios.
All stages are deterministic given inputs, config, and seed.
"""

__version__ = "0.1.0"

from .corpus import (
    CorpusFunnel,
    NewsArticle,
    TermVector,
    cosine_similarity,
    novelty_filter,
    single_stock_filter,
    tokenize,
)
from .marketdata import (
    BarPanel,
    DailyBar,
    TradingCalendar,
    assign_label,
    excess_return_window,
    market_return,
)
from .scoring import ScoreRecord, ScoreTable, SentimentLexicon, lexicon_score, load_lexicon
from .classify import ConfusionMatrix, MetricSuite, confusion, metric_suite, split_dataset
from .panel import PanelData, RegressionFit, assemble_panel, clustered_se, fit_two_way_fe
from .backtest import (
    StrategyReport,
    StrategySeries,
    cumulative_growth,
    max_drawdown,
    select_quantiles,
    sharpe,
)
from .config import RunConfig
from .synth import SyntheticSpec, generate_synthetic

__all__ = [
    "__version__",
    "BarPanel",
    "ConfusionMatrix",
    "CorpusFunnel",
    "DailyBar",
    "MetricSuite",
    "NewsArticle",
    "PanelData",
    "RegressionFit",
    "RunConfig",
    "ScoreRecord",
    "ScoreTable",
    "SentimentLexicon",
    "StrategyReport",
    "StrategySeries",
    "SyntheticSpec",
    "TermVector",
    "TradingCalendar",
    "assemble_panel",
    "assign_label",
    "clustered_se",
    "confusion",
    "cosine_similarity",
    "cumulative_growth",
    "excess_return_window",
    "fit_two_way_fe",
    "generate_synthetic",
    "lexicon_score",
    "load_lexicon",
    "market_return",
    "max_drawdown",
    "metric_suite",
    "novelty_filter",
    "select_quantiles",
    "sharpe",
    "single_stock_filter",
    "split_dataset",
    "tokenize",
]
