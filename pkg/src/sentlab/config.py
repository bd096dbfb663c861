"""Run configuration: defaults, file parsing, and validation.

Config files are flat ``key = value`` lines; blank lines and lines
starting with ``#`` are ignored. Values given on the command line win
over the file, and the ``SENTLAB_OUTPUT_DIR`` environment variable
overrides the output directory from the file (an explicit CLI flag
still wins). Defaults follow the published study: a 20-day novelty
window at 0.8 cosine similarity, 20% score quantiles, and 10 basis
points of round-trip cost per leg.
"""

from __future__ import annotations

import datetime as dt
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigError

OUTPUT_DIR_ENV = "SENTLAB_OUTPUT_DIR"


@dataclass
class RunConfig:
    news: str | None = None
    bars: str | None = None
    lexicon: str | None = None
    external_scores: str | None = None
    market_series: str | None = None
    output_dir: str = "out"
    novelty_window_days: float = 20.0
    similarity_threshold: float = 0.8
    novelty_scope: str = "ticker"
    quantile_fraction: float = 0.2
    cost_bps: float = 10.0
    cost_convention: str = "round_trip"
    test_fraction: float = 0.2
    validation_fraction: float = 0.2
    seed: int = 42
    start_date: dt.date | None = None
    end_date: dt.date | None = None
    classify_threshold: float = 0.5
    horizon: int = 3
    compound_excess: bool = False
    small_sample: bool = False
    annualization: float = 252.0

    def validate(self) -> None:
        if not 0.0 < self.similarity_threshold <= 1.0:
            raise ConfigError("similarity_threshold must lie in (0, 1]")
        if not 0.0 < self.classify_threshold <= 1.0:
            raise ConfigError("classify_threshold must lie in (0, 1]")
        if not 0.0 < self.quantile_fraction <= 0.5:
            raise ConfigError("quantile_fraction must lie in (0, 0.5]")
        if self.cost_bps < 0:
            raise ConfigError("cost_bps must be non-negative")
        if self.novelty_window_days < 0:
            raise ConfigError("novelty_window_days must be non-negative")
        if self.novelty_scope not in ("ticker", "corpus"):
            raise ConfigError("novelty_scope must be 'ticker' or 'corpus'")
        if self.cost_convention not in ("round_trip", "per_side"):
            raise ConfigError("cost_convention must be 'round_trip' or 'per_side'")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError("test_fraction must lie in (0, 1)")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ConfigError("validation_fraction must lie in [0, 1)")
        if self.horizon < 1:
            raise ConfigError("horizon must be at least 1")
        if self.annualization <= 0:
            raise ConfigError("annualization must be positive")
        if (
            self.start_date is not None
            and self.end_date is not None
            and self.start_date > self.end_date
        ):
            raise ConfigError("start_date is after end_date")

    def require(self, *names: str) -> None:
        """Fail with a clear message when needed input paths are unset."""
        for name in names:
            if getattr(self, name) is None:
                raise ConfigError(f"missing required path: {name}")

    def require_scoring_source(self) -> None:
        if self.lexicon is None and self.external_scores is None:
            raise ConfigError(
                "scoring needs a lexicon path, an external_scores path, or both"
            )

    def as_dict(self) -> dict[str, Any]:
        """JSON-ready view with dates rendered as ISO strings."""
        out: dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, dt.date):
                value = value.isoformat()
            out[f.name] = value
        return out

    @property
    def date_range(self) -> tuple[dt.date | None, dt.date | None]:
        return (self.start_date, self.end_date)


_BOOL_VALUES = {
    "true": True,
    "false": False,
    "yes": True,
    "no": False,
    "1": True,
    "0": False,
}


def _convert(name: str, raw: str, target: type) -> Any:
    try:
        if target is bool:
            return _BOOL_VALUES[raw.lower()]
        if target is int:
            return int(raw)
        if target is float:
            return float(raw)
        if target is dt.date:
            return dt.date.fromisoformat(raw)
        return raw
    except (KeyError, ValueError):
        raise ConfigError(f"bad value for {name}: {raw!r}") from None


_FIELD_TYPES: dict[str, type] = {
    "news": str,
    "bars": str,
    "lexicon": str,
    "external_scores": str,
    "market_series": str,
    "output_dir": str,
    "novelty_window_days": float,
    "similarity_threshold": float,
    "novelty_scope": str,
    "quantile_fraction": float,
    "cost_bps": float,
    "cost_convention": str,
    "test_fraction": float,
    "validation_fraction": float,
    "seed": int,
    "start_date": dt.date,
    "end_date": dt.date,
    "classify_threshold": float,
    "horizon": int,
    "compound_excess": bool,
    "small_sample": bool,
    "annualization": float,
}


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Read ``key = value`` lines, rejecting unknown keys and bad syntax."""
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{line_no}: expected 'key = value'")
            key, _, raw = stripped.partition("=")
            key = key.strip()
            if key not in _FIELD_TYPES:
                raise ConfigError(f"{path}:{line_no}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"{path}:{line_no}: duplicate key {key!r}")
            values[key] = raw.strip()
    return values


def build_config(
    file_values: Mapping[str, str] | None = None,
    overrides: Mapping[str, Any] | None = None,
    env: Mapping[str, str] | None = None,
) -> RunConfig:
    """Merge defaults, config file, environment, and CLI overrides.

    Precedence from weakest to strongest: defaults, file, environment
    (output dir only), explicit overrides.
    """
    config = RunConfig()
    if file_values:
        for key, raw in file_values.items():
            setattr(config, key, _convert(key, raw, _FIELD_TYPES[key]))
    env = os.environ if env is None else env
    if env.get(OUTPUT_DIR_ENV):
        config.output_dir = env[OUTPUT_DIR_ENV]
    if overrides:
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in _FIELD_TYPES:
                raise ConfigError(f"unknown config field {key!r}")
            setattr(config, key, value)
    config.validate()
    return config
