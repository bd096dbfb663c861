"""Report files: JSON summaries, the cumulative-growth CSV and figure,
and the run manifest.

Outputs are byte-deterministic: dict keys are written in a deliberate
fixed order, floats use Python's shortest round-trip repr, and the
manifest records content hashes rather than timestamps. Non-finite
floats (a perfect fit's information criteria, for instance) become
JSON null.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import json
import math
from pathlib import Path
from typing import Any, Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

FIGURE_DPI = 150


def _clean(obj: Any) -> Any:
    """Replace non-finite floats with None so the JSON stays standard."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def write_json(path: str | Path, payload: Mapping[str, Any]) -> Path:
    path = Path(path)
    path.write_text(
        json.dumps(_clean(dict(payload)), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    return path


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(
    path: str | Path,
    config: Mapping[str, Any],
    input_paths: Mapping[str, str | None],
) -> Path:
    """Record the config, seed, and a hash of every input file."""
    hashes = {
        name: sha256_file(p) for name, p in sorted(input_paths.items()) if p is not None
    }
    return write_json(
        path,
        {
            "seed": config.get("seed"),
            "config": dict(config),
            "input_sha256": hashes,
        },
    )


def write_cumulative_csv(
    path: str | Path,
    paths_by_strategy: Mapping[str, Mapping[dt.date, float]],
) -> Path:
    """Plot-ready long-form table: date,strategy,value."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write("date,strategy,value\n")
        for strategy in sorted(paths_by_strategy):
            series = paths_by_strategy[strategy]
            for day in sorted(series):
                handle.write(f"{day.isoformat()},{strategy},{series[day]!r}\n")
    return path


def render_cumulative_figure(
    path: str | Path,
    paths_by_strategy: Mapping[str, Mapping[dt.date, float]],
    title: str = "Growth of one unit of capital",
) -> Path:
    """Line chart of every strategy's cumulative value path."""
    fig, ax = plt.subplots(figsize=(9.0, 5.0))
    for strategy in sorted(paths_by_strategy):
        series = paths_by_strategy[strategy]
        days = sorted(series)
        ax.plot(days, [series[d] for d in days], label=strategy, linewidth=1.2)
    ax.set_title(title)
    ax.set_ylabel("Portfolio value")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="upper left", fontsize=8)
    fig.autofmt_xdate()
    fig.tight_layout()
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)
    return Path(path)


def write_labels_csv(path: str | Path, labeled: Sequence[Any]) -> Path:
    """Event-day labels: one row per labeled article."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write("article_id,ticker,publication_date,event_date,aggregated_excess_return,label\n")
        for ex in sorted(labeled, key=lambda e: e.article_id):
            handle.write(
                f"{ex.article_id},{ex.ticker},{ex.publication_date.isoformat()},"
                f"{ex.event_date.isoformat()},{ex.aggregated_excess_return!r},{ex.label}\n"
            )
    return path
