"""Two-way fixed-effects panel regression with double-clustered errors.

The model is

    r_{i,d+1} = a_i + b_d + gamma' x_{i,d} + e_{i,d}

where i indexes firms, d indexes event days, x holds one or more
sentiment scores, and the dependent variable is the firm's next-day
return in percent. The slope is estimated on data demeaned by
alternating firm and date projections (the within transformation
iterated to a fixed point), which is numerically identical to running
OLS with a full set of firm and date dummies but scales far better.
Standard errors cluster by firm and by date using the two-way
sandwich: V = V_firm + V_date - V_intersection, where the intersection
term reduces to the heteroskedasticity-robust estimator because each
(firm, date) cell holds a single observation.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import NewsArticle
from .errors import (
    CollinearityError,
    ConvergenceError,
    InputError,
    NumericalError,
)
from .marketdata import BarPanel, TradingCalendar, event_trading_day
from .scoring import ScoreTable

DEMEAN_TOL = 1e-10
MAX_SWEEPS = 10_000


@dataclass
class PanelData:
    """Regression-ready panel, one row per (firm, event day).

    ``x`` has one column per model in ``model_names``; cells where a
    model scored no article for that firm-day hold NaN and the fit
    drops such rows for the models it selects. ``y`` is the next-day
    return in percent.
    """

    firm_labels: list[str]
    date_labels: list[dt.date]
    firm_ids: np.ndarray
    date_ids: np.ndarray
    y: np.ndarray
    x: np.ndarray
    model_names: list[str]
    n_dropped_missing_return: int = 0

    def __post_init__(self) -> None:
        n = len(self.y)
        if not (len(self.firm_ids) == len(self.date_ids) == n == self.x.shape[0]):
            raise InputError("panel arrays must share their first dimension")
        cells = set(zip(self.firm_ids.tolist(), self.date_ids.tolist()))
        if len(cells) != n:
            raise InputError("duplicate (firm, date) cell in panel")

    @property
    def n_obs(self) -> int:
        return len(self.y)


@dataclass
class RegressionFit:
    """Everything the fit produced, including demeaned internals.

    The demeaned arrays and cluster ids stick around because the
    clustered covariance and the fit statistics both reuse them.
    """

    model_names: list[str]
    gamma: np.ndarray
    intercept: float
    firm_effects: dict[str, float]
    date_effects: dict[dt.date, float]
    residuals: np.ndarray
    firm_ids: np.ndarray
    date_ids: np.ndarray
    x_demeaned: np.ndarray
    y_demeaned: np.ndarray
    y_raw: np.ndarray
    n_obs: int
    n_firms: int
    n_dates: int
    n_sweeps: int
    se_clustered: np.ndarray | None = None
    t_stats: np.ndarray | None = None


@dataclass(frozen=True)
class FitStatistics:
    r2: float
    r2_adj: float | None
    r2_within: float
    r2_within_adj: float | None
    rmse: float
    aic: float
    bic: float
    n_params: int

    def as_dict(self) -> dict[str, float | None]:
        return {
            "r2": self.r2,
            "r2_adj": self.r2_adj,
            "r2_within": self.r2_within,
            "r2_within_adj": self.r2_within_adj,
            "rmse": self.rmse,
            "aic": self.aic,
            "bic": self.bic,
            "n_params": self.n_params,
        }


def assemble_panel(
    articles: Sequence[NewsArticle],
    scores: ScoreTable,
    bars: BarPanel,
    calendar: TradingCalendar,
    models: Sequence[str] | None = None,
) -> PanelData:
    """Aggregate article scores into firm-day rows with next-day returns.

    Multiple scores for the same model on the same firm-day average
    into one regressor value. Rows whose next trading day has no bar
    for the firm are dropped and counted.
    """
    model_names = sorted(models) if models is not None else scores.models()
    if not model_names:
        raise InputError("no score models available to build a panel")
    by_model = {m: scores.for_model(m) for m in model_names}
    # (ticker, event day) -> per-model list of scores
    groups: dict[tuple[str, dt.date], list[list[float]]] = {}
    for article in articles:
        event = event_trading_day(article.timestamp, calendar)
        if event is None:
            continue
        cell = groups.setdefault((article.ticker, event), [[] for _ in model_names])
        for j, model in enumerate(model_names):
            score = by_model[model].get(article.article_id)
            if score is not None:
                cell[j].append(score)
    firm_labels = sorted({ticker for ticker, _ in groups})
    date_labels = sorted({day for _, day in groups})
    firm_index = {t: i for i, t in enumerate(firm_labels)}
    date_index = {d: i for i, d in enumerate(date_labels)}
    firm_ids: list[int] = []
    date_ids: list[int] = []
    y: list[float] = []
    x_rows: list[list[float]] = []
    dropped = 0
    for (ticker, day) in sorted(groups):
        next_day = calendar.next(day)
        bar = bars.get(ticker, next_day) if next_day is not None else None
        if bar is None:
            dropped += 1
            continue
        per_model = groups[(ticker, day)]
        if not any(per_model):
            dropped += 1
            continue
        firm_ids.append(firm_index[ticker])
        date_ids.append(date_index[day])
        y.append(bar.total_return * 100.0)
        x_rows.append(
            [sum(vals) / len(vals) if vals else math.nan for vals in per_model]
        )
    if not y:
        raise InputError("panel is empty after dropping rows with missing returns")
    return PanelData(
        firm_labels=firm_labels,
        date_labels=date_labels,
        firm_ids=np.asarray(firm_ids, dtype=np.int64),
        date_ids=np.asarray(date_ids, dtype=np.int64),
        y=np.asarray(y, dtype=np.float64),
        x=np.asarray(x_rows, dtype=np.float64),
        model_names=model_names,
        n_dropped_missing_return=dropped,
    )


def _group_means(values: np.ndarray, ids: np.ndarray, n_groups: int) -> np.ndarray:
    """Column-wise group means; values is (n, k), result (n_groups, k)."""
    counts = np.bincount(ids, minlength=n_groups).astype(np.float64)
    sums = np.zeros((n_groups, values.shape[1]))
    np.add.at(sums, ids, values)
    return sums / counts[:, None]


def _alternate_demean(
    data: np.ndarray,
    firm_ids: np.ndarray,
    date_ids: np.ndarray,
    n_firms: int,
    n_dates: int,
    tol: float,
    max_sweeps: int,
) -> tuple[np.ndarray, int]:
    """Project out firm and date means by alternating sweeps.

    Stops once a full sweep moves no entry by more than ``tol``.
    """
    z = data.copy()
    for sweep in range(1, max_sweeps + 1):
        before = z.copy()
        z -= _group_means(z, firm_ids, n_firms)[firm_ids]
        z -= _group_means(z, date_ids, n_dates)[date_ids]
        delta = np.max(np.abs(z - before))
        if delta <= tol:
            return z, sweep
    raise ConvergenceError(
        f"demeaning did not reach {tol:g} within {max_sweeps} sweeps"
    )


def fit_two_way_fe(
    panel: PanelData,
    regressor_selection: Sequence[str] | None = None,
    tol: float = DEMEAN_TOL,
    max_sweeps: int = MAX_SWEEPS,
) -> RegressionFit:
    """Estimate the slope vector with firm and date effects removed.

    Rows missing any selected regressor are dropped first. After the
    alternating demeaning converges, the slopes come from OLS on the
    transformed data, and the fixed effects are recovered from the
    slope residuals under the normalization sum(a_i) = 0, sum(b_d) = 0
    with a global intercept absorbing the grand mean.
    """
    selection = list(regressor_selection) if regressor_selection is not None else list(panel.model_names)
    if not selection:
        raise InputError("regressor selection is empty")
    missing = [m for m in selection if m not in panel.model_names]
    if missing:
        raise InputError(f"unknown regressors requested: {missing}")
    cols = [panel.model_names.index(m) for m in selection]
    x_all = panel.x[:, cols]
    keep = ~np.isnan(x_all).any(axis=1)
    if not keep.any():
        raise InputError(f"no rows have complete scores for {selection}")
    x_raw = x_all[keep]
    y_raw = panel.y[keep]
    # Reindex clusters over the surviving rows so ids stay dense.
    firm_sub = panel.firm_ids[keep]
    date_sub = panel.date_ids[keep]
    firm_keys, firm_ids = np.unique(firm_sub, return_inverse=True)
    date_keys, date_ids = np.unique(date_sub, return_inverse=True)
    n_firms = len(firm_keys)
    n_dates = len(date_keys)
    n_obs = len(y_raw)
    k = len(cols)
    if n_obs <= k + 1:
        raise InputError(f"panel too small: {n_obs} rows for {k} regressors")

    stacked = np.column_stack([y_raw, x_raw])
    demeaned, sweeps = _alternate_demean(
        stacked, firm_ids, date_ids, n_firms, n_dates, tol, max_sweeps
    )
    y_dm = demeaned[:, 0]
    x_dm = demeaned[:, 1:]

    scale = np.max(np.abs(x_raw), axis=0)
    spread = np.max(np.abs(x_dm), axis=0)
    flat = spread <= 1e-12 * np.maximum(1.0, scale)
    if flat.any():
        names = [selection[j] for j in np.flatnonzero(flat)]
        raise CollinearityError(
            f"regressors constant within fixed effects: {names}"
        )
    xtx = x_dm.T @ x_dm
    if np.linalg.matrix_rank(xtx) < k:
        raise CollinearityError(f"collinear regressors after demeaning: {selection}")
    gamma = np.linalg.solve(xtx, x_dm.T @ y_dm)
    residuals = y_dm - x_dm @ gamma

    intercept, firm_fx, date_fx = _recover_effects(
        y_raw - x_raw @ gamma, firm_ids, date_ids, n_firms, n_dates, tol, max_sweeps
    )
    firm_names = [panel.firm_labels[i] for i in firm_keys]
    date_names = [panel.date_labels[i] for i in date_keys]
    return RegressionFit(
        model_names=selection,
        gamma=gamma,
        intercept=intercept,
        firm_effects=dict(zip(firm_names, firm_fx.tolist())),
        date_effects=dict(zip(date_names, date_fx.tolist())),
        residuals=residuals,
        firm_ids=firm_ids,
        date_ids=date_ids,
        x_demeaned=x_dm,
        y_demeaned=y_dm,
        y_raw=y_raw,
        n_obs=n_obs,
        n_firms=n_firms,
        n_dates=n_dates,
        n_sweeps=sweeps,
    )


def _recover_effects(
    slope_residual: np.ndarray,
    firm_ids: np.ndarray,
    date_ids: np.ndarray,
    n_firms: int,
    n_dates: int,
    tol: float,
    max_sweeps: int,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Additive decomposition of y - x gamma into mu + a_i + b_d.

    Alternates exact one-way updates until the effects stop moving,
    then shifts both sets to mean zero, folding the shifts into the
    intercept. The normalization uses the simple mean over distinct
    firms and distinct dates.
    """
    mu = float(slope_residual.mean())
    centered = slope_residual - mu
    col = centered[:, None]
    a = np.zeros(n_firms)
    b = np.zeros(n_dates)
    for _ in range(max_sweeps):
        a_new = _group_means(col - b[date_ids][:, None], firm_ids, n_firms)[:, 0]
        b_new = _group_means(col - a_new[firm_ids][:, None], date_ids, n_dates)[:, 0]
        delta = max(np.max(np.abs(a_new - a)), np.max(np.abs(b_new - b)))
        a, b = a_new, b_new
        if delta <= tol:
            break
    else:
        raise ConvergenceError("fixed-effect recovery did not converge")
    mu += float(a.mean()) + float(b.mean())
    return mu, a - a.mean(), b - b.mean()


def clustered_se(
    fit: RegressionFit,
    clusters: tuple[str, ...] = ("firm", "date"),
    small_sample: bool = False,
) -> np.ndarray:
    """Cluster-robust standard errors for the slope estimates.

    With both dimensions requested this is the two-way estimator
    V = V_firm + V_date - V_white, where each V term is a sandwich
    A M A with A = (X'X)^-1 on the demeaned regressors and M the sum of
    outer products of cluster-summed scores. The subtracted term uses
    per-observation clusters, which is exactly the White estimator here
    because every (firm, date) cell has one row. Passing a single
    dimension gives one-way clustering; an empty tuple gives plain
    heteroskedasticity-robust errors.

    No small-sample correction is applied by default. With
    ``small_sample=True`` every cluster term is scaled by G/(G-1) for
    its own cluster count (N/(N-1) for the White term).

    The two-way difference can produce a negative diagonal; that raises
    ``NumericalError`` naming the offending coefficient. All-zero
    residuals legitimately give all-zero standard errors.

    Updates ``fit.se_clustered`` and ``fit.t_stats`` and returns the
    standard errors.
    """
    unknown = set(clusters) - {"firm", "date"}
    if unknown:
        raise ValueError(f"unknown cluster dimensions: {sorted(unknown)}")
    x = fit.x_demeaned
    eps = fit.residuals
    bread = np.linalg.inv(x.T @ x)
    scores = x * eps[:, None]

    def cluster_meat(ids: np.ndarray, n_groups: int) -> tuple[np.ndarray, int]:
        sums = np.zeros((n_groups, x.shape[1]))
        np.add.at(sums, ids, scores)
        return sums.T @ sums, n_groups

    def correction(g: int) -> float:
        if not small_sample:
            return 1.0
        if g < 2:
            raise NumericalError("small-sample correction needs at least 2 clusters")
        return g / (g - 1.0)

    cov = np.zeros((x.shape[1], x.shape[1]))
    if clusters:
        if "firm" in clusters:
            meat, g = cluster_meat(fit.firm_ids, fit.n_firms)
            cov += correction(g) * bread @ meat @ bread
        if "date" in clusters:
            meat, g = cluster_meat(fit.date_ids, fit.n_dates)
            cov += correction(g) * bread @ meat @ bread
        if len(clusters) == 2:
            white_meat = scores.T @ scores
            cov -= correction(fit.n_obs) * bread @ white_meat @ bread
    else:
        white_meat = scores.T @ scores
        cov = correction(fit.n_obs) * bread @ white_meat @ bread

    diag = np.diag(cov).copy()
    bad = diag < 0
    if bad.any():
        name = fit.model_names[int(np.flatnonzero(bad)[0])]
        raise NumericalError(
            f"clustered variance for {name!r} is negative; "
            "the two-way difference is not positive semidefinite here"
        )
    se = np.sqrt(diag)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_stats = np.where(se > 0, fit.gamma / se, np.nan)
    fit.se_clustered = se
    fit.t_stats = t_stats
    return se


def fit_statistics(fit: RegressionFit) -> FitStatistics:
    """Goodness-of-fit summary for a fitted panel regression.

    R-squared compares residuals against raw variation around the
    grand mean; the within version compares against the demeaned
    variation, isolating what the slopes explain beyond the fixed
    effects. The parameter count k = slopes + (n_firms - 1) +
    (n_dates - 1) + 1 enters the adjusted versions and the information
    criteria, which use the Gaussian concentrated log-likelihood form
    N log(SSR/N) plus the usual penalty. A perfect fit sends both
    criteria to -inf; adjusted values are None when N <= k.
    """
    n = fit.n_obs
    ssr = float(fit.residuals @ fit.residuals)
    sst = float(np.sum((fit.y_raw - fit.y_raw.mean()) ** 2))
    if sst <= 0:
        raise NumericalError("dependent variable has no variation")
    centered = fit.y_demeaned - fit.y_demeaned.mean()
    sst_within = float(centered @ centered)
    if sst_within <= 0:
        raise NumericalError("dependent variable has no within variation")
    k = len(fit.gamma) + (fit.n_firms - 1) + (fit.n_dates - 1) + 1
    r2 = 1.0 - ssr / sst
    r2_within = 1.0 - ssr / sst_within
    if n > k:
        dof_ratio = (n - 1) / (n - k)
        r2_adj = 1.0 - (1.0 - r2) * dof_ratio
        r2_within_adj = 1.0 - (1.0 - r2_within) * dof_ratio
    else:
        r2_adj = None
        r2_within_adj = None
    rmse = math.sqrt(ssr / n)
    if ssr > 0:
        aic = n * math.log(ssr / n) + 2 * k
        bic = n * math.log(ssr / n) + k * math.log(n)
    else:
        aic = float("-inf")
        bic = float("-inf")
    return FitStatistics(
        r2=r2,
        r2_adj=r2_adj,
        r2_within=r2_within,
        r2_within_adj=r2_within_adj,
        rmse=rmse,
        aic=aic,
        bic=bic,
        n_params=k,
    )
