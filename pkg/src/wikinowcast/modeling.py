"""Correlation screening, no-intercept linear models, and the lag scan.

The model is deliberately plain: observed incidence is approximated as a
linear combination of the selected articles' normalized traffic with no
intercept and no other terms. Candidate articles are ranked by the absolute
Pearson correlation between their aligned interval series and the incidence
series; the ten strongest enter the fit.

A lag scan repeats the whole procedure, selection included, once per day
offset from -28 to +28 (57 models by default). Positive offsets shift article
traffic later, matching today's traffic against future incidence, so a peak
at a positive offset means the articles lead the official data and the model
forecasts; negative offsets mean the articles trail it.

Reported model quality r^2 is the squared Pearson correlation between fitted
and observed values. For models forced through the origin the usual
explained-variance ratio can go negative and depends on which mean you
remove; the squared fitted correlation stays in [0, 1] and measures exactly
what the reports show. All quality figures are in-sample.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from datetime import date

import numpy as np

from .errors import (
    DegenerateModelError,
    NoUsableCandidatesError,
    UndefinedCorrelationError,
)
from .store import DailySeries, IntervalSeries, align, shift_days
from .validation import as_float_matrix, as_float_vector, check_same_length

#: Fewest paired values for which a correlation is considered defined.
MIN_CORRELATION_POINTS = 3

#: Articles entering a fitted model.
DEFAULT_TOP_K = 10

#: Day offsets scanned by default: 57 models from 4 weeks back to 4 weeks out.
DEFAULT_OFFSETS = tuple(range(-28, 29))

#: |r| may exceed 1 by at most this much before clamping (rounding slack).
_R_CLAMP_SLACK = 1e-15


def pearson(x, y) -> float:
    """Sample Pearson correlation of two equal-length vectors.

    Needs at least MIN_CORRELATION_POINTS pairs and nonzero variance on both
    sides; otherwise raises UndefinedCorrelationError so callers can drop the
    pair instead of propagating a NaN. The result is clamped to [-1, 1] to
    absorb last-ulp rounding.
    """
    xv = as_float_vector(x, "x")
    yv = as_float_vector(y, "y")
    check_same_length(xv, yv)
    n = len(xv)
    if n < MIN_CORRELATION_POINTS:
        raise UndefinedCorrelationError(
            f"need at least {MIN_CORRELATION_POINTS} pairs, got {n}"
        )
    # checked before centering: the mean of n identical floats can land an
    # ulp off, leaving dx a tiny nonzero constant instead of exact zeros
    if np.all(xv == xv[0]) or np.all(yv == yv[0]):
        raise UndefinedCorrelationError("zero variance makes correlation undefined")
    dx = xv - xv.mean()
    dy = yv - yv.mean()
    sx = math.sqrt(float(np.dot(dx, dx)))
    sy = math.sqrt(float(np.dot(dy, dy)))
    if sx == 0.0 or sy == 0.0:
        raise UndefinedCorrelationError("zero variance makes correlation undefined")
    r = float(np.dot(dx, dy)) / (sx * sy)
    if r > 1.0:
        r = 1.0
    elif r < -1.0:
        r = -1.0
    return r


@dataclass(frozen=True)
class CorrelationResult:
    """Correlation of one candidate article with the incidence series."""

    title: str
    r: float
    n: int


def paired_values(candidate: IntervalSeries, incidence) -> tuple[np.ndarray, np.ndarray]:
    """Candidate and incidence values restricted to fully covered intervals."""
    mask = candidate.covered
    return candidate.values[mask], incidence.values[mask]


def correlate_candidates(
    candidates: dict[str, IntervalSeries], incidence
) -> list[CorrelationResult]:
    """Correlation for every candidate with a defined correlation.

    Candidates with too little overlap or constant values (dead articles,
    zero-variance traffic) are silently dropped; they carry no signal to rank.
    Results are sorted by decreasing |r|, ties by title.
    """
    results = []
    for title in sorted(candidates):
        xs, ys = paired_values(candidates[title], incidence)
        try:
            r = pearson(xs, ys)
        except UndefinedCorrelationError:
            continue
        results.append(CorrelationResult(title=title, r=r, n=len(xs)))
    results.sort(key=lambda c: (-abs(c.r), c.title))
    return results


def select_articles(
    candidates: dict[str, IntervalSeries], incidence, k: int = DEFAULT_TOP_K
) -> list[CorrelationResult]:
    """The top-k candidates by |r|, fewer if fewer are usable.

    Raises NoUsableCandidatesError when nothing survives screening (also the
    case when the incidence series itself is constant).
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    ranked = correlate_candidates(candidates, incidence)
    if not ranked:
        raise NoUsableCandidatesError(
            "no candidate article has a defined correlation with the incidence series"
        )
    return ranked[:k]


@dataclass(frozen=True)
class OlsFit:
    """Least-squares fit of y ~ X @ coef with no intercept."""

    coef: np.ndarray
    fitted: np.ndarray
    r_squared: float | None
    rank: int
    rank_deficient: bool
    degenerate: bool


def fit_ols(X, y) -> OlsFit:
    """No-intercept least squares with the reported r^2.

    Needs at least as many rows as columns; a rank-deficient design gets the
    minimum-norm solution and a warning rather than a failure. A constant
    target is an error (its correlation with anything is undefined). If the
    fitted values come out constant (target orthogonal to the design) the fit
    is returned flagged degenerate with r_squared None.
    """
    Xm = as_float_matrix(X, "X")
    yv = as_float_vector(y, "y")
    n, p = Xm.shape
    if len(yv) != n:
        raise ValueError(f"X has {n} rows but y has {len(yv)} values")
    if p < 1:
        raise ValueError("X must have at least one column")
    if n < p:
        raise ValueError(
            f"{n} intervals cannot determine {p} coefficients; select fewer articles"
        )
    if n < MIN_CORRELATION_POINTS:
        raise ValueError(f"need at least {MIN_CORRELATION_POINTS} intervals, got {n}")
    if np.all(yv == yv[0]):
        raise DegenerateModelError("constant target: fit quality is undefined")
    coef, _, rank, _ = np.linalg.lstsq(Xm, yv, rcond=None)
    rank_deficient = rank < p
    if rank_deficient:
        warnings.warn(
            f"design matrix rank {rank} < {p} columns; minimum-norm solution",
            stacklevel=2,
        )
    fitted = Xm @ coef
    try:
        r = pearson(fitted, yv)
    except UndefinedCorrelationError:
        return OlsFit(
            coef=coef, fitted=fitted, r_squared=None,
            rank=int(rank), rank_deficient=rank_deficient, degenerate=True,
        )
    return OlsFit(
        coef=coef, fitted=fitted, r_squared=r * r,
        rank=int(rank), rank_deficient=rank_deficient, degenerate=False,
    )


@dataclass(frozen=True)
class LagModel:
    """One fitted model at one day offset.

    correlations holds every candidate's r at this offset (not just the
    selected ten); transfer scoring reads them from the offset-0 model. A
    degenerate entry (nothing usable to fit) keeps the offset with
    r_squared None and empty selection.
    """

    offset: int
    titles: tuple[str, ...]
    coef: np.ndarray
    r_squared: float | None
    correlations: dict[str, float]
    n_intervals: int
    interval_starts: tuple[date, ...] = ()
    fitted: np.ndarray | None = None
    observed: np.ndarray | None = None
    rank_deficient: bool = False

    @property
    def degenerate(self) -> bool:
        return self.r_squared is None


@dataclass(frozen=True)
class LagScanResult:
    """All models of one scan, ordered by offset."""

    models: tuple[LagModel, ...]
    best_offset: int | None
    best_r_squared: float | None
    context: object | None = None

    def __len__(self) -> int:
        return len(self.models)

    def model_at(self, offset: int) -> LagModel:
        for m in self.models:
            if m.offset == offset:
                return m
        raise KeyError(f"offset {offset} not in scan")

    @property
    def offsets(self) -> tuple[int, ...]:
        return tuple(m.offset for m in self.models)


def fit_lag_model(
    daily_candidates: dict[str, DailySeries],
    incidence,
    offset: int,
    k: int = DEFAULT_TOP_K,
) -> LagModel:
    """Shift, align, re-select and fit one model at one offset."""
    aligned = {
        title: align(shift_days(series, offset), incidence)
        for title, series in daily_candidates.items()
    }
    ranked = correlate_candidates(aligned, incidence)
    correlations = {c.title: c.r for c in ranked}
    if not ranked:
        return LagModel(
            offset=offset, titles=(), coef=np.empty(0), r_squared=None,
            correlations={}, n_intervals=0,
        )
    selected = ranked[:k]
    titles = tuple(c.title for c in selected)
    # rows usable by every selected article; selection is per-candidate but
    # the fit needs a complete design matrix
    mask = np.ones(len(incidence.values), dtype=bool)
    for title in titles:
        mask &= aligned[title].covered
    n_rows = int(mask.sum())
    if n_rows < max(len(titles), MIN_CORRELATION_POINTS):
        return LagModel(
            offset=offset, titles=(), coef=np.empty(0), r_squared=None,
            correlations=correlations, n_intervals=n_rows,
        )
    X = np.column_stack([aligned[t].values[mask] for t in titles])
    y = incidence.values[mask]
    starts = tuple(s for s, keep in zip(incidence.interval_starts, mask) if keep)
    try:
        fit = fit_ols(X, y)
    except (DegenerateModelError, ValueError):
        return LagModel(
            offset=offset, titles=(), coef=np.empty(0), r_squared=None,
            correlations=correlations, n_intervals=n_rows,
        )
    return LagModel(
        offset=offset,
        titles=titles,
        coef=fit.coef,
        r_squared=fit.r_squared,
        correlations=correlations,
        n_intervals=n_rows,
        interval_starts=starts,
        fitted=fit.fitted,
        observed=y,
        rank_deficient=fit.rank_deficient,
    )


def pick_best(models) -> LagModel | None:
    """The winning model of a scan, or None when every entry is degenerate.

    Highest r^2 wins; exact ties go to the offset nearest zero, then to the
    positive one (prefer the forecast that claims no more lead than needed).
    """
    best = None
    for m in models:
        if m.r_squared is None:
            continue
        key = (m.r_squared, -abs(m.offset), m.offset)
        if best is None or key > best[0]:
            best = (key, m)
    return None if best is None else best[1]


def lag_scan(
    daily_candidates: dict[str, DailySeries],
    incidence,
    offsets=DEFAULT_OFFSETS,
    k: int = DEFAULT_TOP_K,
    context=None,
) -> LagScanResult:
    """One independently selected and fitted model per offset.

    Every offset gets an entry even when degenerate, so a scan over the
    default range always has 57 models.
    """
    offsets = tuple(int(o) for o in offsets)
    if not offsets:
        raise ValueError("no offsets to scan")
    if len(set(offsets)) != len(offsets):
        raise ValueError("duplicate offsets in scan range")
    models = tuple(
        fit_lag_model(daily_candidates, incidence, offset, k=k) for offset in offsets
    )
    best = pick_best(models)
    if best is None:
        return LagScanResult(models=models, best_offset=None, best_r_squared=None, context=context)
    return LagScanResult(
        models=models,
        best_offset=best.offset,
        best_r_squared=best.r_squared,
        context=context,
    )
