"""Pearson, Spearman and KDI correlation coefficients.

The KDI coefficient is Pearson's formula applied to each variable's own KDI
transform, in the same way Spearman's is Pearson's formula applied to ranks.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from .core import Column, as_column, fit
from .fast_eval import EvalPlan
from .kernels import KernelSpec


@dataclass(frozen=True)
class CorrelationReport:
    pair: tuple[str, str]
    pearson: float
    spearman: float
    kdi: float
    alpha: float
    n: int
    bootstrap_sd: tuple[float, float, float] | None = None
    n_boot: int = 0

    @property
    def undefined(self) -> bool:
        return any(np.isnan(v) for v in (self.pearson, self.spearman, self.kdi))

    def row(self) -> dict:
        sd = self.bootstrap_sd or (float("nan"),) * 3
        return {
            "x": self.pair[0],
            "y": self.pair[1],
            "n": self.n,
            "alpha": self.alpha,
            "pearson": self.pearson,
            "spearman": self.spearman,
            "kdi": self.kdi,
            "sd_pearson": sd[0],
            "sd_spearman": sd[1],
            "sd_kdi": sd[2],
            "n_boot": self.n_boot,
            "undefined": int(self.undefined),
        }


def _pair(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d arrays of equal length")
    if x.size < 2:
        raise ValueError("correlation needs at least 2 paired samples")
    return x, y


def pearson(x, y) -> float:
    """Product-moment correlation. Constant input gives NaN with a RuntimeWarning."""
    x, y = _pair(x, y)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        warnings.warn("correlation undefined for a constant variable", RuntimeWarning, stacklevel=2)
        return float("nan")
    r = float(dx @ dy) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


def midranks(x) -> np.ndarray:
    """1-based ranks with ties given their average rank."""
    x = np.asarray(x, dtype=np.float64)
    s = np.sort(x)
    return 0.5 * (np.searchsorted(s, x, side="left") + np.searchsorted(s, x, side="right") + 1)


def spearman(x, y) -> float:
    x, y = _pair(x, y)
    return pearson(midranks(x), midranks(y))


def kdi_scores(x, alpha: float = 1.0, kernel: KernelSpec | None = None,
               plan: EvalPlan | None = None) -> np.ndarray:
    """KDI transform of ``x`` fitted on ``x`` itself; constant input maps to 0.5."""
    col = x if isinstance(x, Column) else Column("x", x)
    return fit(col, alpha, kernel, plan).transform(col.values)


def kdi_corr(x, y, alpha: float = 1.0, kernel: KernelSpec | None = None,
             plan: EvalPlan | None = None) -> float:
    x, y = _pair(x, y)
    return pearson(kdi_scores(x, alpha, kernel, plan), kdi_scores(y, alpha, kernel, plan))


def general_gamma(scores_x, scores_y) -> float:
    """Pairwise-difference coefficient ``sum a_ij b_ij / sqrt(sum a^2 sum b^2)``.

    O(N^2); meant as a cross-check, not for large N.
    """
    r, s = _pair(scores_x, scores_y)
    a = r[None, :] - r[:, None]
    b = s[None, :] - s[:, None]
    den = np.sqrt(float((a * a).sum()) * float((b * b).sum()))
    if den == 0.0:
        return float("nan")
    return float((a * b).sum() / den)


def _three(x, y, alpha, kernel, plan):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return pearson(x, y), spearman(x, y), kdi_corr(x, y, alpha, kernel, plan)


def bootstrap_sd(x, y, alpha: float = 1.0, n_boot: int = 100, seed=0,
                 kernel: KernelSpec | None = None, plan: EvalPlan | None = None):
    """SDs of (pearson, spearman, kdi) over ``n_boot`` resamples, refitting KDI each time.

    Resample ``i`` uses child ``i`` of ``SeedSequence(seed)``, so results do not
    depend on evaluation order. Returns None when ``n_boot == 0``.
    """
    if n_boot < 0:
        raise ValueError("n_boot must be >= 0")
    if n_boot == 0:
        return None
    x, y = _pair(x, y)
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = ss.spawn(n_boot)
    vals = np.empty((n_boot, 3))
    for i, child in enumerate(children):
        idx = np.random.default_rng(child).integers(0, x.size, x.size)
        vals[i] = _three(x[idx], y[idx], alpha, kernel, plan)
    return tuple(float(v) for v in np.nanstd(vals, axis=0, ddof=1))


def correlate(x, y, alpha: float = 1.0, n_boot: int = 0, seed=0,
              kernel: KernelSpec | None = None, plan: EvalPlan | None = None,
              names=("x", "y")) -> CorrelationReport:
    cx, cy = as_column(x, names[0]), as_column(y, names[1])
    xv, yv = _pair(cx.values, cy.values)
    p, s, k = _three(xv, yv, alpha, kernel, plan)
    sd = bootstrap_sd(xv, yv, alpha, n_boot, seed, kernel, plan) if n_boot else None
    return CorrelationReport((cx.name, cy.name), p, s, k, float(alpha), xv.size, sd, n_boot)


def correlation_table(columns: dict, alpha: float = 1.0, n_boot: int = 0, seed=0,
                      kernel: KernelSpec | None = None, plan: EvalPlan | None = None,
                      pairs=None) -> list[CorrelationReport]:
    """Reports for every unordered column pair, in column order.

    Each pair's bootstrap seed is derived from ``(seed, i, j)`` so any pair can
    be recomputed on its own.
    """
    names = list(columns)
    pairs = pairs or list(itertools.combinations(range(len(names)), 2))
    out = []
    for i, j in pairs:
        ss = np.random.SeedSequence([seed, i, j]) if n_boot else seed
        out.append(correlate(columns[names[i]], columns[names[j]], alpha, n_boot, ss,
                             kernel, plan, names=(names[i], names[j])))
    return out


def disagreement_table(reports, top: int | None = None):
    """Pairs sorted by |kdi - pearson| and by |kdi - spearman| (largest first)."""
    ok = [r for r in reports if not r.undefined]
    by_p = sorted(ok, key=lambda r: -abs(r.kdi - r.pearson))
    by_s = sorted(ok, key=lambda r: -abs(r.kdi - r.spearman))
    if top is not None:
        by_p, by_s = by_p[:top], by_s[:top]
    return by_p, by_s
