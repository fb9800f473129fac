"""Evaluation of the KDE cumulative distribution at many query points.

Three strategies share one reference-grid representation:

``exact``
    No grid: the KDE CDF is evaluated at every query. For the Gaussian this is
    the direct O(N*M) sum used as the precision oracle.
``grid``
    The same Gaussian sum, but only at ``R`` equally spaced reference
    positions; test points are linearly interpolated.
``dp``
    Poly-exponential kernel evaluated with a single merge pass over sorted
    samples and sorted queries. For each monomial degree ``m`` the pass keeps

        L_m(x) = sum_{X_n <= x} u_n^m exp(-u_n),   u_n = (x - X_n) / h

    and advances it from ``x`` to ``x + d*h`` with the binomial recurrence

        L_m <- exp(-d) * sum_{j<=m} C(m, j) d^(m-j) L_j.

    A mirrored right-to-left pass gives the sums over ``X_n > x``. All factors
    are <= 1 times non-negative sums, so no rescaling is needed for wide gaps.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy.special import ndtr

from .kernels import KernelFamily, KernelSpec

R_MAX = 1000
# max elements of one (queries x samples) block in the exact sum
_BLOCK = 1 << 22


class Strategy(str, enum.Enum):
    EXACT = "exact"
    GRID = "grid"
    DP = "dp"


@dataclass(frozen=True)
class EvalPlan:
    strategy: Strategy = Strategy.DP
    grid_size: int = R_MAX

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        if self.grid_size < 2:
            raise ValueError(f"grid_size must be >= 2, got {self.grid_size}")

    def effective_size(self, n: int) -> int:
        return max(2, min(self.grid_size, n))


@dataclass(frozen=True, eq=False)
class Grid:
    """Reference positions (increasing) and their KDI values (non-decreasing, 0 to 1)."""

    positions: np.ndarray
    values: np.ndarray

    def __len__(self):
        return len(self.positions)


def _check_samples(samples, h):
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 1 or samples.size == 0:
        raise ValueError("samples must be a non-empty 1-d array")
    if not (h > 0 and math.isfinite(h)):
        raise ValueError(f"bandwidth must be positive and finite, got {h}")
    return samples


def _check_sorted(a, what):
    if a.size > 1 and np.any(a[1:] < a[:-1]):
        raise ValueError(f"{what} must be sorted ascending")


def kde_cdf_exact(samples, h: float, queries) -> np.ndarray:
    """Gaussian KDE CDF, ``mean_n Phi((q - X_n) / h)``, by direct summation."""
    samples = _check_samples(samples, h)
    queries = np.asarray(queries, dtype=np.float64)
    flat = queries.ravel()
    out = np.empty(flat.shape)
    step = max(1, _BLOCK // samples.size)
    for s in range(0, flat.size, step):
        q = flat[s : s + step]
        out[s : s + step] = ndtr((q[:, None] - samples[None, :]) / h).mean(axis=1)
    return out.reshape(queries.shape)


@numba.njit(cache=True)
def _shift(acc, d, binom, powers):
    # advance running sums by d >= 0 bandwidths
    if d == 0.0:
        return
    e = math.exp(-d)
    K1 = acc.shape[0]
    if e == 0.0:
        for m in range(K1):
            acc[m] = 0.0
        return
    powers[0] = 1.0
    for p in range(1, K1):
        powers[p] = powers[p - 1] * d
    for m in range(K1 - 1, -1, -1):
        s = 0.0
        for j in range(m + 1):
            s += binom[m, j] * powers[m - j] * acc[j]
        acc[m] = e * s


@numba.njit(cache=True)
def _polyexp_dp(samples, queries, h, gam, binom):
    N = samples.shape[0]
    M = queries.shape[0]
    K1 = gam.shape[0]
    acc = np.zeros(K1)
    powers = np.empty(K1)
    out = np.zeros(M)

    # left sums: samples <= q contribute 1 - tail(u)
    i = 0
    pos = min(samples[0], queries[0]) if M > 0 else 0.0
    for j in range(M):
        q = queries[j]
        while i < N and samples[i] <= q:
            _shift(acc, (samples[i] - pos) / h, binom, powers)
            pos = samples[i]
            acc[0] += 1.0
            i += 1
        _shift(acc, (q - pos) / h, binom, powers)
        pos = q
        t = 0.0
        for m in range(K1):
            t += gam[m] * acc[m]
        out[j] = i - t

    # right sums: samples > q contribute tail(u)
    for m in range(K1):
        acc[m] = 0.0
    i = N - 1
    pos = max(samples[N - 1], queries[M - 1]) if M > 0 else 0.0
    for j in range(M - 1, -1, -1):
        q = queries[j]
        while i >= 0 and samples[i] > q:
            _shift(acc, (pos - samples[i]) / h, binom, powers)
            pos = samples[i]
            acc[0] += 1.0
            i -= 1
        _shift(acc, (pos - q) / h, binom, powers)
        pos = q
        t = 0.0
        for m in range(K1):
            t += gam[m] * acc[m]
        out[j] += t

    for j in range(M):
        out[j] /= N
    return out


def _binomials(K1):
    b = np.zeros((K1, K1))
    for m in range(K1):
        for j in range(m + 1):
            b[m, j] = math.comb(m, j)
    return b


def kde_cdf_polyexp(samples, h: float, queries, kernel: KernelSpec | None = None) -> np.ndarray:
    """Poly-exp KDE CDF at sorted ``queries`` in O((N + M) K^2) after sorting.

    ``h`` is the scale of the unit kernel, i.e. each bump is ``k((x - X_n)/h)/h``.
    """
    kernel = kernel or KernelSpec.polyexp()
    if kernel.family is not KernelFamily.POLYEXP:
        raise ValueError("kde_cdf_polyexp needs a polyexp kernel")
    samples = _check_samples(samples, h)
    queries = np.ascontiguousarray(queries, dtype=np.float64)
    if queries.ndim != 1:
        raise ValueError("queries must be 1-d")
    if not (np.all(np.isfinite(samples)) and np.all(np.isfinite(queries))):
        raise ValueError("samples and queries must be finite")
    _check_sorted(samples, "samples")
    _check_sorted(queries, "queries")
    if queries.size == 0:
        return np.empty(0)
    gam = np.ascontiguousarray(kernel.tail_coefficients)
    return _polyexp_dp(np.ascontiguousarray(samples), queries, float(h), gam, _binomials(gam.size))


def kde_cdf(samples, h: float, queries, kernel: KernelSpec) -> np.ndarray:
    """KDE CDF for unsorted samples and queries: direct sum for gaussian, sorted pass for polyexp."""
    if kernel.family is KernelFamily.GAUSSIAN:
        return kde_cdf_exact(samples, h, queries)
    samples = np.sort(np.asarray(samples, dtype=np.float64))
    q = np.asarray(queries, dtype=np.float64)
    order = np.argsort(q.ravel(), kind="stable")
    out = np.empty(q.size)
    out[order] = kde_cdf_polyexp(samples, h, q.ravel()[order], kernel)
    return out.reshape(q.shape)


def normalize_kdi(cdf_at_queries, cdf_lo, cdf_hi):
    """Map KDE CDF values to ``P(X_(1), x) / P(X_(1), X_(N))``."""
    return (cdf_at_queries - cdf_lo) / (cdf_hi - cdf_lo)


def build_reference_grid(samples, h: float, plan: EvalPlan, kernel: KernelSpec) -> Grid:
    """Normalized KDI values at ``R`` positions equally spaced over the sample range."""
    samples = _check_samples(samples, h)
    lo, hi = float(samples[0]), float(samples[-1])
    if not hi > lo:
        raise ValueError("samples have zero span")
    R = plan.effective_size(samples.size)
    pos = np.linspace(lo, hi, R)
    pos[0], pos[-1] = lo, hi
    cdf = kde_cdf(samples, h, pos, kernel)
    vals = normalize_kdi(cdf, cdf[0], cdf[-1])
    # rounding can leave ~1e-16 wiggles; the KDI itself is monotone
    vals = np.clip(np.maximum.accumulate(vals), 0.0, 1.0)
    vals[0], vals[-1] = 0.0, 1.0
    return Grid(pos, vals)


def interp_eval(grid: Grid, queries) -> np.ndarray:
    """Piecewise-linear lookup, clamped to 0 below and 1 above the grid."""
    q = np.asarray(queries, dtype=np.float64)
    return np.interp(q, grid.positions, grid.values, left=0.0, right=1.0)
