"""Univariate clustering at the valleys of a KDE.

``cluster_kdi`` first maps the data through the KDI transform, which pulls
sparse regions together, then looks for local minima of a Scott's-rule
Gaussian KDE of the transformed values. ``cluster_raw_kde`` skips the
transform and is kept as an ablation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import as_column, fit
from .fast_eval import EvalPlan
from .kernels import KernelFamily, KernelSpec, kernel_pdf

DEFAULT_GRID_POINTS = 1024


class Method(str, enum.Enum):
    KDI = "kdi"
    RAW = "raw"


@dataclass(frozen=True, eq=False)
class ClusterResult:
    boundaries_t: np.ndarray
    boundaries_x: np.ndarray
    labels: np.ndarray
    method: Method

    @property
    def k_hat(self) -> int:
        return len(self.boundaries_x) + 1

    def summary(self) -> dict:
        return {
            "method": self.method.value,
            "k_hat": self.k_hat,
            "boundaries_x": [float(b) for b in self.boundaries_x],
            "boundaries_t": [float(b) for b in self.boundaries_t],
        }


def scott_bandwidth(values) -> float:
    v = np.asarray(values, dtype=np.float64)
    return v.size ** -0.2 * float(np.std(v, ddof=1))


def kde_density(points, h: float, grid, kernel: KernelSpec | None = None, block: int = 1 << 22):
    kernel = kernel or KernelSpec.gaussian()
    points = np.asarray(points, dtype=np.float64)
    scale = h / kernel.std
    out = np.empty(len(grid))
    step = max(1, block // points.size)
    for s in range(0, len(grid), step):
        g = grid[s : s + step]
        out[s : s + step] = kernel_pdf(kernel, (g[:, None] - points[None, :]) / scale).mean(1)
    return out / scale


def local_minima(density: np.ndarray) -> list[tuple[int, bool]]:
    """Interior strict local minima as ``(index, is_plateau)``.

    A run of equal values lower than both its neighbours counts once, at its
    leftmost index.
    """
    d = np.asarray(density)
    starts = np.flatnonzero(np.r_[True, d[1:] != d[:-1]])
    vals = d[starts]
    lengths = np.diff(np.r_[starts, d.size])
    out = []
    for r in range(1, len(starts) - 1):
        if vals[r] < vals[r - 1] and vals[r] < vals[r + 1]:
            out.append((int(starts[r]), bool(lengths[r] > 1)))
    return out


def _refine(grid, density, i, plateau):
    if plateau:
        return grid[i]
    f0, f1, f2 = density[i - 1], density[i], density[i + 1]
    denom = f0 - 2.0 * f1 + f2
    off = 0.5 * (f0 - f2) / denom if denom > 0 else 0.0
    return grid[i] + np.clip(off, -0.5, 0.5) * (grid[1] - grid[0])


def find_boundaries(points, lo: float, hi: float, grid_points: int,
                    density_kernel: KernelSpec | None = None) -> np.ndarray:
    """Valley locations of a Scott's-rule KDE of ``points`` on ``[lo, hi]``."""
    # fixed summation order makes the result independent of input order
    points = np.sort(np.asarray(points, dtype=np.float64))
    h = scott_bandwidth(points)
    if not h > 0:
        return np.empty(0)
    grid = np.linspace(lo, hi, grid_points)
    dens = kde_density(points, h, grid, density_kernel)
    return np.array([_refine(grid, dens, i, p) for i, p in local_minima(dens)])


def _labels_and_prune(x, bt, bx):
    # strictly increasing boundaries, no empty clusters
    keep = np.r_[True, np.diff(bx) > 0] if bx.size else np.zeros(0, bool)
    bt, bx = bt[keep], bx[keep]
    while True:
        labels = np.searchsorted(bx, x, side="right")
        counts = np.bincount(labels, minlength=bx.size + 1)
        empty = np.flatnonzero(counts == 0)
        if empty.size == 0:
            return bt, bx, labels
        # drop the boundary closing the first empty interval
        j = min(empty[0], bx.size - 1)
        bt, bx = np.delete(bt, j), np.delete(bx, j)


def _check_n(col):
    if len(col) < 2:
        raise ValueError(f"clustering needs at least 2 samples, got {len(col)}")


def cluster_kdi(column, alpha: float = 1.0, grid_points: int = DEFAULT_GRID_POINTS,
                kernel: KernelSpec | None = None, plan: EvalPlan | None = None,
                density_kernel: KernelSpec | None = None) -> ClusterResult:
    """Cluster by valleys of the KDE of KDI-transformed values."""
    col = as_column(column)
    _check_n(col)
    if grid_points < 64:
        raise ValueError(f"grid_points must be >= 64, got {grid_points}")
    fitted = fit(col, alpha, kernel, plan)
    if fitted.degenerate:
        return ClusterResult(np.empty(0), np.empty(0), np.zeros(len(col), int), Method.KDI)
    t = fitted.transform(col.values)
    bt = find_boundaries(t, 0.0, 1.0, grid_points, density_kernel)
    bx = fitted.inverse_transform(np.clip(bt, 0.0, 1.0)) if bt.size else np.empty(0)
    bt, bx, labels = _labels_and_prune(col.values, bt, np.atleast_1d(bx))
    return ClusterResult(bt, bx, labels, Method.KDI)


def cluster_raw_kde(column, grid_points: int = DEFAULT_GRID_POINTS,
                    density_kernel: KernelSpec | None = None) -> ClusterResult:
    """Ablation: valleys of a Scott's-rule KDE of the untransformed values."""
    col = as_column(column)
    _check_n(col)
    x = col.values
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        return ClusterResult(np.empty(0), np.empty(0), np.zeros(len(col), int), Method.RAW)
    bx = find_boundaries(x, lo, hi, grid_points, density_kernel)
    bt = (bx - lo) / (hi - lo)
    bt, bx, labels = _labels_and_prune(x, bt, bx)
    return ClusterResult(bt, bx, labels, Method.RAW)


def cluster(column, method=Method.KDI, alpha: float = 1.0,
            grid_points: int = DEFAULT_GRID_POINTS, **kw) -> ClusterResult:
    if Method(method) is Method.KDI:
        return cluster_kdi(column, alpha, grid_points, **kw)
    return cluster_raw_kde(column, grid_points, kw.get("density_kernel"))


def ari(labels_a, labels_b) -> float:
    """Adjusted Rand index from the pair-counting contingency table."""
    a = np.asarray(labels_a)
    b = np.asarray(labels_b)
    if a.shape != b.shape:
        raise ValueError("labelings must have the same length")
    n = a.size
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)

    def pairs(m):
        m = np.asarray(m, dtype=np.float64)
        return float((m * (m - 1) / 2).sum())

    index = pairs(table)
    sa, sb = pairs(table.sum(1)), pairs(table.sum(0))
    total = n * (n - 1) / 2
    expected = sa * sb / total if total else 0.0
    max_index = 0.5 * (sa + sb)
    if max_index == expected:
        # both labelings trivial (single cluster or all singletons)
        return 1.0
    return (index - expected) / (max_index - expected)
