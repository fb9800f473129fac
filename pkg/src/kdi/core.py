"""The kernel density integral (KDI) transform.

For a training column with extrema ``X_(1)``, ``X_(N)`` and KDE mass ``P_h``::

    T(x) = 0                                     x <  X_(1)
    T(x) = P_h(X_(1), x) / P_h(X_(1), X_(N))     X_(1) <= x < X_(N)
    T(x) = 1                                     X_(N) <= x

with ``h = alpha * std(X)``. Large ``alpha`` approaches min-max scaling,
small ``alpha`` approaches the empirical CDF.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .fast_eval import (
    EvalPlan,
    Grid,
    Strategy,
    build_reference_grid,
    interp_eval,
    kde_cdf,
    normalize_kdi,
)
from .kernels import KernelFamily, KernelSpec

MODEL_FORMAT = "kdi-model"
MODEL_VERSION = 1


class DataError(ValueError):
    """Input data that cannot be processed (non-finite values, empty columns)."""


@dataclass(frozen=True, eq=False)
class Column:
    name: str
    values: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).ravel()
        if v.size == 0:
            raise DataError(f"column {self.name!r} is empty")
        bad = int(np.count_nonzero(~np.isfinite(v)))
        if bad:
            raise DataError(f"column {self.name!r} has {bad} non-finite value(s)")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size


def as_column(data, name: str = "x") -> Column:
    return data if isinstance(data, Column) else Column(name, data)


def default_plan(kernel: KernelSpec) -> EvalPlan:
    if kernel.family is KernelFamily.POLYEXP:
        return EvalPlan(Strategy.DP)
    return EvalPlan(Strategy.GRID)


def check_combination(kernel: KernelSpec, plan: EvalPlan):
    ok = {
        Strategy.EXACT: True,
        Strategy.GRID: kernel.family is KernelFamily.GAUSSIAN,
        Strategy.DP: kernel.family is KernelFamily.POLYEXP,
    }[plan.strategy]
    if not ok:
        raise ValueError(
            f"strategy {plan.strategy.value!r} is not available for the "
            f"{kernel.family.value!r} kernel (dp needs polyexp, grid needs gaussian)"
        )


@dataclass(frozen=True, eq=False)
class FittedKdi:
    """A fitted transform. Immutable; safe to share between threads.

    ``bandwidth`` is ``alpha * sigma_hat`` and is the kernel standard
    deviation; the unit poly-exp kernel is rescaled accordingly
    (see :attr:`kernel_scale`).
    """

    name: str
    x_min: float
    x_max: float
    bandwidth_factor: float
    bandwidth: float
    sigma_hat: float
    n: int
    kernel: KernelSpec
    plan: EvalPlan
    grid: Grid
    degenerate: bool = False
    # only kept for the exact strategy
    samples: np.ndarray | None = field(default=None, repr=False)

    @property
    def kernel_scale(self) -> float:
        return self.bandwidth / self.kernel.std

    def transform(self, values) -> np.ndarray:
        return transform(self, values)

    def inverse_transform(self, t) -> np.ndarray:
        return inverse_transform(self, t)


def _sample_std(v: np.ndarray) -> float:
    return float(np.std(v, ddof=1)) if v.size > 1 else 0.0


def fit(column, alpha: float = 1.0, kernel: KernelSpec | None = None,
        plan: EvalPlan | None = None) -> FittedKdi:
    """Fit the KDI transform on a training column."""
    col = as_column(column)
    if not (alpha > 0 and math.isfinite(alpha)):
        raise ValueError(f"alpha must be positive and finite, got {alpha}")
    kernel = kernel or KernelSpec.polyexp()
    plan = plan or default_plan(kernel)
    check_combination(kernel, plan)

    x = np.sort(col.values)
    lo, hi = float(x[0]), float(x[-1])
    sigma = _sample_std(x)
    common = dict(name=col.name, x_min=lo, x_max=hi, bandwidth_factor=float(alpha),
                  sigma_hat=sigma, n=x.size, kernel=kernel, plan=plan)
    if hi == lo or sigma == 0.0:
        grid = Grid(np.array([lo]), np.array([0.5]))
        return FittedKdi(bandwidth=0.0, grid=grid, degenerate=True, **common)

    h = float(alpha) * sigma
    grid = build_reference_grid(x, h / kernel.std, plan, kernel)
    samples = x if plan.strategy is Strategy.EXACT else None
    return FittedKdi(bandwidth=h, grid=grid, samples=samples, **common)


def _warn_nan(count: int, name: str):
    if count:
        warnings.warn(f"{count} NaN input(s) propagated in column {name!r}", RuntimeWarning,
                      stacklevel=3)


def transform(fitted: FittedKdi, values) -> np.ndarray:
    """Apply a fitted transform; NaN inputs come back as NaN with a warning."""
    x = np.asarray(values, dtype=np.float64)
    nan = np.isnan(x)
    _warn_nan(int(nan.sum()), fitted.name)
    if fitted.degenerate:
        out = np.where(x < fitted.x_min, 0.0, np.where(x > fitted.x_min, 1.0, 0.5))
    elif fitted.plan.strategy is Strategy.EXACT:
        s, scale = fitted.samples, fitted.kernel_scale
        inside = (x > fitted.x_min) & (x < fitted.x_max)
        out = np.where(x >= fitted.x_max, 1.0, 0.0)
        if inside.any():
            q = np.concatenate([[fitted.x_min, fitted.x_max], x[inside]])
            cdf = kde_cdf(s, scale, q, fitted.kernel)
            out[inside] = np.clip(normalize_kdi(cdf[2:], cdf[0], cdf[1]), 0.0, 1.0)
    else:
        out = interp_eval(fitted.grid, x)
    out = np.where(nan, np.nan, out)
    return out[()] if out.ndim == 0 else out


def inverse_transform(fitted: FittedKdi, t) -> np.ndarray:
    """Piecewise-linear inverse of the reference grid.

    On flat grid segments the left end of the segment is returned.
    """
    t = np.asarray(t, dtype=np.float64)
    if np.any((t < 0) | (t > 1)):
        raise ValueError("inverse_transform expects values in [0, 1]")
    if fitted.degenerate:
        out = np.full(t.shape, fitted.x_min)
        return out[()] if out.ndim == 0 else out
    pos, val = fitted.grid.positions, fitted.grid.values
    # leftmost node with value >= t; val[0] == 0 and val[-1] == 1 keep it in range
    i = np.clip(np.searchsorted(val, t, side="left"), 0, len(val) - 1)
    hit = val[i] == t
    j = np.maximum(i, 1)
    v0, v1 = val[j - 1], val[j]
    with np.errstate(invalid="ignore", divide="ignore"):
        w = (t - v0) / (v1 - v0)
    out = np.where(hit, pos[i], pos[j - 1] + w * (pos[j] - pos[j - 1]))
    return out[()] if out.ndim == 0 else out


def minmax(column, values) -> np.ndarray:
    """Clamped min-max scaling. Zero-span columns follow the degenerate policy (0 / 0.5 / 1)."""
    col = as_column(column)
    lo, hi = float(col.values.min()), float(col.values.max())
    x = np.asarray(values, dtype=np.float64)
    if hi == lo:
        warnings.warn(f"column {col.name!r} has zero span; min-max is degenerate", RuntimeWarning,
                      stacklevel=2)
        return np.where(x < lo, 0.0, np.where(x > lo, 1.0, 0.5))
    return np.clip((x - lo) / (hi - lo), 0.0, 1.0)


def quantile(column, values) -> np.ndarray:
    """Empirical CDF with mid-rank ties: ``(#{X <= x} + #{X < x}) / 2N``."""
    col = as_column(column)
    s = np.sort(col.values)
    x = np.asarray(values, dtype=np.float64)
    le = np.searchsorted(s, x, side="right")
    lt = np.searchsorted(s, x, side="left")
    return (le + lt) / (2.0 * s.size)


# -- serialization ---------------------------------------------------------

def _hex(a) -> list[str]:
    return [float(v).hex() for v in np.asarray(a, dtype=np.float64).ravel()]


def _unhex(a) -> np.ndarray:
    return np.array([float.fromhex(v) for v in a], dtype=np.float64)


def fitted_to_dict(f: FittedKdi) -> dict:
    return {
        "name": f.name,
        "x_min": f.x_min.hex(),
        "x_max": f.x_max.hex(),
        "alpha": f.bandwidth_factor.hex(),
        "bandwidth": f.bandwidth.hex(),
        "sigma_hat": f.sigma_hat.hex(),
        "n": f.n,
        "kernel": f.kernel.to_dict(),
        "strategy": f.plan.strategy.value,
        "grid_size": f.plan.grid_size,
        "degenerate": f.degenerate,
        "grid_positions": _hex(f.grid.positions),
        "grid_values": _hex(f.grid.values),
        "samples": None if f.samples is None else _hex(f.samples),
    }


def fitted_from_dict(d: dict) -> FittedKdi:
    return FittedKdi(
        name=d["name"],
        x_min=float.fromhex(d["x_min"]),
        x_max=float.fromhex(d["x_max"]),
        bandwidth_factor=float.fromhex(d["alpha"]),
        bandwidth=float.fromhex(d["bandwidth"]),
        sigma_hat=float.fromhex(d["sigma_hat"]),
        n=int(d["n"]),
        kernel=KernelSpec.from_dict(d["kernel"]),
        plan=EvalPlan(Strategy(d["strategy"]), int(d["grid_size"])),
        grid=Grid(_unhex(d["grid_positions"]), _unhex(d["grid_values"])),
        degenerate=bool(d["degenerate"]),
        samples=None if d["samples"] is None else _unhex(d["samples"]),
    )


def save_model(models: Mapping[str, FittedKdi] | FittedKdi, path: str | os.PathLike):
    """Write fitted transforms as versioned JSON; floats are stored as exact hex strings."""
    if isinstance(models, FittedKdi):
        models = {models.name: models}
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "columns": [fitted_to_dict(m) for m in models.values()],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def load_model(path: str | os.PathLike) -> dict[str, FittedKdi]:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != MODEL_FORMAT:
        raise DataError(f"{path}: not a KDI model file")
    if doc.get("version") != MODEL_VERSION:
        raise DataError(f"{path}: unsupported model version {doc.get('version')}")
    out = {}
    for d in doc["columns"]:
        f = fitted_from_dict(d)
        out[f.name] = f
    return out
