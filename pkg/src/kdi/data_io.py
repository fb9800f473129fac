"""CSV ingestion and synthetic data generators.

All generators draw from ``numpy.random.default_rng(seed)`` (PCG64), so a
given ``(spec, n, seed)`` is bit-identical across runs and platforms with the
same NumPy. The ``Exp`` family of components is rate-parameterized:
``Exp(rate=8)`` has mean 1/8.

The benchmark mixtures write exponentials as ``Exp(lambda)`` with lambda the
*mean* (NumPy's ``scale``), so ``BENCHMARK_MIXTURES`` stores ``rate = 1/lambda``.
Only that reading makes the raw-KDE ablation fail on mixture 4; with
lambda as a rate, ``10 + Exp(4)`` is a tight blob any KDE separates.
"""

from __future__ import annotations

import csv
import enum
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .core import DataError


class MissingColumnError(DataError, KeyError):
    pass


# -- mixtures -------------------------------------------------------------

@dataclass(frozen=True)
class Normal:
    mu: float
    sigma: float

    def sample(self, rng, n):
        return rng.normal(self.mu, self.sigma, n)

    def moments(self):
        return self.mu, self.sigma**2


@dataclass(frozen=True)
class Uniform:
    a: float
    b: float

    def sample(self, rng, n):
        return rng.uniform(self.a, self.b, n)

    def moments(self):
        return 0.5 * (self.a + self.b), (self.b - self.a) ** 2 / 12.0


@dataclass(frozen=True)
class Exp:
    rate: float

    def sample(self, rng, n):
        return rng.exponential(1.0 / self.rate, n)

    def moments(self):
        return 1.0 / self.rate, 1.0 / self.rate**2


@dataclass(frozen=True)
class ShiftedExp:
    """``shift + Exp(rate)``"""

    shift: float
    rate: float

    def sample(self, rng, n):
        return self.shift + rng.exponential(1.0 / self.rate, n)

    def moments(self):
        return self.shift + 1.0 / self.rate, 1.0 / self.rate**2


@dataclass(frozen=True)
class ReflectedExp:
    """``shift - Exp(rate)``"""

    shift: float
    rate: float

    def sample(self, rng, n):
        return self.shift - rng.exponential(1.0 / self.rate, n)

    def moments(self):
        return self.shift - 1.0 / self.rate, 1.0 / self.rate**2


_DISTS = {
    "normal": (Normal, ("mu", "sigma")),
    "uniform": (Uniform, ("a", "b")),
    "exp": (Exp, ("rate",)),
    "shifted_exp": (ShiftedExp, ("shift", "rate")),
    "reflected_exp": (ReflectedExp, ("shift", "rate")),
}


@dataclass(frozen=True)
class MixtureSpec:
    components: tuple = field(default=())

    def __post_init__(self):
        comps = tuple((float(w), d) for w, d in self.components)
        if not comps:
            raise ValueError("mixture needs at least one component")
        w = np.array([c[0] for c in comps])
        if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"mixture weights must be positive and sum to 1, got {w.tolist()}")
        object.__setattr__(self, "components", comps)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.components])

    @property
    def k(self) -> int:
        return len(self.components)

    def mean(self) -> float:
        return sum(w * d.moments()[0] for w, d in self.components)

    def var(self) -> float:
        m = self.mean()
        return sum(w * (d.moments()[1] + (d.moments()[0] - m) ** 2) for w, d in self.components)

    @classmethod
    def from_dict(cls, doc: dict) -> "MixtureSpec":
        comps = []
        for c in doc["components"]:
            kind = c["dist"]
            if kind not in _DISTS:
                raise ValueError(f"unknown distribution {kind!r}; expected one of {sorted(_DISTS)}")
            ctor, params = _DISTS[kind]
            comps.append((c["weight"], ctor(*(float(c[p]) for p in params))))
        return cls(tuple(comps))

    def to_dict(self) -> dict:
        out = []
        for w, d in self.components:
            kind = next(k for k, (ctor, _) in _DISTS.items() if isinstance(d, ctor))
            out.append({"weight": w, "dist": kind, **d.__dict__})
        return {"components": out}


def load_mixture_json(path) -> MixtureSpec:
    with open(path) as fh:
        return MixtureSpec.from_dict(json.load(fh))


BENCHMARK_MIXTURES = {
    1: MixtureSpec(((0.55, Normal(1, 0.75)), (0.30, Normal(4, 1)), (0.15, Uniform(0, 20)))),
    2: MixtureSpec(((0.45, Normal(1, 0.5)), (0.45, Normal(4, 1)), (0.10, Uniform(0, 20)))),
    3: MixtureSpec(((0.67, Normal(1, 0.5)), (0.33, Normal(4, 1)))),
    # Exp(lambda) with lambda the mean, see module docstring
    4: MixtureSpec(((0.8, Exp(1)), (0.2, ShiftedExp(10, 1 / 4)))),
    5: MixtureSpec(((0.5, Exp(1 / 8)), (0.5, ReflectedExp(100, 1 / 5)))),
}


def sample_mixture(spec: MixtureSpec, n: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``n`` values and the index of the component that produced each."""
    if n <= 0:
        raise ValueError(f"n must be positive, got {n}")
    rng = np.random.default_rng(seed)
    labels = rng.choice(spec.k, size=n, p=spec.weights)
    values = np.empty(n)
    for j, (_, dist) in enumerate(spec.components):
        idx = np.flatnonzero(labels == j)
        values[idx] = dist.sample(rng, idx.size)
    return values, labels


# -- benchmark and correlation scenarios -----------------------------------

def gen_lognormal(n: int, seed) -> np.ndarray:
    return np.random.default_rng(seed).lognormal(0.0, 1.0, n)


class Scenario(str, enum.Enum):
    MONOTONE_NONLINEAR = "monotone_nonlinear"
    NOISY_LINEAR = "noisy_linear"
    LINEAR_WITH_OUTLIERS = "linear_with_outliers"


@dataclass(frozen=True)
class ScenarioParams:
    noise: float = 0.5
    outlier_frac: float = 0.05
    outlier_offset: float = 20.0


def gen_corr_scenario(kind, n: int, seed, params: ScenarioParams | None = None):
    """Paired samples for the three correlation scenarios.

    * monotone_nonlinear: ``x ~ U(-1, 1)``, ``y = x**3 + noise*N(0,1)``; noise
      defaults to 0 for this scenario unless ``params`` is given.
    * noisy_linear: ``x ~ N(0, 1)``, ``y = x + noise*N(0, 1)``.
    * linear_with_outliers: the noisy-linear draws, then each point is
      shifted up by ``outlier_offset`` in ``y`` with probability ``outlier_frac``.
    """
    kind = Scenario(kind)
    rng = np.random.default_rng(seed)
    if kind is Scenario.MONOTONE_NONLINEAR:
        p = params or ScenarioParams(noise=0.0)
        x = rng.uniform(-1.0, 1.0, n)
        y = x**3 + p.noise * rng.normal(size=n)
        return x, y
    p = params or ScenarioParams()
    x = rng.normal(size=n)
    y = x + p.noise * rng.normal(size=n)
    if kind is Scenario.LINEAR_WITH_OUTLIERS and p.outlier_frac > 0:
        hit = rng.random(n) < p.outlier_frac
        y = np.where(hit, y + p.outlier_offset, y)
    return x, y


# -- CSV -----------------------------------------------------------------

@dataclass
class Table:
    names: list[str]
    columns: dict[str, np.ndarray]
    nan_counts: dict[str, int]
    source: str = ""

    def __getitem__(self, name):
        return self.columns[name]


def _parse(cell: str) -> float:
    try:
        v = float(cell)
    except ValueError:
        return math.nan
    return v if math.isfinite(v) else math.nan


def load_csv(path, columns=None) -> Table:
    """Read a headered CSV of numeric columns.

    Non-numeric (and non-finite) cells become NaN and are counted per column.
    ``columns`` selects and orders a subset by name; default is all columns.
    """
    path = os.fspath(path)
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: file is empty") from None
        rows = [r for r in reader if r]
    wanted = list(columns) if columns else header
    for c in wanted:
        if c not in header:
            raise MissingColumnError(f"{path}: no column named {c!r} (have {header})")
    if not rows:
        raise DataError(f"{path}: column {wanted[0]!r} is empty (header only)")
    out, nans = {}, {}
    for c in wanted:
        j = header.index(c)
        v = np.array([_parse(r[j]) if j < len(r) else math.nan for r in rows])
        out[c] = v
        nans[c] = int(np.isnan(v).sum())
    return Table(wanted, out, nans, source=path)


def write_csv(path, names, columns):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in zip(*(columns[n] for n in names)):
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
