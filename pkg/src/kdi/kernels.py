"""Unit-scale kernels with closed-form density and cumulative distribution.

Two families are supported:

* ``gaussian``: the standard normal density.
* ``polyexp``: ``c * sum_i beta_i |z|^i exp(-|z|)`` for ``i = 0..K``. Its CDF
  follows from ``int_z^inf t^i e^-t dt = i! e^-z sum_{m<=i} z^m / m!`` so no
  quadrature is needed, which is what makes the sorted-sum recursion in
  :mod:`kdi.fast_eval` possible.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import ndtr

SQRT_2PI = math.sqrt(2.0 * math.pi)


class KernelFamily(str, enum.Enum):
    GAUSSIAN = "gaussian"
    POLYEXP = "polyexp"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus its parameters.

    ``order`` and ``coefficients`` are ignored for the Gaussian family. For
    ``polyexp`` the default coefficients are ``1/i!``; any positive rescaling
    of them gives the same normalized kernel.
    """

    family: KernelFamily = KernelFamily.POLYEXP
    order: int = 4
    coefficients: tuple[float, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))
        if self.family is KernelFamily.GAUSSIAN:
            return
        if self.order < 0:
            raise ValueError(f"polyexp order must be >= 0, got {self.order}")
        coefs = self.coefficients
        if not coefs:
            coefs = tuple(1.0 / math.factorial(i) for i in range(self.order + 1))
        coefs = tuple(float(b) for b in coefs)
        if len(coefs) != self.order + 1:
            raise ValueError(
                f"polyexp of order {self.order} needs {self.order + 1} coefficients, "
                f"got {len(coefs)}"
            )
        if any(b < 0 or not math.isfinite(b) for b in coefs) or not any(coefs):
            raise ValueError("polyexp coefficients must be finite, non-negative and not all zero")
        object.__setattr__(self, "coefficients", coefs)

    @classmethod
    def gaussian(cls) -> "KernelSpec":
        return cls(KernelFamily.GAUSSIAN, order=0, coefficients=())

    @classmethod
    def polyexp(cls, order: int = 4, coefficients=()) -> "KernelSpec":
        return cls(KernelFamily.POLYEXP, order=order, coefficients=tuple(coefficients))

    @cached_property
    def norm_const(self) -> float:
        """``c`` such that the polyexp density integrates to one."""
        if self.family is KernelFamily.GAUSSIAN:
            return 1.0 / SQRT_2PI
        return 1.0 / sum(b * 2.0 * math.factorial(i) for i, b in enumerate(self.coefficients))

    @cached_property
    def tail_coefficients(self) -> np.ndarray:
        """``gamma_m`` with ``1 - cdf(u) = exp(-u) * sum_m gamma_m u^m`` for ``u >= 0``."""
        if self.family is KernelFamily.GAUSSIAN:
            raise ValueError("tail coefficients only exist for the polyexp family")
        K = self.order
        c = self.norm_const
        gam = np.zeros(K + 1)
        for m in range(K + 1):
            gam[m] = c * sum(
                self.coefficients[i] * math.factorial(i) for i in range(m, K + 1)
            ) / math.factorial(m)
        return gam

    @cached_property
    def std(self) -> float:
        """Standard deviation of the unit-scale kernel."""
        if self.family is KernelFamily.GAUSSIAN:
            return 1.0
        var = self.norm_const * sum(
            b * 2.0 * math.factorial(i + 2) for i, b in enumerate(self.coefficients)
        )
        return math.sqrt(var)

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "order": self.order,
            "coefficients": [float(b).hex() for b in self.coefficients],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        if d["family"] == KernelFamily.GAUSSIAN.value:
            return cls.gaussian()
        return cls.polyexp(d["order"], [float.fromhex(b) for b in d["coefficients"]])


def _check_finite(z):
    z = np.asarray(z, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise ValueError("kernel argument must be finite")
    return z


def _polyexp_tail(spec: KernelSpec, u: np.ndarray) -> np.ndarray:
    # Horner on gamma_m, u >= 0
    gam = spec.tail_coefficients
    acc = np.full_like(u, gam[-1])
    for g in gam[-2::-1]:
        acc = acc * u + g
    return acc * np.exp(-u)


def kernel_pdf(spec: KernelSpec, z):
    """Normalized kernel density at ``z`` (scalar or array)."""
    z = _check_finite(z)
    if spec.family is KernelFamily.GAUSSIAN:
        out = np.exp(-0.5 * z * z) / SQRT_2PI
    else:
        a = np.abs(z)
        acc = np.full_like(a, spec.coefficients[-1])
        for b in spec.coefficients[-2::-1]:
            acc = acc * a + b
        out = spec.norm_const * acc * np.exp(-a)
    return out[()] if out.ndim == 0 else out


def kernel_cdf(spec: KernelSpec, z):
    """Integral of the normalized kernel from ``-inf`` to ``z``."""
    z = _check_finite(z)
    if spec.family is KernelFamily.GAUSSIAN:
        out = ndtr(z)
    else:
        tail = _polyexp_tail(spec, np.abs(z))
        # left branch by reflection: cdf(-u) = tail(u)
        out = np.where(z < 0, tail, 1.0 - tail)
    out = np.asarray(out, dtype=np.float64)
    return out[()] if out.ndim == 0 else out
