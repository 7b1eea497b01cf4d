"""Trigonometric moments, mean direction and circular skewness of the EWC family."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import EwcParams, ewc_density
from .quadrature import QuadResult, periodic_trapezoid

# mean resultant length below this leaves the mean direction undefined
UNDEFINED_MEAN_TOL = 1e-14


class UndefinedMeanDirection(ValueError):
    """Raised when a quantity needs the mean direction but E(Z) = 0."""


def _power_differences(f1: complex, f2: complex, k: int) -> list[complex]:
    """``(f1^j - f2^j)/(f1 - f2)`` for ``j = 0..k``, valid at ``f1 = f2``."""
    out = [0j]
    pw = 1 + 0j
    for _ in range(k):
        out.append(f1 * out[-1] + pw)
        pw *= f2
    return out


def trig_moment(n: int, p: EwcParams) -> complex:
    """E(Z^n) for ``Z = exp(i Theta)``, ``n >= 0``.

    The residue formula is a divided difference in ``(phi1, phi2)``;
    expanding it over powers keeps it accurate as the two points merge, and
    exact equality uses the double-pole form.
    """
    n = int(n)
    if n < 0:
        raise ValueError("moment order must be non-negative")
    if n == 0:
        return complex(1.0)
    f1, f2 = p.phi1, p.phi2
    if f1 == f2:
        return equal_point_moment(n, f1)
    s = f1.conjugate() + f2.conjugate()
    q = f1.conjugate() * f2.conjugate()
    d = _power_differences(f1, f2, n + 1)
    prod = f1 * f2
    num = d[n + 1] - s * prod * d[n] + q * prod * prod * d[n - 1]
    return num / (1 - abs(f1 * f2.conjugate()) ** 2)


def equal_point_moment(n: int, phi: complex) -> complex:
    """E(Z^n) when both points equal ``phi`` (double-pole residue)."""
    a = abs(phi) ** 2
    return (1 + n + (1 - n) * a) / (1 + a) * phi**n


def first_moment(p: EwcParams) -> complex:
    """E(Z), valid for every parameter pair (no branch)."""
    f1, f2 = p.phi1, p.phi2
    a1, a2 = abs(f1) ** 2, abs(f2) ** 2
    return ((1 - a2) * f1 + (1 - a1) * f2) / (1 - a1 * a2)


def moment_oracle(n: int, p: EwcParams, tol: float = 1e-12) -> QuadResult:
    """Quadrature estimate of E(Z^n) against the density."""
    if n < 0:
        raise ValueError("moment order must be non-negative")
    return periodic_trapezoid(lambda t: np.exp(1j * n * t) * ewc_density(t, p), tol=tol)


def skewness(p: EwcParams) -> float:
    """Circular skewness in closed form.

    Returns ``+inf``/``-inf`` when ``(1 - R)^(-3/2)`` overflows, ``R`` being
    the mean resultant length. Raises :class:`UndefinedMeanDirection`
    when ``E(Z) = 0``.
    """
    f1, f2 = p.phi1, p.phi2
    a1, a2 = abs(f1) ** 2, abs(f2) ** 2
    big_r = abs(first_moment(p))
    if big_r < UNDEFINED_MEAN_TOL:
        raise UndefinedMeanDirection("skewness is undefined when E(Z) = 0")
    cross = f1 * f2.conjugate()
    core = (
        abs(1 - cross) ** 2
        / (1 - abs(cross) ** 2) ** 3
        * cross.imag
        * (a1 - a2)
        * (1 - a1)
        * (1 - a2)
        / big_r**2
    )
    if core == 0.0:
        return 0.0
    gap = 1.0 - big_r
    if gap <= 0.0:
        return math.copysign(math.inf, core)
    with np.errstate(over="ignore"):
        val = core * gap ** (-1.5)
    if not math.isfinite(val):
        return math.copysign(math.inf, core)
    return float(val)


def skewness_from_moments(p: EwcParams) -> float:
    """Skewness evaluated from its definition via E(Z) and E(Z^2)."""
    m1 = trig_moment(1, p)
    m2 = trig_moment(2, p)
    big_r = abs(m1)
    if big_r < UNDEFINED_MEAN_TOL:
        raise UndefinedMeanDirection("skewness is undefined when E(Z) = 0")
    return float((m2 * (m1.conjugate() / big_r) ** 2).imag / (1 - big_r) ** 1.5)


@dataclass(frozen=True)
class CircularSummary:
    mean_direction: Optional[float]
    mean_resultant_length: float
    skewness: Optional[float]

    @property
    def mean_defined(self) -> bool:
        return self.mean_direction is not None

    def to_dict(self) -> dict:
        return {
            "mean_direction": self.mean_direction,
            "mean_resultant_length": self.mean_resultant_length,
            "skewness": self.skewness,
            "mean_defined": self.mean_defined,
        }


def circular_summary(p: EwcParams) -> CircularSummary:
    m = first_moment(p)
    big_r = abs(m)
    if big_r < UNDEFINED_MEAN_TOL:
        return CircularSummary(None, big_r, None)
    return CircularSummary(float(np.angle(m)), big_r, skewness(p))
