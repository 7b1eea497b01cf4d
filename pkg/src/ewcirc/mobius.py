"""Disc automorphisms and the invariance, harmonic-measure and convolution identities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .core import (
    EwcParams,
    WcParams,
    disk_point,
    ewc_density,
    ewc_density_complex,
    normalize_angle,
    wc_density,
)
from .moments import trig_moment
from .quadrature import periodic_trapezoid


@dataclass(frozen=True)
class MobiusMap:
    """``w -> alpha (w + beta) / (conj(beta) w + 1)`` with ``|alpha| = 1``, ``|beta| < 1``."""

    alpha: complex = 1.0
    beta: complex = 0.0

    def __post_init__(self):
        a = complex(self.alpha)
        if abs(abs(a) - 1.0) > 1e-14:
            raise ValueError("alpha must lie on the unit circle")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", disk_point(self.beta))

    @classmethod
    def rotation(cls, gamma: float) -> "MobiusMap":
        return cls(complex(np.cos(gamma), np.sin(gamma)), 0.0)

    def __call__(self, w):
        return apply(self, w)

    def inverse(self) -> "MobiusMap":
        return MobiusMap(self.alpha.conjugate(), -self.alpha * self.beta)

    def derivative(self, w):
        w = np.asarray(w, dtype=complex)
        return self.alpha * (1 - abs(self.beta) ** 2) / (self.beta.conjugate() * w + 1) ** 2


def apply(m: MobiusMap, w):
    w = np.asarray(w, dtype=complex)
    if np.any(np.abs(w) > 1 + 1e-12):
        raise ValueError("Mobius maps act on the closed unit disc")
    out = m.alpha * (w + m.beta) / (m.beta.conjugate() * w + 1)
    return complex(out) if out.ndim == 0 else out


def derivative_modulus_sq(m: MobiusMap, z):
    out = np.abs(m.derivative(z)) ** 2
    return float(out) if np.ndim(out) == 0 else out


def _onto_circle(z):
    # M maps the circle to itself up to rounding; density evaluation insists on |z| = 1
    return z / np.abs(z)


def invariance_residual(z, p: EwcParams, m: MobiusMap):
    """``|f(z; phi1, phi2) - f(M z; M phi1, M phi2) |M'(z)|^2|``."""
    z = np.asarray(z, dtype=complex)
    lhs = ewc_density_complex(z, p.phi1, p.phi2)
    rhs = ewc_density_complex(_onto_circle(apply(m, z)), apply(m, p.phi1), apply(m, p.phi2))
    out = np.abs(lhs - rhs * derivative_modulus_sq(m, z))
    return float(out) if np.ndim(out) == 0 else out


def poisson_kernel(z, phi):
    """``(1 - |phi|^2) / |z - phi|^2``, the unnormalised wrapped Cauchy on the circle."""
    z = np.asarray(z, dtype=complex)
    return (1.0 - abs(phi) ** 2) / np.abs(z - phi) ** 2


def kernel_invariance_residual(z, p: EwcParams, m: MobiusMap):
    """Weight-2 residual for the product of Poisson kernels, i.e. without the constant.

    The normalising constant of the EWC density is not preserved by a
    general disc automorphism, so the exact weight-2 law holds for this
    unnormalised product; the normalised density picks up the constant
    factor returned by :func:`invariance_ratio`.
    """
    z = np.asarray(z, dtype=complex)
    w = _onto_circle(apply(m, z))
    a, b = apply(m, p.phi1), apply(m, p.phi2)
    lhs = poisson_kernel(z, p.phi1) * poisson_kernel(z, p.phi2)
    rhs = poisson_kernel(w, a) * poisson_kernel(w, b) * derivative_modulus_sq(m, z)
    out = np.abs(lhs - rhs)
    return float(out) if np.ndim(out) == 0 else out


def _inverse_constant(phi1, phi2):
    # integral of the kernel product over the circle divided by 2 pi
    c = phi1 * np.conj(phi2)
    return (1.0 - abs(c) ** 2) / abs(1.0 - c) ** 2


def invariance_ratio(p: EwcParams, m: MobiusMap) -> float:
    """``f(z; phi1, phi2) / (f(Mz; M phi1, M phi2) |M'(z)|^2)``, which does not depend on ``z``.

    Equals 1 for rotations and whenever the map preserves the constant.
    """
    return float(_inverse_constant(apply(m, p.phi1), apply(m, p.phi2)) / _inverse_constant(p.phi1, p.phi2))


def wc_weight1_residual(z, phi1: complex, m: MobiusMap):
    z = np.asarray(z, dtype=complex)
    lhs = ewc_density_complex(z, phi1, 0.0)
    rhs = ewc_density_complex(_onto_circle(apply(m, z)), apply(m, phi1), 0.0)
    out = np.abs(lhs - rhs * np.abs(m.derivative(z)))
    return float(out) if np.ndim(out) == 0 else out


HARMONIC = ("constant", "re", "im")


def harmonic_value(kind: str, k: int, z):
    z = np.asarray(z, dtype=complex)
    if kind == "constant":
        return np.ones(z.shape) if z.ndim else 1.0
    if kind == "re":
        return (z**k).real
    if kind == "im":
        return (z**k).imag
    raise ValueError(f"harmonic function must be one of {HARMONIC}")


def poisson_integral_check(kind: str, k: int, phi1: complex) -> float:
    """Quadrature of ``u`` against ``C*(phi1)`` minus ``u(phi1)``; zero for harmonic ``u``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    p = WcParams.from_complex(phi1)
    res = periodic_trapezoid(lambda t: harmonic_value(kind, k, np.exp(1j * t)) * wc_density(t, p))
    return float(res.value - harmonic_value(kind, k, phi1))


def wc_convolve(p1: WcParams, p2: WcParams) -> WcParams:
    """Law of the sum of independent wrapped Cauchy angles."""
    return WcParams(normalize_angle(p1.mu + p2.mu), p1.rho * p2.rho)


def convolution_quadrature(p1: WcParams, p2: WcParams, tau) -> float:
    """``(f * g)(tau)`` by periodic quadrature."""
    res = periodic_trapezoid(lambda t: wc_density(t, p1) * wc_density(tau - t, p2))
    return float(res.value)


def conditioning_density(f: WcParams, g: WcParams, tau: float, theta):
    """``f(theta) g(tau - theta) / (f * g)(tau)``."""
    h = wc_density(tau, wc_convolve(f, g))
    theta = np.asarray(theta, dtype=float)
    return wc_density(theta, f) * wc_density(tau - theta, g) / h


# -- non-closure under Mobius maps ------------------------------------------------


def pushforward_density(theta, p: EwcParams, m: MobiusMap):
    """Density of ``arg M(Z)`` when ``Z`` has the EWC law ``p``."""
    w = np.exp(1j * np.asarray(theta, dtype=float))
    inv = m.inverse()
    z = _onto_circle(apply(inv, w))
    return ewc_density_complex(z, p.phi1, p.phi2) * np.abs(inv.derivative(w))


def moment_matched_ewc(m1: complex, m2: complex, starts: int = 24, seed: int = 0) -> list[EwcParams]:
    """EWC parameter sets whose first two trigonometric moments equal ``m1``, ``m2``.

    Solved by least squares from several starts; only exact solutions
    (residual below 1e-10) are returned, with label-swapped duplicates
    removed.
    """
    rng = np.random.default_rng(seed)

    def unpack(x):
        return EwcParams(x[0], x[1], 0.999 / (1 + np.exp(-x[2])), 0.999 / (1 + np.exp(-x[3])))

    def resid(x):
        p = unpack(x)
        e1, e2 = trig_moment(1, p) - m1, trig_moment(2, p) - m2
        return [e1.real, e1.imag, e2.real, e2.imag]

    sols: list[EwcParams] = []
    for _ in range(starts):
        x0 = np.concatenate([rng.uniform(-np.pi, np.pi, 2), rng.normal(0, 1.5, 2)])
        r = least_squares(resid, x0, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
        if np.max(np.abs(r.fun)) > 1e-10:
            continue
        p = unpack(r.x).canonical()
        if not any(
            abs(p.phi1 - q.phi1) < 1e-6 and abs(p.phi2 - q.phi2) < 1e-6 for q in sols
        ):
            sols.append(p)
    return sols


def nonclosure_gap(p: EwcParams, m: MobiusMap, grid: int = 4096) -> tuple[float, list[EwcParams]]:
    """Smallest sup-norm gap between the pushforward and any moment-matched EWC.

    Returns ``inf`` with an empty list when no EWC matches the moments.
    """
    t = -np.pi + 2 * np.pi * np.arange(grid) / grid
    push = pushforward_density(t, p, m)
    dt = 2 * np.pi / grid
    m1 = complex(np.sum(np.exp(1j * t) * push) * dt)
    m2 = complex(np.sum(np.exp(2j * t) * push) * dt)
    sols = moment_matched_ewc(m1, m2)
    if not sols:
        return float("inf"), sols
    gap = min(float(np.max(np.abs(push - ewc_density(t, q)))) for q in sols)
    return gap, sols
