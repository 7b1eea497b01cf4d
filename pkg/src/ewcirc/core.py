"""Wrapped Cauchy and extended wrapped Cauchy (EWC) densities.

Angles are radians on ``[-pi, pi)``. Every density accepts scalar or array
``theta`` and broadcasts; scalars come back as Python floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

ArrayLike = Union[float, np.ndarray]

TWO_PI = 2.0 * np.pi
LOG_TWO_PI = float(np.log(TWO_PI))

# |phi1 - phi2| below this uses the equal-parameter closed forms.
EQUAL_BRANCH_TOL = 1e-8
# |cos((x - mu) / 2)| below this is treated as a pole of tan((x - mu) / 2).
_TAN_POLE_TOL = 1e-12


def _scalar_or_array(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def normalize_angle(x: ArrayLike) -> ArrayLike:
    """Reduce ``x`` modulo 2*pi into ``[-pi, pi)``.

    Values already in range are returned untouched, which keeps the
    reduction exactly idempotent.
    """
    x = np.asarray(x, dtype=float)
    inside = (x >= -np.pi) & (x < np.pi)
    y = np.mod(x + np.pi, TWO_PI) - np.pi
    # mod can round up to exactly 2*pi for tiny negative arguments
    y = np.where(y >= np.pi, y - TWO_PI, y)
    y = np.where(y < -np.pi, -np.pi, y)
    return _scalar_or_array(np.where(inside, x, y))


def angular_difference(a: ArrayLike, b: ArrayLike) -> ArrayLike:
    """Signed difference ``a - b`` reduced into ``[-pi, pi)``."""
    return normalize_angle(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))


def disk_point(z: complex) -> complex:
    """Validate a point of the open unit disc."""
    z = complex(z)
    if not np.isfinite(z.real) or not np.isfinite(z.imag):
        raise ValueError(f"disc point must be finite, got {z!r}")
    if z.real**2 + z.imag**2 >= 1.0:
        raise ValueError(f"disc point must satisfy |z| < 1, got |z| = {abs(z)!r}")
    return z


def _check_rho(rho, name):
    rho = float(rho)
    if not (0.0 <= rho < 1.0):
        raise ValueError(f"{name} must lie in [0, 1), got {rho!r}")
    return rho


@dataclass(frozen=True)
class WcParams:
    """Wrapped Cauchy location ``mu`` and concentration ``rho``."""

    mu: float
    rho: float

    def __post_init__(self):
        object.__setattr__(self, "mu", normalize_angle(float(self.mu)))
        object.__setattr__(self, "rho", _check_rho(self.rho, "rho"))

    @property
    def phi(self) -> complex:
        return self.rho * complex(np.cos(self.mu), np.sin(self.mu))

    @classmethod
    def from_complex(cls, phi: complex) -> "WcParams":
        phi = disk_point(phi)
        return cls(float(np.angle(phi)), abs(phi))


@dataclass(frozen=True)
class EwcParams:
    """The four EWC parameters.

    ``(mu1, rho1)`` and ``(mu2, rho2)`` play symmetric roles; the complex
    form is ``phi_j = rho_j * exp(i mu_j)``.
    """

    mu1: float
    mu2: float
    rho1: float
    rho2: float

    def __post_init__(self):
        object.__setattr__(self, "mu1", normalize_angle(float(self.mu1)))
        object.__setattr__(self, "mu2", normalize_angle(float(self.mu2)))
        object.__setattr__(self, "rho1", _check_rho(self.rho1, "rho1"))
        object.__setattr__(self, "rho2", _check_rho(self.rho2, "rho2"))

    @property
    def phi1(self) -> complex:
        return self.rho1 * complex(np.cos(self.mu1), np.sin(self.mu1))

    @property
    def phi2(self) -> complex:
        return self.rho2 * complex(np.cos(self.mu2), np.sin(self.mu2))

    @classmethod
    def from_complex(cls, phi1: complex, phi2: complex) -> "EwcParams":
        phi1, phi2 = disk_point(phi1), disk_point(phi2)
        return cls(float(np.angle(phi1)), float(np.angle(phi2)), abs(phi1), abs(phi2))

    @classmethod
    def uniform(cls) -> "EwcParams":
        return cls(0.0, 0.0, 0.0, 0.0)

    def swapped(self) -> "EwcParams":
        return EwcParams(self.mu2, self.mu1, self.rho2, self.rho1)

    def canonical(self) -> "EwcParams":
        """Resolve the label exchange: ``rho1 >= rho2``, ties ordered by ``mu``."""
        if self.rho1 < self.rho2 or (self.rho1 == self.rho2 and self.mu1 > self.mu2):
            return self.swapped()
        return self

    def components(self) -> tuple[WcParams, WcParams]:
        return WcParams(self.mu1, self.rho1), WcParams(self.mu2, self.rho2)

    def is_equal_branch(self) -> bool:
        return abs(self.phi1 - self.phi2) < EQUAL_BRANCH_TOL

    def to_dict(self) -> dict:
        return {"mu1": self.mu1, "mu2": self.mu2, "rho1": self.rho1, "rho2": self.rho2}

    @classmethod
    def from_dict(cls, d: dict) -> "EwcParams":
        missing = {"mu1", "mu2", "rho1", "rho2"} - set(d)
        if missing:
            raise ValueError(f"missing parameter(s): {', '.join(sorted(missing))}")
        return cls(d["mu1"], d["mu2"], d["rho1"], d["rho2"])


def _kernel(theta, mu, rho):
    # 1 + rho^2 - 2 rho cos(theta - mu), written to avoid cancellation near rho -> 1
    s = np.sin(0.5 * (np.asarray(theta, dtype=float) - mu))
    return (1.0 - rho) ** 2 + 4.0 * rho * s * s


def _cross_term(p: EwcParams) -> float:
    # |1 - phi1 conj(phi2)|^2 = 1 + rho1^2 rho2^2 - 2 rho1 rho2 cos(mu1 - mu2)
    r = p.rho1 * p.rho2
    s = np.sin(0.5 * (p.mu1 - p.mu2))
    return (1.0 - r) ** 2 + 4.0 * r * s * s


def wc_density(theta: ArrayLike, p: WcParams) -> ArrayLike:
    """Wrapped Cauchy density ``(1 - rho^2) / (2 pi (1 + rho^2 - 2 rho cos(theta - mu)))``."""
    out = (1.0 - p.rho**2) / (TWO_PI * _kernel(theta, p.mu, p.rho))
    return _scalar_or_array(out)


def normalizing_constant(p: EwcParams) -> float:
    r12 = p.rho1 * p.rho2
    return float(
        (1.0 - p.rho1**2) * (1.0 - p.rho2**2) * _cross_term(p) / (TWO_PI * (1.0 - r12 * r12))
    )


def log_normalizing_constant(p: EwcParams) -> float:
    r12 = p.rho1 * p.rho2
    return float(
        np.log1p(-p.rho1**2)
        + np.log1p(-p.rho2**2)
        + np.log(_cross_term(p))
        - LOG_TWO_PI
        - np.log1p(-r12 * r12)
    )


def ewc_density(theta: ArrayLike, p: EwcParams) -> ArrayLike:
    """EWC density at ``theta``."""
    c = normalizing_constant(p)
    out = c / (_kernel(theta, p.mu1, p.rho1) * _kernel(theta, p.mu2, p.rho2))
    return _scalar_or_array(out)


def log_density(theta: ArrayLike, p: EwcParams) -> ArrayLike:
    out = (
        log_normalizing_constant(p)
        - np.log(_kernel(theta, p.mu1, p.rho1))
        - np.log(_kernel(theta, p.mu2, p.rho2))
    )
    return _scalar_or_array(out)


def ewc_density_complex(z, phi1: complex, phi2: complex, tol: float = 1e-12):
    """EWC density of ``z`` on the unit circle, complex parametrization.

    Density is with respect to arc length; ``phi1`` and ``phi2`` are points
    of the open unit disc.
    """
    phi1, phi2 = disk_point(phi1), disk_point(phi2)
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(np.abs(z) - 1.0) > tol):
        raise ValueError("z must lie on the unit circle")
    cross = phi1 * np.conj(phi2)
    out = (
        abs(1.0 - cross) ** 2
        / (TWO_PI * (1.0 - abs(cross) ** 2))
        * (1.0 - abs(phi1) ** 2)
        / np.abs(z - phi1) ** 2
        * (1.0 - abs(phi2) ** 2)
        / np.abs(z - phi2) ** 2
    )
    return _scalar_or_array(out)


# -- interval probabilities ---------------------------------------------------


def _tan_half(x, mu, side):
    """tan((x - mu)/2) with poles replaced by the one-sided limit.

    ``side`` is -1 for a left endpoint (limit from above) and +1 for a
    right endpoint (limit from below).
    """
    half = 0.5 * (np.asarray(x, dtype=float) - mu)
    pole = np.abs(np.cos(half)) < _TAN_POLE_TOL
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        t = np.tan(half)
    return np.where(pole, side * np.inf, t)


def _arctan_bracket(a, b, mu, rho):
    """``[arctan(k tan((x - mu)/2))]_a^b + A_mu`` with ``k = (1 + rho)/(1 - rho)``."""
    k = (1.0 + rho) / (1.0 - rho)
    ta = _tan_half(a, mu, -1.0)
    tb = _tan_half(b, mu, +1.0)
    jump = np.where(ta > tb, np.pi, 0.0)
    return np.arctan(k * tb) - np.arctan(k * ta) + jump


def _prob_general(a, b, p: EwcParams):
    r1, r2 = p.rho1, p.rho2
    d = p.mu1 - p.mu2
    cd = np.cos(d)
    big_d = (
        (r1**2 + r2**2) * (1.0 + r1**2 * r2**2)
        - 2.0 * r1 * r2 * (1.0 + r1**2) * (1.0 + r2**2) * cd
        + 4.0 * r1**2 * r2**2 * cd**2
    )
    c = normalizing_constant(p)
    log_ratio_b = np.log(_kernel(b, p.mu2, r2)) - np.log(_kernel(b, p.mu1, r1))
    log_ratio_a = np.log(_kernel(a, p.mu2, r2)) - np.log(_kernel(a, p.mu1, r1))
    term_log = r1 * r2 * np.sin(d) * (log_ratio_b - log_ratio_a)
    coef1 = 2.0 * r1 * (r1 * (1.0 + r2**2) - r2 * (1.0 + r1**2) * cd) / (1.0 - r1**2)
    coef2 = 2.0 * r2 * (r2 * (1.0 + r1**2) - r1 * (1.0 + r2**2) * cd) / (1.0 - r2**2)
    total = term_log
    if coef1 != 0.0:
        total = total + coef1 * _arctan_bracket(a, b, p.mu1, r1)
    if coef2 != 0.0:
        total = total + coef2 * _arctan_bracket(a, b, p.mu2, r2)
    return c / big_d * total


def _prob_equal(a, b, p: EwcParams):
    rho, mu = p.rho1, p.mu1
    c = normalizing_constant(p)

    def rational(x):
        return rho * np.sin(np.asarray(x, dtype=float) - mu) / _kernel(x, mu, rho)

    inner = rational(b) - rational(a) + (1.0 + rho**2) / (1.0 - rho**2) * _arctan_bracket(
        a, b, mu, rho
    )
    return 2.0 * c / (1.0 - rho**2) ** 2 * inner


_GL_T, _GL_W = np.polynomial.legendre.leggauss(24)
_GL_T = 0.5 * (_GL_T + 1.0)
_GL_W = 0.5 * _GL_W


def _log_arc_ratio(w, za, dz, width):
    """``log((zb - w)/(za - w)) - i width`` with the argument taken in ``(0, 2 pi)``.

    ``dz = zb - za`` is passed separately so short arcs keep their small
    imaginary part. For ``w`` in the open disc the ratio is never a positive
    real, so this branch is continuous in ``w``.
    """
    q = dz / (za - w)
    arg = np.angle(1.0 + q)
    arg = np.where(arg < 0.0, arg + TWO_PI, arg)
    small = np.abs(q) < 0.5
    with np.errstate(divide="ignore"):
        mod = np.where(small, 0.5 * np.log1p(2.0 * q.real + np.abs(q) ** 2), np.log(np.abs(1.0 + q)))
    return mod + 1j * (arg - width)


def _prob_divided(a, b, p: EwcParams):
    """Interval probability as a divided difference over ``(phi1, phi2)``.

    The unnormalized kernel equals ``1/(2 pi C) + 2 Re(sum_j res_j /(z - phi_j))``,
    so its integral is a divided difference of
    ``J(w) = w (L(w) - i(b - a)) / (i (1 - conj(phi1) w)(1 - conj(phi2) w))``.
    Close points use Gauss-Legendre on ``J'`` along the segment, which stays
    accurate down to ``phi1 = phi2``; distant points use the plain quotient.
    """
    f1, f2 = p.phi1, p.phi2
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    za, zb, width = np.exp(1j * a), np.exp(1j * b), b - a
    dz = 2j * np.sin(0.5 * width) * np.exp(0.5j * (a + b))
    c1, c2 = np.conj(f1), np.conj(f2)
    gap = abs(f1 - f2)
    if gap <= min(1.0 - p.rho1, 1.0 - p.rho2):
        w = f2 + _GL_T * (f1 - f2)
        den = (1.0 - c1 * w) * (1.0 - c2 * w)
        dh = (1.0 - c1 * c2 * w * w) / den**2
        dj = (dh * _log_arc_ratio(w, za, dz, width) + w / den * (1.0 / (za - w) - 1.0 / (zb - w))) / 1j
        dd = dj @ _GL_W
    else:
        w = np.array([f1, f2])
        j = w / ((1.0 - c1 * w) * (1.0 - c2 * w)) * _log_arc_ratio(w, za, dz, width) / 1j
        dd = (j[..., 0] - j[..., 1]) / (f1 - f2)
    return width[..., 0] / TWO_PI + 2.0 * normalizing_constant(p) * dd.real


def _prob(a, b, p: EwcParams):
    if p.phi1 == p.phi2:
        return _prob_equal(a, b, p)
    return _prob_divided(a, b, p)


def interval_probability(a: ArrayLike, b: ArrayLike, p: EwcParams) -> ArrayLike:
    """P(a < Theta <= b) for ``-pi <= a < b <= pi``.

    Intervals that wrap through ``-pi`` must be split by the caller. The
    endpoint ``b = pi`` is accepted and ``[-pi, pi]`` returns exactly 1.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(~np.isfinite(a)) or np.any(~np.isfinite(b)):
        raise ValueError("interval endpoints must be finite")
    if np.any(a < -np.pi) or np.any(b > np.pi):
        raise ValueError("interval endpoints must lie in [-pi, pi]")
    if np.any(a >= b):
        raise ValueError("interval_probability requires a < b")
    a, b = np.broadcast_arrays(a, b)
    full = (a == -np.pi) & (b == np.pi)
    at_pi = (b == np.pi) & ~full
    b_safe = np.where(b == np.pi, 0.0, b)
    a_safe = np.where(full, -1.0, a)
    direct = _prob(a_safe, np.where(at_pi, 0.0, b_safe), p)
    # P(a, pi] = 1 - P(-pi, a]
    lower_a = np.where(a_safe > -np.pi, a_safe, -np.pi + 1.0)
    complement = np.where(a_safe > -np.pi, 1.0 - _prob(-np.pi, lower_a, p), 1.0)
    out = np.where(full, 1.0, np.where(at_pi, complement, direct))
    return _scalar_or_array(np.clip(out, 0.0, 1.0))


def cdf(theta: ArrayLike, p: EwcParams) -> ArrayLike:
    """P(-pi < Theta <= theta); ``theta = pi`` is accepted and gives 1."""
    theta = np.asarray(theta, dtype=float)
    inside = (theta >= -np.pi) & (theta <= np.pi)
    theta = np.where(inside, theta, np.asarray(normalize_angle(theta)))
    lower = theta == -np.pi
    upper = theta == np.pi
    mid = np.where(lower | upper, 0.0, theta)
    vals = _prob(-np.pi, mid, p)
    out = np.where(lower, 0.0, np.where(upper, 1.0, vals))
    return _scalar_or_array(np.clip(out, 0.0, 1.0))
