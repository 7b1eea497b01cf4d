"""Symmetry, modality and the symmetric submodels of the EWC family."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np

from .core import (
    TWO_PI,
    EwcParams,
    WcParams,
    angular_difference,
    ewc_density,
    normalize_angle,
    wc_density,
    _kernel,
)

SYMMETRY_TOL = 1e-12
BOUNDARY_TOL = 1e-10
STATIONARY_RESIDUAL_TOL = 1e-9


class Symmetry(NamedTuple):
    symmetric: bool
    axis: Optional[float]


def is_symmetric(p: EwcParams, tol: float = SYMMETRY_TOL) -> Symmetry:
    """Test the four symmetry conditions and report an axis of symmetry.

    The density is symmetric iff one concentration vanishes, the locations
    coincide or are antipodal, or the concentrations are equal.
    """
    if p.rho1 <= tol and p.rho2 <= tol:
        return Symmetry(True, p.mu1)
    if p.rho2 <= tol:
        return Symmetry(True, p.mu1)
    if p.rho1 <= tol:
        return Symmetry(True, p.mu2)
    d = abs(angular_difference(p.mu1, p.mu2))
    if d <= tol or abs(d - np.pi) <= tol:
        return Symmetry(True, p.mu1)
    if abs(p.rho1 - p.rho2) <= tol:
        s = np.exp(1j * p.mu1) + np.exp(1j * p.mu2)
        return Symmetry(True, float(np.angle(s)))
    return Symmetry(False, None)


@dataclass(frozen=True)
class StationaryCoeffs:
    """Coefficients of ``a0 + a1 cos t + a2 sin t + a3 cos t sin t + a4 cos^2 t``.

    The equation is written in the frame ``t = theta - shift`` where
    ``shift = mu2``. Its left side is a positive multiple of the density
    derivative.
    """

    a0: float
    a1: float
    a2: float
    a3: float
    a4: float
    shift: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.a0, self.a1, self.a2, self.a3, self.a4)

    def residual(self, t):
        """Left-hand side evaluated in the shifted frame."""
        c, s = np.cos(t), np.sin(t)
        return self.a0 + self.a1 * c + self.a2 * s + self.a3 * c * s + self.a4 * c * c

    def residual_derivative(self, t):
        return (
            -self.a1 * np.sin(t)
            + self.a2 * np.cos(t)
            + self.a3 * np.cos(2 * t)
            - self.a4 * np.sin(2 * t)
        )

    def quartic(self) -> np.ndarray:
        """Coefficients (highest degree first) after ``x = tan(t/2)``."""
        a0, a1, a2, a3, a4 = self.as_tuple()
        return np.array(
            [
                a0 - a1 + a4,
                2 * a2 - 2 * a3,
                2 * a0 - 2 * a4,
                2 * a2 + 2 * a3,
                a0 + a1 + a4,
            ]
        )


def stationary_coeffs(p: EwcParams) -> StationaryCoeffs:
    r1, r2 = p.rho1, p.rho2
    m = angular_difference(p.mu1, p.mu2)
    sm, cm = np.sin(m), np.cos(m)
    # at exact symmetry the shifted location is 0 or -pi; keep sin exactly 0
    if m == 0.0 or m == -np.pi:
        sm = 0.0
    return StationaryCoeffs(
        a0=2 * r1 * r2 * sm,
        a1=r1 * (1 + r2**2) * sm,
        a2=-r1 * (1 + r2**2) * cm - r2 * (1 + r1**2),
        a3=4 * r1 * r2 * cm,
        a4=-4 * r1 * r2 * sm,
        shift=p.mu2,
    )


def quartic_discriminant(coeffs) -> float:
    """Discriminant of ``a x^4 + b x^3 + c x^2 + d x + e``.

    The sixteen terms are summed in exact rational arithmetic on the given
    (binary) coefficients. Near a triple root the float sum is swamped by
    cancellation, while the discriminant itself is insensitive to rounding
    of the coefficients there, so exact evaluation recovers its sign.
    """
    a, b, c, d, e = (Fraction(float(v)) for v in coeffs)
    return float(
        256 * a**3 * e**3
        - 192 * a**2 * b * d * e**2
        - 128 * a**2 * c**2 * e**2
        + 144 * a**2 * c * d**2 * e
        - 27 * a**2 * d**4
        + 144 * a * b**2 * c * e**2
        - 6 * a * b**2 * d**2 * e
        - 80 * a * b * c**2 * d * e
        + 18 * a * b * c * d**3
        + 16 * a * c**4 * e
        - 4 * a * c**3 * d**2
        - 27 * b**4 * e**2
        + 18 * b**3 * c * d * e
        - 4 * b**3 * d**3
        - 4 * b**2 * c**3 * e
        + b**2 * c**2 * d**2
    )


def discriminant(p: EwcParams) -> float:
    """Quartic discriminant of the stationary-point equation; > 0 means bimodal."""
    return quartic_discriminant(stationary_coeffs(p).quartic())


@dataclass
class ModalityReport:
    discriminant: float
    classification: str
    modes: list = field(default_factory=list)
    antimodes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "discriminant": self.discriminant,
            "classification": self.classification,
            "modes": [{"theta": t, "density": f} for t, f in self.modes],
            "antimodes": [{"theta": t, "density": f} for t, f in self.antimodes],
        }


def classify(p: EwcParams, tol: float = BOUNDARY_TOL) -> tuple[float, str]:
    q = stationary_coeffs(p).quartic()
    disc = quartic_discriminant(q)
    scale = float(np.max(np.abs(q))) ** 6
    if abs(disc) < tol * scale:
        return disc, "boundary"
    return disc, "bimodal" if disc > 0 else "unimodal"


def _polish(sc: StationaryCoeffs, t: float, iters: int = 60) -> float:
    for _ in range(iters):
        g = sc.residual_derivative(t)
        if g == 0.0:
            break
        step = sc.residual(t) / g
        step = float(np.clip(step, -0.5, 0.5))
        t -= step
        if abs(step) < 1e-15:
            break
    return float(normalize_angle(t))


def stationary_points(p: EwcParams) -> tuple[list[float], list[float]]:
    """Modes and antimodes (as angles) found from the tan-half-angle quartic.

    Candidate roots are polished by Newton steps on the trigonometric form,
    ``t = pi`` is always tried (the substitution cannot represent it), and
    each survivor is classified by the sign of the density's second
    derivative there.
    """
    sc = stationary_coeffs(p)
    q = sc.quartic()
    scale = float(np.max(np.abs(q)))
    qt = np.where(np.abs(q) < 1e-15 * scale, 0.0, q)
    nz = np.flatnonzero(qt)
    roots = np.roots(qt[nz[0]:]) if nz.size and nz[0] < 4 else np.array([])
    cands = [np.pi]
    for r in roots:
        if abs(r.imag) <= 1e-3 * (1.0 + abs(r)):
            cands.append(2.0 * np.arctan(r.real))
    found: list[float] = []
    for t0 in cands:
        t = _polish(sc, t0)
        if abs(sc.residual(t)) > STATIONARY_RESIDUAL_TOL:
            continue
        if any(abs(angular_difference(t, u)) < 1e-7 for u in found):
            continue
        found.append(t)
    modes, antimodes = [], []
    for t in sorted(found):
        curv = sc.residual_derivative(t)
        if abs(curv) < 1e-12:
            continue
        theta = float(normalize_angle(t + sc.shift))
        (modes if curv < 0 else antimodes).append(theta)
    return modes, antimodes


def modality(p: EwcParams) -> ModalityReport:
    """Classify the density as unimodal or bimodal and locate its extrema."""
    if p.rho1 == 0.0 and p.rho2 == 0.0:
        raise ValueError("the circular uniform distribution has no modes")
    disc, label = classify(p)
    modes, antimodes = stationary_points(p)
    return ModalityReport(
        discriminant=disc,
        classification=label,
        modes=[(t, float(ewc_density(t, p))) for t in modes],
        antimodes=[(t, float(ewc_density(t, p))) for t in antimodes],
    )


def count_modes_on_grid(p: EwcParams, n: int = 100_000) -> int:
    """Brute-force count of strict local maxima of the density on a grid."""
    t = -np.pi + TWO_PI * np.arange(n) / n
    f = ewc_density(t, p)
    return int(np.sum((f > np.roll(f, 1)) & (f > np.roll(f, -1))))


# -- symmetric submodels --------------------------------------------------------


def symmetric1_density(theta, mu: float, rho1: float, rho2: float):
    """Symmetric density about ``mu`` with ``-1 < rho1 < 1`` and ``0 <= rho2 < 1``.

    Negative ``rho1`` is the antipodal-location case.
    """
    if not -1.0 < rho1 < 1.0:
        raise ValueError("rho1 must lie in (-1, 1)")
    if not 0.0 <= rho2 < 1.0:
        raise ValueError("rho2 must lie in [0, 1)")
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta - mu)
    out = (
        (1 - rho1 * rho2)
        / (TWO_PI * (1 + rho1 * rho2))
        * (1 - rho1**2)
        / (1 + rho1**2 - 2 * rho1 * c)
        * (1 - rho2**2)
        / _kernel(theta, mu, rho2)
    )
    return float(out) if out.ndim == 0 else out


def symmetric1_params(mu: float, rho1: float, rho2: float) -> EwcParams:
    """The equivalent four-parameter form of :func:`symmetric1_density`."""
    if rho1 >= 0:
        return EwcParams(mu, mu, rho1, rho2)
    return EwcParams(mu + np.pi, mu, -rho1, rho2)


def mixture_weight(rho1: float, rho2: float) -> float:
    if rho1 == 0.0:
        return 0.0
    return -rho1 * (1 - rho2**2) / ((1 + rho1 * rho2) * (rho2 - rho1))


def mixture_decomposition(mu: float, rho1: float, rho2: float) -> tuple[float, WcParams, WcParams]:
    """Write the ``rho1 <= 0`` symmetric density as ``p WC1 + (1 - p) WC2``.

    The first component has concentration ``|rho1|`` centred at ``mu + pi``,
    which is the wrapped Cauchy with negative concentration ``rho1`` at ``mu``.
    """
    if rho1 > 0:
        raise ValueError("the mixture representation needs rho1 <= 0")
    if not -1.0 < rho1:
        raise ValueError("rho1 must exceed -1")
    w = mixture_weight(rho1, rho2)
    return w, WcParams(mu + np.pi, -rho1), WcParams(mu, rho2)


def mixture_density(theta, mu: float, rho1: float, rho2: float):
    w, c1, c2 = mixture_decomposition(mu, rho1, rho2)
    return w * wc_density(theta, c1) + (1 - w) * wc_density(theta, c2)


def symmetric2_threshold(rho: float) -> float:
    """Largest ``|mu1 - mu2|`` keeping the ``rho1 = rho2 = rho`` density unimodal."""
    return float(2.0 * np.arccos(np.clip(2 * rho / (1 + rho**2), 0.0, 1.0)))


def symmetric2_unimodality(rho: float, dmu: float) -> bool:
    return abs(float(normalize_angle(dmu))) <= symmetric2_threshold(rho)


def equal_rho_threshold(dmu: float, tol: float = 1e-13) -> float:
    """Bisect for the ``rho1 = rho2`` value where the discriminant changes sign.

    Independent of :func:`symmetric2_threshold`, which inverts the same
    boundary in closed form.
    """
    dmu = abs(float(normalize_angle(dmu)))
    if dmu == 0.0:
        raise ValueError("equal locations are unimodal for every rho")

    def disc(r):
        return discriminant(EwcParams(dmu, 0.0, r, r))

    lo, hi = 0.0, 1.0 - 1e-9
    if disc(hi) <= 0:
        raise ValueError("no sign change on (0, 1)")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if disc(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
