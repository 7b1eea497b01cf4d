"""The extended model on the unit sphere of R^d.

Dimension follows the model's own convention: ``d`` is the dimension of
the ambient space, so ``d = 2`` is the circle and ``d = 3`` the ordinary
sphere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .sampling import McmcConfig, SeedLike, make_rng

UNIT_TOL = 1e-12


def unit_vector(v, tol: float = UNIT_TOL) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size < 2:
        raise ValueError("unit vectors need at least two coordinates")
    if abs(np.linalg.norm(v) - 1.0) > tol:
        raise ValueError(f"vector norm {np.linalg.norm(v)!r} differs from 1")
    return v


@dataclass(frozen=True)
class SphereParams:
    rho1: float
    eta1: tuple
    rho2: float
    eta2: tuple

    def __post_init__(self):
        e1, e2 = unit_vector(self.eta1), unit_vector(self.eta2)
        if e1.size != e2.size:
            raise ValueError("eta1 and eta2 must have the same dimension")
        for name in ("rho1", "rho2"):
            r = float(getattr(self, name))
            if not 0.0 <= r < 1.0:
                raise ValueError(f"{name} must lie in [0, 1)")
            object.__setattr__(self, name, r)
        object.__setattr__(self, "eta1", tuple(float(x) for x in e1))
        object.__setattr__(self, "eta2", tuple(float(x) for x in e2))

    @property
    def d(self) -> int:
        return len(self.eta1)

    def to_dict(self) -> dict:
        return {"d": self.d, "rho1": self.rho1, "eta1": list(self.eta1), "rho2": self.rho2, "eta2": list(self.eta2)}

    @classmethod
    def from_dict(cls, d: dict) -> "SphereParams":
        missing = {"rho1", "eta1", "rho2", "eta2"} - set(d)
        if missing:
            raise ValueError(f"missing parameter(s): {', '.join(sorted(missing))}")
        p = cls(d["rho1"], tuple(d["eta1"]), d["rho2"], tuple(d["eta2"]))
        if "d" in d and int(d["d"]) != p.d:
            raise ValueError(f"d = {d['d']} does not match the length of eta1 ({p.d})")
        return p


def surface_area(d: int) -> float:
    """Area of the unit sphere in R^d, ``2 pi^(d/2) / Gamma(d/2)``."""
    if d < 2:
        raise ValueError("d must be >= 2")
    return float(np.exp(np.log(2.0) + 0.5 * d * np.log(np.pi) - gammaln(0.5 * d)))


def _points(x, d):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != d:
        raise ValueError(f"points have dimension {x.shape[-1]}, expected {d}")
    return x


def _dist_sq(x, rho, eta):
    # ||x - rho eta||^2 = (1 - rho)^2 + rho ||x - eta||^2 for unit x and eta; no cancellation near rho -> 1
    diff = x - np.asarray(eta)
    return (1.0 - rho) ** 2 + rho * np.sum(diff * diff, axis=-1)


def exit_density(x, rho1: float, eta1):
    """Harmonic measure on the sphere seen from ``rho1 * eta1``."""
    eta1 = unit_vector(eta1)
    d = eta1.size
    x = _points(x, d)
    out = (1.0 - rho1**2) / (surface_area(d) * _dist_sq(x, rho1, eta1) ** (0.5 * d))
    return float(out) if np.ndim(out) == 0 else out


def sphere_density(x, p: SphereParams):
    d = p.d
    x = _points(x, d)
    e1, e2 = np.asarray(p.eta1), np.asarray(p.eta2)
    r12 = p.rho1 * p.rho2
    lead = _dist_sq(e1, r12, e2) ** (0.5 * d) / (1.0 - r12**2)
    out = (
        lead
        / surface_area(d)
        * (1.0 - p.rho1**2)
        / _dist_sq(x, p.rho1, e1) ** (0.5 * d)
        * (1.0 - p.rho2**2)
        / _dist_sq(x, p.rho2, e2) ** (0.5 * d)
    )
    return float(out) if np.ndim(out) == 0 else out


def sample_uniform_sphere(d: int, n: int, seed: SeedLike = None) -> np.ndarray:
    if d < 2:
        raise ValueError("d must be >= 2")
    rng = make_rng(seed)
    g = rng.standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _cauchy_rho(rho1: float, d: int) -> float:
    # matches the peak-to-antipode ratio of the exit law; exact for d = 2
    k = ((1.0 - rho1) / (1.0 + rho1)) ** (d / (2.0 * (d - 1)))
    return (1.0 - k) / (1.0 + k)


def _log_exit_over_cauchy(t, rho1: float, rho_c: float, d: int):
    """log of exit density over spherical Cauchy density at ``t = x . eta``."""
    return (
        np.log1p(-rho1 * rho1)
        - 0.5 * d * np.log(1.0 + rho1 * rho1 - 2.0 * rho1 * t)
        - (d - 1) * (np.log1p(-rho_c * rho_c) - np.log(1.0 + rho_c * rho_c - 2.0 * rho_c * t))
    )


def exit_bound(rho1: float, d: int) -> float:
    """Rejection envelope of the exit law against its spherical Cauchy proposal.

    The log density ratio depends on ``t = x . eta`` only and has at most one
    interior stationary point, so the supremum is taken over that point and
    the two poles.
    """
    if rho1 == 0.0:
        return 1.0
    rc = _cauchy_rho(rho1, d)
    a, b = 1.0 + rho1 * rho1, 2.0 * rho1
    ac, bc = 1.0 + rc * rc, 2.0 * rc
    cands = [-1.0, 1.0]
    den = b * bc * (0.5 * d - (d - 1))
    if den != 0.0:
        t = (0.5 * d * b * ac - (d - 1) * bc * a) / den
        if -1.0 < t < 1.0:
            cands.append(t)
    return float(np.exp(max(_log_exit_over_cauchy(np.array(cands), rho1, rc, d))))


def sample_spherical_cauchy(rho: float, eta, n: int, seed: SeedLike = None) -> np.ndarray:
    """Draws with density ``((1 - rho^2)/||x - rho eta||^2)^(d-1) / A``.

    Obtained by pushing uniform points through the ball automorphism that
    sends the origin to ``rho * eta``.
    """
    eta = unit_vector(eta)
    y = sample_uniform_sphere(eta.size, n, seed)
    a = rho * eta
    ay = y @ a
    return ((1.0 - rho * rho) * y + 2.0 * (1.0 + ay)[:, None] * a) / (1.0 + 2.0 * ay + rho * rho)[:, None]


def sample_exit(rho1: float, eta1, n: int, seed: SeedLike = None, return_rate: bool = False):
    """Exact draws from the exit distribution.

    Rejection from a spherical Cauchy proposal whose concentration is tuned
    to the exit law; for ``d = 2`` the two coincide and nothing is rejected.
    """
    if not 0.0 <= rho1 < 1.0:
        raise ValueError("rho1 must lie in [0, 1)")
    eta1 = unit_vector(eta1)
    d = eta1.size
    rng = make_rng(seed)
    rc = _cauchy_rho(rho1, d)
    log_bound = np.log(exit_bound(rho1, d))
    out = []
    have = proposed = 0
    while have < n:
        m = int(min(max(1.2 * (n - have) * np.exp(log_bound) + 64, 256), 2_000_000))
        x = sample_spherical_cauchy(rc, eta1, m, rng)
        logu = np.log(rng.random(m))
        ok = np.flatnonzero(logu <= _log_exit_over_cauchy(x @ eta1, rho1, rc, d) - log_bound)
        need = n - have
        if ok.size >= need:
            ok = ok[:need]
            proposed += int(ok[-1]) + 1
        else:
            proposed += m
        out.append(x[ok])
        have += ok.size
    pts = np.concatenate(out) if out else np.empty((0, d))
    if return_rate:
        return pts, n / proposed if proposed else 1.0
    return pts


def sample_sphere_mcmc(
    p: SphereParams, n: int, cfg: McmcConfig = McmcConfig(), seed: SeedLike = None, return_rate: bool = False
):
    """Independence Metropolis-Hastings for the extended spherical model.

    The target is the posterior of ``xi`` under prior ``Exit(rho2 eta2)``
    after observing ``eta1`` from ``Exit(rho1 xi)``; the prior is the
    proposal, so only the likelihood ratio enters.
    """
    rng = make_rng(seed)
    sizes = [n // cfg.chain_count + (1 if k < n % cfg.chain_count else 0) for k in range(cfg.chain_count)]
    children = rng.spawn(cfg.chain_count) if cfg.chain_count > 1 else [rng]
    e1 = np.asarray(p.eta1)
    d = p.d
    chains, rates = [], []
    for size, child in zip(sizes, children):
        if size == 0:
            continue
        total = cfg.burn_in + size * cfg.thin
        props = sample_exit(p.rho2, p.eta2, total + 1, child)
        logu = np.log(child.random(total))
        loglik = -0.5 * d * np.log(_dist_sq(props, p.rho1, e1))
        cur = 0
        kept = np.empty((size, d))
        accepted = j = 0
        for i in range(total):
            if logu[i] < loglik[i + 1] - loglik[cur]:
                cur = i + 1
                accepted += 1
            if i >= cfg.burn_in and (i - cfg.burn_in) % cfg.thin == cfg.thin - 1:
                kept[j] = props[cur]
                j += 1
        chains.append(kept)
        rates.append(accepted / total)
    pts = np.concatenate(chains)
    if return_rate:
        return pts, float(np.mean(rates))
    return pts


def mc_normalization(p: SphereParams, n: int, seed: SeedLike = None) -> tuple[float, float]:
    """Importance-sampling estimate of the total mass and its standard error.

    The proposal mixes the uniform law with the two exit laws in equal
    parts, which keeps the weights bounded even when the density is sharply
    peaked near ``eta1`` or ``eta2``.
    """
    rng = make_rng(seed)
    d = p.d
    k = rng.multinomial(n, [1 / 3, 1 / 3, 1 / 3])
    x = np.concatenate(
        [
            sample_uniform_sphere(d, k[0], rng),
            sample_exit(p.rho1, p.eta1, k[1], rng),
            sample_exit(p.rho2, p.eta2, k[2], rng),
        ]
    )
    q = (1.0 / surface_area(d) + exit_density(x, p.rho1, p.eta1) + exit_density(x, p.rho2, p.eta2)) / 3.0
    w = sphere_density(x, p) / q
    return float(w.mean()), float(w.std(ddof=1) / np.sqrt(n))
