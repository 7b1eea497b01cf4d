"""Exact and MCMC samplers for the wrapped Cauchy and EWC distributions.

Every sampler takes ``seed`` as either an integer or an existing
:class:`numpy.random.Generator`. Integer seeds drive a Philox
(counter-based) bit generator, so batches reproduce bit-for-bit across
platforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .core import (
    TWO_PI,
    EwcParams,
    WcParams,
    cdf,
    ewc_density,
    normalize_angle,
    normalizing_constant,
    _kernel,
)
from .shape import mixture_decomposition

SeedLike = Union[int, np.random.Generator, None]

METHODS = ("wc_exact", "rejection", "inverse_cdf", "mcmc", "mixture")


def make_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


def _seed_meta(seed: SeedLike) -> Optional[int]:
    return int(seed) if isinstance(seed, (int, np.integer)) else None


@dataclass
class SampleBatch:
    angles: np.ndarray
    method: str
    seed: Optional[int] = None
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.angles)

    def metadata(self) -> dict:
        return {"method": self.method, "seed": self.seed, "n": len(self), **self.diagnostics}


@dataclass(frozen=True)
class McmcConfig:
    burn_in: int = 1000
    thin: int = 10
    chain_count: int = 1

    def __post_init__(self):
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if self.chain_count < 1:
            raise ValueError("chain_count must be >= 1")


def _wc_draws(rng, mu, rho, n):
    u = rng.random(n)
    t = mu + 2.0 * np.arctan((1.0 - rho) / (1.0 + rho) * np.tan(np.pi * (u - 0.5)))
    return np.asarray(normalize_angle(t), dtype=float)


def sample_wc(p: WcParams, n: int, seed: SeedLike = None) -> SampleBatch:
    """Exact wrapped Cauchy draws by inverting the CDF."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = make_rng(seed)
    return SampleBatch(_wc_draws(rng, p.mu, p.rho, n), "wc_exact", _seed_meta(seed))


def rejection_bound(p: EwcParams) -> tuple[float, int]:
    """Envelope constant ``M`` and the proposal label (1 or 2) that minimises it.

    Proposing from ``WC(mu_j, rho_j)`` gives
    ``M = 2 pi C / ((1 - rho_j^2)(1 - rho_k)^2)``, attained at ``theta = mu_k``.
    """
    c = normalizing_constant(p)
    m1 = TWO_PI * c / ((1 - p.rho1**2) * (1 - p.rho2) ** 2)
    m2 = TWO_PI * c / ((1 - p.rho2**2) * (1 - p.rho1) ** 2)
    return (m1, 1) if m1 <= m2 else (m2, 2)


def sample_ewc_rejection(p: EwcParams, n: int, seed: SeedLike = None) -> SampleBatch:
    """Exact EWC draws by rejection from the more concentrated WC component."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = make_rng(seed)
    bound, label = rejection_bound(p)
    if label == 1:
        mu_prop, rho_prop, mu_other, rho_other = p.mu1, p.rho1, p.mu2, p.rho2
    else:
        mu_prop, rho_prop, mu_other, rho_other = p.mu2, p.rho2, p.mu1, p.rho1
    out = []
    have = proposed = 0
    while have < n:
        m = int(min(max(1.2 * (n - have) * bound + 64, 256), 4_000_000))
        t = _wc_draws(rng, mu_prop, rho_prop, m)
        u = rng.random(m)
        idx = np.flatnonzero(u * _kernel(t, mu_other, rho_other) <= (1.0 - rho_other) ** 2)
        need = n - have
        if idx.size >= need:
            # proposals after the last kept draw were never needed
            idx = idx[:need]
            proposed += int(idx[-1]) + 1
        else:
            proposed += m
        take = t[idx]
        out.append(take)
        have += take.size
    angles = np.concatenate(out)
    diag = {
        "acceptance_rate": n / proposed,
        "proposals": proposed,
        "bound": bound,
        "proposal_component": label,
    }
    return SampleBatch(angles, "rejection", _seed_meta(seed), diag)


class ConvergenceError(RuntimeError):
    pass


def invert_cdf(u: np.ndarray, p: EwcParams, tol: float = 1e-12, max_iter: int = 200) -> np.ndarray:
    """Solve ``cdf(theta) = u`` elementwise by safeguarded Newton-bisection."""
    if tol < 1e-12:
        raise ValueError("tol must be >= 1e-12")
    u = np.asarray(u, dtype=float)
    lo = np.full(u.shape, -np.pi)
    hi = np.full(u.shape, np.pi)
    # starting points from a tabulated inverse
    grid = np.linspace(-np.pi, np.pi, 1025)
    x = np.interp(u, np.asarray(cdf(grid, p)), grid)
    prev = np.full(u.shape, np.inf)
    best, best_g = x.copy(), np.full(u.shape, np.inf)
    active = np.ones(u.shape, dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            return best
        xa = x[idx]
        g = np.asarray(cdf(xa, p)) - u[idx]
        better = np.abs(g) < best_g[idx]
        best[idx[better]] = xa[better]
        best_g[idx[better]] = np.abs(g[better])
        done = np.abs(g) < tol
        active[idx[done]] = False
        pos = g > 0
        hi[idx] = np.where(pos, xa, hi[idx])
        lo[idx] = np.where(pos, lo[idx], xa)
        dens = np.asarray(ewc_density(xa, p))
        newton = xa - g / dens
        # bisect when Newton leaves the bracket or stalls
        slow = np.abs(g) > 0.5 * prev[idx]
        outside = (newton <= lo[idx]) | (newton >= hi[idx]) | ~np.isfinite(newton) | slow
        prev[idx] = np.abs(g)
        step = np.where(outside, 0.5 * (lo[idx] + hi[idx]), newton)
        x[idx] = np.where(done, xa, step)
        # brackets collapsed to neighbouring floats
        tiny = (hi[idx] - lo[idx]) <= 2 * np.spacing(np.maximum(np.abs(lo[idx]), np.abs(hi[idx])))
        active[idx[tiny]] = False
    if np.any(active):
        raise ConvergenceError(f"CDF inversion did not converge after {max_iter} iterations")
    return x


def sample_ewc_invcdf(p: EwcParams, n: int, seed: SeedLike = None, tol: float = 1e-12) -> SampleBatch:
    """Exact EWC draws by numerically inverting the closed-form CDF."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = make_rng(seed)
    u = rng.random(n)
    x = invert_cdf(u, p, tol=tol)
    x = np.where(x >= np.pi, -np.pi, x)
    return SampleBatch(x, "inverse_cdf", _seed_meta(seed), {"tol": tol})


def effective_sample_size(x: np.ndarray) -> float:
    """ESS from the initial positive sequence of autocorrelation pairs."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 4:
        return float(n)
    x = x - x.mean()
    var = np.dot(x, x) / n
    if var == 0:
        return float(n)
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, size)
    acf = np.fft.irfft(f * np.conj(f), size)[:n] / (n * var)
    total = 0.0
    for k in range(0, n - 1, 2):
        pair = acf[k] + acf[k + 1]
        if pair <= 0:
            break
        total += pair
    tau = max(2.0 * total - 1.0, 1.0)
    return float(n / tau)


def _ess_circular(angles: np.ndarray) -> float:
    return min(effective_sample_size(np.cos(angles)), effective_sample_size(np.sin(angles)))


def _run_chain(rng, p: EwcParams, n: int, cfg: McmcConfig):
    total = cfg.burn_in + n * cfg.thin
    props = _wc_draws(rng, p.mu2, p.rho2, total + 1)
    logu = np.log(rng.random(total))
    # log-likelihood of observing mu1 under WC(nu, rho1), up to a constant
    loglik = -np.log(_kernel(p.mu1, props, p.rho1))
    cur = 0
    kept = np.empty(n)
    accepted = 0
    j = 0
    for i in range(total):
        cand = i + 1
        if logu[i] < loglik[cand] - loglik[cur]:
            cur = cand
            accepted += 1
        if i >= cfg.burn_in and (i - cfg.burn_in) % cfg.thin == cfg.thin - 1:
            kept[j] = props[cur]
            j += 1
    return kept, accepted / total


def sample_ewc_mcmc(
    p: EwcParams, n: int, cfg: McmcConfig = McmcConfig(), seed: SeedLike = None
) -> SampleBatch:
    """Independence Metropolis-Hastings draws of the EWC.

    The EWC is the posterior of a WC location ``nu`` with prior
    ``WC(mu2, rho2)`` after observing ``mu1`` from ``WC(nu, rho1)``.
    Proposals come from the prior, so the acceptance ratio is the
    likelihood ratio alone.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = make_rng(seed)
    sizes = [n // cfg.chain_count + (1 if k < n % cfg.chain_count else 0) for k in range(cfg.chain_count)]
    children = rng.spawn(cfg.chain_count) if cfg.chain_count > 1 else [rng]
    chains, rates = [], []
    for size, child in zip(sizes, children):
        if size == 0:
            continue
        kept, rate = _run_chain(child, p, size, cfg)
        chains.append(kept)
        rates.append(rate)
    angles = np.concatenate(chains)
    ess = sum(_ess_circular(c) for c in chains)
    diag = {
        "acceptance_rate": float(np.mean(rates)),
        "ess": ess,
        "burn_in": cfg.burn_in,
        "thin": cfg.thin,
        "chain_count": cfg.chain_count,
    }
    return SampleBatch(angles, "mcmc", _seed_meta(seed), diag)


def sample_bayes_joint(
    mu2: float, rho1: float, rho2: float, n: int, seed: SeedLike = None
) -> tuple[np.ndarray, np.ndarray]:
    """Forward draws of ``(nu, Theta)``: ``nu ~ WC(mu2, rho2)``, ``Theta | nu ~ WC(nu, rho1)``."""
    rng = make_rng(seed)
    nu = _wc_draws(rng, mu2, rho2, n)
    theta = np.asarray(normalize_angle(nu + _wc_draws(rng, 0.0, rho1, n)))
    return nu, theta


def sample_symmetric_mixture(
    mu: float, rho1: float, rho2: float, n: int, seed: SeedLike = None
) -> SampleBatch:
    """Exact draws of the antipodal symmetric submodel via its WC mixture form."""
    if n < 1:
        raise ValueError("n must be >= 1")
    w, c1, c2 = mixture_decomposition(mu, rho1, rho2)
    rng = make_rng(seed)
    first = rng.random(n) < w
    a = _wc_draws(rng, c1.mu, c1.rho, n)
    b = _wc_draws(rng, c2.mu, c2.rho, n)
    angles = np.where(first, a, b)
    diag = {"weight": w, "first_component_fraction": float(first.mean())}
    return SampleBatch(angles, "mixture", _seed_meta(seed), diag)


def sample(p: EwcParams, n: int, method: str = "rejection", seed: SeedLike = None, **kw) -> SampleBatch:
    """Dispatch to a sampler by name."""
    if method == "rejection":
        return sample_ewc_rejection(p, n, seed)
    if method == "inverse_cdf":
        return sample_ewc_invcdf(p, n, seed, **kw)
    if method == "mcmc":
        return sample_ewc_mcmc(p, n, kw.get("cfg", McmcConfig()), seed)
    if method == "wc_exact":
        if p.rho2 != 0.0 and p.rho1 != 0.0:
            raise ValueError("wc_exact needs rho1 = 0 or rho2 = 0")
        wc = WcParams(p.mu1, p.rho1) if p.rho2 == 0.0 else WcParams(p.mu2, p.rho2)
        return sample_wc(wc, n, seed)
    if method == "mixture":
        d = abs(float(normalize_angle(p.mu1 - p.mu2)))
        if abs(d - np.pi) > 1e-12:
            raise ValueError("mixture sampling needs mu1 = mu2 + pi")
        return sample_symmetric_mixture(p.mu2, -p.rho1, p.rho2, n, seed)
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
