"""Monte Carlo checks of the EWC law by conditioning planar Brownian motion.

Two constructions are simulated and compared to the closed-form density:

* a discretised Brownian path started at ``phi1`` records its first exit
  angle from the unit circle and is kept only if it later leaves the
  circle of radius ``1/rho2`` within ``epsilon`` of ``mu2``;
* independent exact wrapped Cauchy points ``Z1``, ``Z2`` are kept when
  they fall within ``epsilon`` of each other.

Both condition on a null event through an accept-if-close window, which
biases the density by ``O(epsilon^2)``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numba
import numpy as np
from scipy import stats

from .core import EwcParams, cdf, interval_probability, normalize_angle
from .sampling import SampleBatch, SeedLike, _seed_meta, _wc_draws, make_rng

MIN_ACCEPTANCE = 1e-5


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class WalkConfig:
    """Discretisation of the Brownian path.

    ``step_std`` is the per-axis increment scale near the target circle.
    With ``adaptive`` on, the scale grows to ``step_fraction`` times the
    distance to the target circle; Gaussian increments are exact for any
    time step, and with the default fraction a missed crossing needs a
    ten-sigma excursion.
    """

    step_std: float = 0.005
    max_steps: int = 5_000_000
    epsilon: float = 0.05
    adaptive: bool = True
    step_fraction: float = 0.1
    batch_size: int = 200_000

    def __post_init__(self):
        if self.step_std <= 0:
            raise ValueError("step_std must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass
class OracleReport:
    n_accepted: int
    n_attempted: int
    l1_distance: float
    ks_statistic: float
    ks_pvalue: float
    bin_count: int

    def to_dict(self) -> dict:
        return asdict(self)


@numba.njit(cache=True, nogil=True)
def _walk_kernel(xs, ys, radius, step_std, step_fraction, adaptive, max_steps, rng):
    n = xs.size
    hit = np.empty((n, 2))
    end = np.empty((n, 2))
    stuck = 0
    for i in range(n):
        x = xs[i]
        y = ys[i]
        r = np.hypot(x, y)
        done = False
        for _ in range(max_steps):
            s = step_std
            if adaptive:
                s = max(step_std, step_fraction * (radius - r))
            nx = x + s * rng.standard_normal()
            ny = y + s * rng.standard_normal()
            rn = np.hypot(nx, ny)
            if rn >= radius:
                # linear interpolation of the radius along the last segment
                t = (radius - r) / (rn - r)
                cx = x + t * (nx - x)
                cy = y + t * (ny - y)
                c = np.hypot(cx, cy)
                hit[i, 0] = radius * cx / c
                hit[i, 1] = radius * cy / c
                end[i, 0] = nx
                end[i, 1] = ny
                done = True
                break
            x = nx
            y = ny
            r = rn
        if not done:
            stuck += 1
    return hit, end, stuck


def walk_to_circle(
    start: np.ndarray, radius: float, cfg: WalkConfig, rng, jobs: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Run walkers from ``start`` (shape ``(N, 2)``) until each leaves the circle.

    Returns the crossing points projected onto the circle and the raw
    end positions (just outside the circle) for continuing the paths.
    With ``jobs > 1`` the walkers are split over threads, each with its own
    child generator, so results are reproducible for a fixed ``jobs``.
    """
    pos = np.ascontiguousarray(np.asarray(start, dtype=float).reshape(-1, 2))
    if np.any(np.hypot(pos[:, 0], pos[:, 1]) >= radius):
        raise ValueError("walkers must start strictly inside the circle")

    def run(chunk, g):
        return _walk_kernel(
            chunk[:, 0].copy(), chunk[:, 1].copy(), float(radius), cfg.step_std,
            cfg.step_fraction, cfg.adaptive, cfg.max_steps, g,
        )

    if jobs > 1 and len(pos) >= 2 * jobs:
        chunks = np.array_split(pos, jobs)
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(run, chunks, rng.spawn(jobs)))
        hit = np.concatenate([p[0] for p in parts])
        end = np.concatenate([p[1] for p in parts])
        stuck = sum(p[2] for p in parts)
    else:
        hit, end, stuck = run(pos, rng)
    if stuck:
        raise OracleError(f"{stuck} walkers still inside after {cfg.max_steps} steps")
    return hit, end


def simulate_exit(start, radius: float, cfg: WalkConfig, rng: SeedLike = None) -> float:
    """Exit angle of a single walker."""
    hit, _ = walk_to_circle(np.asarray(start, dtype=float)[None, :], radius, cfg, make_rng(rng))
    return float(normalize_angle(np.arctan2(hit[0, 1], hit[0, 0])))


def simulate_exits(
    start, radius: float, n: int, cfg: WalkConfig, rng: SeedLike = None, jobs: int = 1
) -> np.ndarray:
    """Exit angles of ``n`` independent walkers from a common start."""
    rng = make_rng(rng)
    out = []
    done = 0
    while done < n:
        m = min(cfg.batch_size, n - done)
        hit, _ = walk_to_circle(np.tile(np.asarray(start, dtype=float), (m, 1)), radius, cfg, rng, jobs)
        out.append(np.arctan2(hit[:, 1], hit[:, 0]))
        done += m
    return np.asarray(normalize_angle(np.concatenate(out)))


def histogram_l1(angles: np.ndarray, p: EwcParams, bins: int = 72) -> float:
    """L1 distance between the histogram density and the EWC density.

    Each bin is compared with the exact bin probability, so the value is
    the L1 distance between the histogram and the bin-averaged density.
    """
    edges = np.linspace(-np.pi, np.pi, bins + 1)
    counts, _ = np.histogram(angles, bins=edges)
    probs = np.asarray(interval_probability(edges[:-1], edges[1:], p))
    return float(np.sum(np.abs(counts / len(angles) - probs)))


def _report(angles, attempts, p, bins):
    ks = stats.kstest(angles, lambda x: cdf(x, p))
    return OracleReport(
        n_accepted=len(angles),
        n_attempted=attempts,
        l1_distance=histogram_l1(angles, p, bins),
        ks_statistic=float(ks.statistic),
        ks_pvalue=float(ks.pvalue),
        bin_count=bins,
    )


def _check_rate(accepted, attempts):
    if attempts and accepted / attempts < MIN_ACCEPTANCE:
        raise OracleError(
            f"acceptance rate {accepted / attempts:.2e} below {MIN_ACCEPTANCE:.0e}; widen epsilon"
        )


def conditional_exit_sample(
    p: EwcParams, n_target: int, cfg: WalkConfig = WalkConfig(), seed: SeedLike = None, bins: int = 72,
    jobs: int = 1,
) -> tuple[SampleBatch, OracleReport]:
    """Unit-circle exit angles of paths whose later exit from radius ``1/rho2`` is near ``mu2``."""
    if p.rho2 <= 0:
        raise ValueError("the walk construction needs rho2 > 0")
    rng = make_rng(seed)
    outer = 1.0 / p.rho2
    start = p.rho1 * np.array([np.cos(p.mu1), np.sin(p.mu1)])
    kept = []
    have = attempts = 0
    while have < n_target:
        m = cfg.batch_size
        hit1, end1 = walk_to_circle(np.tile(start, (m, 1)), 1.0, cfg, rng, jobs)
        # the path is continued from where it actually stood, outside the unit circle
        inside = np.hypot(end1[:, 0], end1[:, 1]) < outer
        hit2 = np.array(end1, copy=True)
        if np.any(inside):
            hit2[inside], _ = walk_to_circle(end1[inside], outer, cfg, rng, jobs)
        theta1 = np.arctan2(hit1[:, 1], hit1[:, 0])
        theta2 = np.arctan2(hit2[:, 1], hit2[:, 0])
        ok = np.abs(np.asarray(normalize_angle(theta2 - p.mu2))) < cfg.epsilon
        kept.append(theta1[ok])
        have += int(ok.sum())
        attempts += m
        _check_rate(have, attempts)
    angles = np.asarray(normalize_angle(np.concatenate(kept)[:n_target]))
    batch = SampleBatch(angles, "brownian_walk", _seed_meta(seed), {"attempts": attempts, **asdict(cfg)})
    return batch, _report(angles, attempts, p, bins)


def conditional_equal_sample(
    p: EwcParams, n_target: int, epsilon: float = 0.01, seed: SeedLike = None, bins: int = 72,
    batch_size: int = 1_000_000,
) -> tuple[SampleBatch, OracleReport]:
    """Draws of ``arg Z1`` given ``arg Z1`` within ``epsilon`` of ``arg Z2``."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    rng = make_rng(seed)
    kept = []
    have = attempts = 0
    while have < n_target:
        t1 = _wc_draws(rng, p.mu1, p.rho1, batch_size)
        t2 = _wc_draws(rng, p.mu2, p.rho2, batch_size)
        ok = np.abs(np.asarray(normalize_angle(t1 - t2))) < epsilon
        kept.append(t1[ok])
        have += int(ok.sum())
        attempts += batch_size
        _check_rate(have, attempts)
    angles = np.concatenate(kept)[:n_target]
    batch = SampleBatch(angles, "exact_conditioning", _seed_meta(seed), {"attempts": attempts, "epsilon": epsilon})
    return batch, _report(angles, attempts, p, bins)


def uniform_l1(angles: np.ndarray, bins: int = 72) -> float:
    counts, _ = np.histogram(angles, bins=np.linspace(-np.pi, np.pi, bins + 1))
    return float(np.sum(np.abs(counts / len(angles) - 1.0 / bins)))

