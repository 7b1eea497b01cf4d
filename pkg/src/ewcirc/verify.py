"""Property sweeps run by ``ewcirc verify``.

Each check returns ``(passed, detail)``. The sweeps are smaller than the
test suite's so that ``--suite all`` finishes in a few seconds.
"""

from __future__ import annotations

import time
from typing import Callable, Iterator

import numpy as np
from scipy import stats

from .core import (
    EwcParams,
    WcParams,
    angular_difference,
    ewc_density,
    ewc_density_complex,
    interval_probability,
    wc_density,
)
from .moments import first_moment, moment_oracle, skewness, skewness_from_moments, trig_moment
from .quadrature import periodic_trapezoid, sphere_product_gauss
from .sampling import make_rng

Check = Callable[[np.random.Generator], tuple[bool, str]]


def random_params(rng, n, rho_max=0.95):
    phi = rng.uniform(0, rho_max, (n, 2)) * np.exp(1j * rng.uniform(-np.pi, np.pi, (n, 2)))
    return [EwcParams.from_complex(a, b) for a, b in phi]


# -- core -------------------------------------------------------------------------


def check_normalization(rng):
    worst = 0.0
    for p in random_params(rng, 30, 0.99):
        worst = max(worst, abs(periodic_trapezoid(lambda t: ewc_density(t, p)).value - 1))
    return worst < 1e-10, f"max |integral - 1| = {worst:.2e}"


def check_interval_prob(rng):
    from scipy.integrate import quad

    worst = 0.0
    for p in random_params(rng, 40, 0.9):
        a, b = np.sort(rng.uniform(-np.pi, np.pi, 2))
        q = quad(lambda t: ewc_density(t, p), a, b, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
        worst = max(worst, abs(interval_probability(a, b, p) - q))
    return worst < 1e-9, f"max deviation from quadrature = {worst:.2e}"


def check_complex_form(rng):
    worst = 0.0
    t = np.linspace(-np.pi, np.pi, 100, endpoint=False)
    for p in random_params(rng, 20):
        f = ewc_density(t, p)
        worst = max(worst, float(np.max(np.abs(ewc_density_complex(np.exp(1j * t), p.phi1, p.phi2) / f - 1))))
    return worst < 1e-13, f"max relative gap = {worst:.2e}"


# -- moments ------------------------------------------------------------------------


def check_moments(rng):
    worst = 0.0
    for p in random_params(rng, 15):
        for n in range(9):
            worst = max(worst, abs(trig_moment(n, p) - moment_oracle(n, p).value))
    return worst < 1e-10, f"max |closed form - quadrature| = {worst:.2e}"


def check_zero_mean(rng):
    phi = rng.uniform(0, 0.95, 20) * np.exp(1j * rng.uniform(-np.pi, np.pi, 20))
    worst = max(abs(first_moment(EwcParams.from_complex(z, -z))) for z in phi)
    return worst < 1e-14, f"max |E(Z)| on phi1 = -phi2: {worst:.2e}"


def check_skewness(rng):
    worst = 0.0
    for p in random_params(rng, 50, 0.9):
        if abs(first_moment(p)) < 1e-3:
            continue
        worst = max(worst, abs(skewness(p) - skewness_from_moments(p)))
    return worst < 1e-10, f"max closed-form vs definition gap = {worst:.2e}"


# -- shape --------------------------------------------------------------------------


def check_modality(rng):
    from .shape import classify, count_modes_on_grid

    bad = used = 0
    for p in random_params(rng, 150):
        if p.rho1 == 0 and p.rho2 == 0:
            continue
        _, label = classify(p)
        if label == "boundary":
            continue
        used += 1
        bad += (count_modes_on_grid(p) == 2) != (label == "bimodal")
    return bad == 0, f"{bad} disagreements with grid mode counting over {used} sets"


def check_threshold(rng):
    from .shape import equal_rho_threshold

    r = equal_rho_threshold(2 * np.pi / 3)
    err = abs(r - (2 - np.sqrt(3)))
    return err < 1e-6, f"threshold {r:.12f}, error {err:.1e}"


# -- sampling -----------------------------------------------------------------------


def check_samplers(rng):
    from .sampling import McmcConfig, sample_ewc_invcdf, sample_ewc_mcmc, sample_ewc_rejection

    p = EwcParams(0.0, np.pi / 2, 2 / 3, 1 / 3)
    seed = int(rng.integers(2**31))
    a = sample_ewc_rejection(p, 10_000, seed).angles
    b = sample_ewc_invcdf(p, 10_000, seed + 1).angles
    c = sample_ewc_mcmc(p, 10_000, McmcConfig(), seed + 2).angles
    pv = min(stats.ks_2samp(a, b).pvalue, stats.ks_2samp(a, c).pvalue, stats.ks_2samp(b, c).pvalue)
    return pv > 0.01, f"smallest pairwise KS p-value {pv:.3f}"


# -- brownian -----------------------------------------------------------------------


def check_equal_conditioning(rng):
    from .brownian import conditional_equal_sample

    p = EwcParams(0.0, 0.0, 2 / 3, 1 / 3)
    _, rep = conditional_equal_sample(p, 20_000, 0.05, rng)
    return rep.l1_distance < 0.08, f"L1 = {rep.l1_distance:.4f} at n = {rep.n_accepted}"


def check_walk_exit(rng):
    from .brownian import WalkConfig, histogram_l1, simulate_exits

    a = simulate_exits((0.5, 0.0), 1.0, 20_000, WalkConfig(), rng)
    l1 = histogram_l1(a, EwcParams(0.0, 0.0, 0.5, 0.0))
    return l1 < 0.08, f"L1 of walk exit vs WC(0, 0.5) = {l1:.4f}"


# -- sphere -------------------------------------------------------------------------


def check_sphere_reduction(rng):
    from .sphere import SphereParams, sphere_density

    worst = 0.0
    t = np.linspace(-np.pi, np.pi, 64, endpoint=False)
    x = np.c_[np.cos(t), np.sin(t)]
    for p in random_params(rng, 20):
        sp = SphereParams(p.rho1, (np.cos(p.mu1), np.sin(p.mu1)), p.rho2, (np.cos(p.mu2), np.sin(p.mu2)))
        worst = max(worst, float(np.max(np.abs(sphere_density(x, sp) - ewc_density(t, p)))))
    return worst < 1e-13, f"max d=2 gap = {worst:.2e}"


def check_sphere_quadrature(rng):
    from .sphere import SphereParams, sphere_density

    v = rng.standard_normal((2, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    sp = SphereParams(0.6, tuple(v[0]), 0.4, tuple(v[1]))
    err = abs(sphere_product_gauss(lambda x: sphere_density(x, sp)) - 1)
    return err < 1e-8, f"d=3 product-Gauss integral error {err:.2e}"


# -- mobius -------------------------------------------------------------------------


def _random_map(rng):
    from .mobius import MobiusMap

    return MobiusMap(np.exp(1j * rng.uniform(-np.pi, np.pi)), rng.uniform(0, 0.9) * np.exp(1j * rng.uniform(-np.pi, np.pi)))


def check_weight2(rng):
    from .mobius import invariance_residual

    worst = 0.0
    for p in random_params(rng, 200):
        z = np.exp(1j * rng.uniform(-np.pi, np.pi))
        worst = max(worst, invariance_residual(z, p, _random_map(rng)))
    return worst < 1e-11, f"max normalised-density residual = {worst:.2e}"


def check_weight2_kernel(rng):
    from .mobius import kernel_invariance_residual

    worst = 0.0
    for p in random_params(rng, 200, 0.9):
        z = np.exp(1j * rng.uniform(-np.pi, np.pi))
        worst = max(worst, kernel_invariance_residual(z, p, _random_map(rng)))
    return worst < 1e-11, f"max kernel-product residual = {worst:.2e}"


def check_weight1(rng):
    from .mobius import wc_weight1_residual

    worst = 0.0
    for _ in range(200):
        phi = rng.uniform(0, 0.95) * np.exp(1j * rng.uniform(-np.pi, np.pi))
        z = np.exp(1j * rng.uniform(-np.pi, np.pi))
        worst = max(worst, wc_weight1_residual(z, phi, _random_map(rng)))
    return worst < 1e-11, f"max residual = {worst:.2e}"


def check_harmonic(rng):
    from .mobius import poisson_integral_check

    worst = 0.0
    for _ in range(5):
        phi = rng.uniform(0, 0.95) * np.exp(1j * rng.uniform(-np.pi, np.pi))
        worst = max(worst, abs(poisson_integral_check("constant", 0, phi)))
        for k in range(7):
            for kind in ("re", "im"):
                worst = max(worst, abs(poisson_integral_check(kind, k, phi)))
    return worst < 1e-10, f"max |integral - u(phi1)| = {worst:.2e}"


def check_convolution(rng):
    from .mobius import conditioning_density, convolution_quadrature, wc_convolve

    p1 = WcParams(rng.uniform(-np.pi, np.pi), rng.uniform(0, 0.9))
    p2 = WcParams(rng.uniform(-np.pi, np.pi), rng.uniform(0, 0.9))
    tau = np.linspace(-3, 3, 13)
    e1 = max(abs(convolution_quadrature(p1, p2, t) - wc_density(t, wc_convolve(p1, p2))) for t in tau)
    p = random_params(rng, 1)[0]
    t = np.linspace(-np.pi, np.pi, 200, endpoint=False)
    k = conditioning_density(WcParams(p.mu1, p.rho1), WcParams(0.0, p.rho2), p.mu2, t)
    e2 = float(np.max(np.abs(k - ewc_density(t, p))))
    return e1 < 1e-9 and e2 < 1e-12, f"convolution gap {e1:.2e}, conditioning gap {e2:.2e}"


# -- fitting ------------------------------------------------------------------------


def check_fit(rng):
    from .fitting import fit_ewc, loglik
    from .sampling import sample_ewc_rejection

    p = EwcParams(0.0, np.pi / 2, 2 / 3, 1 / 3)
    x = sample_ewc_rejection(p, 10_000, int(rng.integers(2**31))).angles
    r = fit_ewc(x)
    f = r.params
    err = max(
        abs(angular_difference(f.mu1, p.mu1)), abs(angular_difference(f.mu2, p.mu2)),
        abs(f.rho1 - p.rho1), abs(f.rho2 - p.rho2),
    )
    ok = err < 0.1 and r.loglik >= loglik(x, p) - 1e-6 * len(x)
    return ok, f"max coordinate error {err:.3f}, converged={r.converged}"


SUITES: dict[str, list[tuple[str, Check]]] = {
    "core": [
        ("density integrates to 1", check_normalization),
        ("interval probability vs quadrature", check_interval_prob),
        ("complex and angular forms agree", check_complex_form),
    ],
    "moments": [
        ("trigonometric moments vs quadrature", check_moments),
        ("zero mean on phi1 = -phi2", check_zero_mean),
        ("skewness closed form vs definition", check_skewness),
    ],
    "shape": [
        ("discriminant vs grid mode count", check_modality),
        ("equal-rho threshold at 2pi/3", check_threshold),
    ],
    "sampling": [("rejection / inverse-cdf / mcmc agree", check_samplers)],
    "brownian": [
        ("exact-WC conditioning histogram", check_equal_conditioning),
        ("walk exit from 0.5 is WC(0, 0.5)", check_walk_exit),
    ],
    "sphere": [
        ("d=2 reduction", check_sphere_reduction),
        ("d=3 quadrature normalisation", check_sphere_quadrature),
    ],
    "mobius": [
        ("weight-2 identity, normalised density", check_weight2),
        ("weight-2 identity, Poisson kernel product", check_weight2_kernel),
        ("weight-1 identity, wrapped Cauchy", check_weight1),
        ("harmonic functions, degree <= 6", check_harmonic),
        ("convolution and conditioning", check_convolution),
    ],
    "fitting": [("parameter recovery at n = 1e4", check_fit)],
}


def run(suite: str = "all", seed: int = 42) -> Iterator[tuple[str, str, bool, str, float]]:
    """Yield ``(suite, check, passed, detail, seconds)`` for each check."""
    names = list(SUITES) if suite == "all" else [suite]
    for s in names:
        if s not in SUITES:
            raise KeyError(s)
        for i, (name, fn) in enumerate(SUITES[s]):
            rng = make_rng(np.random.SeedSequence([seed, list(SUITES).index(s), i]).generate_state(1)[0])
            t0 = time.perf_counter()
            try:
                ok, detail = fn(rng)
            except Exception as e:  # a crash counts as a failure, reported with its message
                ok, detail = False, f"{type(e).__name__}: {e}"
            yield s, name, bool(ok), detail, time.perf_counter() - t0
