import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from conftest import angles, ewc_params, random_params
from ewcirc.core import (
    EwcParams,
    WcParams,
    angular_difference,
    cdf,
    disk_point,
    ewc_density,
    ewc_density_complex,
    interval_probability,
    log_density,
    normalize_angle,
    normalizing_constant,
    wc_density,
)
from ewcirc.core import _prob_divided, _prob_equal, _prob_general
from ewcirc.quadrature import periodic_trapezoid


def quad_prob(a, b, p):
    return quad(lambda t: ewc_density(t, p), a, b, epsabs=1e-14, epsrel=1e-13, limit=400)[0]


@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_normalize_range_and_idempotent(x):
    y = normalize_angle(x)
    assert -np.pi <= y < np.pi
    assert normalize_angle(y) == y
    assert abs(np.sin(y) - np.sin(x)) < 1e-9 * max(1.0, abs(x))


def test_normalize_edges():
    assert normalize_angle(np.pi) == -np.pi
    assert normalize_angle(-np.pi) == -np.pi
    assert normalize_angle(-1e-300) == -1e-300
    assert normalize_angle(3 * np.pi) == -np.pi


def test_disk_point_rejects_boundary():
    assert disk_point(0.5j) == 0.5j
    with pytest.raises(ValueError):
        disk_point(1.0)
    with pytest.raises(ValueError):
        disk_point(0.8 + 0.8j)


def test_param_validation():
    with pytest.raises(ValueError):
        WcParams(0.0, 1.0)
    with pytest.raises(ValueError):
        EwcParams(0.0, 0.0, -0.1, 0.2)
    p = EwcParams(7.0, -4.0, 0.5, 0.2)
    assert -np.pi <= p.mu1 < np.pi and -np.pi <= p.mu2 < np.pi


@given(ewc_params())
def test_complex_round_trip(p):
    q = EwcParams.from_complex(p.phi1, p.phi2)
    assert abs(q.phi1 - p.phi1) < 1e-15 and abs(q.phi2 - p.phi2) < 1e-15


def test_wc_density_values():
    assert wc_density(1.3, WcParams(0.2, 0.0)) == pytest.approx(1 / (2 * np.pi), rel=1e-15)
    assert wc_density(0.4, WcParams(0.4, 0.5)) == pytest.approx(3 / (2 * np.pi), rel=1e-14)
    for r in (0.1, 0.5, 0.9):
        val = periodic_trapezoid(lambda t: wc_density(t, WcParams(0.3, r)), start_nodes=2048).value
        assert abs(val - 1) < 1e-12


def test_normalizing_constant_special_cases():
    assert normalizing_constant(EwcParams.uniform()) == pytest.approx(1 / (2 * np.pi), rel=1e-15)
    assert normalizing_constant(EwcParams(1.0, -2.0, 0.6, 0.0)) == pytest.approx((1 - 0.36) / (2 * np.pi), rel=1e-15)


def test_normalizing_constant_vs_quadrature(rng):
    for p in random_params(rng, 10, 0.9):
        def kernel(t):
            return 1 / ((1 + p.rho1**2 - 2 * p.rho1 * np.cos(t - p.mu1)) * (1 + p.rho2**2 - 2 * p.rho2 * np.cos(t - p.mu2)))

        assert normalizing_constant(p) == pytest.approx(1 / periodic_trapezoid(kernel).value, rel=1e-12)


def test_density_reductions():
    t = np.linspace(-np.pi, np.pi, 257)
    np.testing.assert_allclose(ewc_density(t, EwcParams.uniform()), 1 / (2 * np.pi), rtol=1e-15)
    a = ewc_density(t, EwcParams(0.7, -1.1, 0.6, 0.0))
    assert np.max(np.abs(a - wc_density(t, WcParams(0.7, 0.6)))) < 1e-14
    b = ewc_density(t, EwcParams(0.7, -1.1, 0.0, 0.6))
    assert np.max(np.abs(b - wc_density(t, WcParams(-1.1, 0.6)))) < 1e-14
    # equal locations and concentrations: closed form with a squared kernel
    mu, r = 0.4, 0.55
    closed = (1 / (2 * np.pi)) * ((1 - r**2) / (1 + r**2)) * ((1 - r**2) / (1 + r**2 - 2 * r * np.cos(t - mu))) ** 2
    np.testing.assert_allclose(ewc_density(t, EwcParams(mu, mu, r, r)), closed, rtol=1e-13)


@given(ewc_params(), angles)
def test_label_exchange_and_periodicity(p, t):
    f = ewc_density(t, p)
    assert f > 0
    assert ewc_density(t, p.swapped()) == pytest.approx(f, rel=1e-14)
    assert ewc_density(t + 2 * np.pi, p) == pytest.approx(f, rel=1e-9)


def test_complex_form_matches_angular(rng):
    t = np.linspace(-np.pi, np.pi, 100, endpoint=False)
    for p in random_params(rng, 20):
        g = ewc_density_complex(np.exp(1j * t), p.phi1, p.phi2)
        np.testing.assert_allclose(g, ewc_density(t, p), rtol=1e-13)
    assert ewc_density_complex(1.0, 0.0, 0.0) == pytest.approx(1 / (2 * np.pi))
    with pytest.raises(ValueError):
        ewc_density_complex(1.01, 0.2, 0.3)


def test_log_density():
    p = EwcParams(0.3, -1.0, 0.999, 0.5)
    assert np.isfinite(log_density(0.3, p))
    t = np.linspace(-3, 3, 50)
    np.testing.assert_allclose(np.exp(log_density(t, p)), ewc_density(t, p), rtol=1e-12)
    assert log_density(1.0, EwcParams.uniform()) == pytest.approx(-np.log(2 * np.pi), rel=1e-15)
    # extreme concentration: still finite and matches the log of the stable product
    q = EwcParams(0.0, 1.0, 1 - 1e-12, 0.3)
    assert np.isfinite(log_density(0.0, q)) and log_density(0.0, q) > 20


def test_interval_probability_vs_quadrature(rng):
    for p in random_params(rng, 40, 0.95):
        a, b = np.sort(rng.uniform(-np.pi, np.pi, 2))
        assert interval_probability(a, b, p) == pytest.approx(quad_prob(a, b, p), abs=1e-9)


def test_interval_equal_branch(rng):
    for _ in range(20):
        mu, r = rng.uniform(-np.pi, np.pi), rng.uniform(0, 0.95)
        p = EwcParams(mu, mu, r, r)
        assert p.is_equal_branch()
        a, b = np.sort(rng.uniform(-np.pi, np.pi, 2))
        assert interval_probability(a, b, p) == pytest.approx(quad_prob(a, b, p), abs=1e-9)
    # symmetric interval about the common centre
    p = EwcParams(0.0, 0.0, 0.6, 0.6)
    assert interval_probability(-1.0, 1.0, p) == pytest.approx(2 * interval_probability(0.0, 1.0, p), abs=1e-14)


def test_branch_continuity():
    # approach the equal-parameter point along a fixed direction: the gap
    # must shrink linearly, with no jump where the evaluation switches
    p = EwcParams(0.5, 0.5, 0.6, 0.6)
    for a, b in [(-2.0, 1.0), (0.0, 0.6), (-np.pi, 3.0)]:
        base = interval_probability(a, b, p)
        slopes = []
        for eps in 10.0 ** -np.arange(2, 13):
            q = EwcParams(0.5 + eps, 0.5, 0.6, 0.6 + eps)
            slopes.append(abs(interval_probability(a, b, q) - base) / eps)
        assert max(slopes) < 1.0
        assert abs(slopes[-1] - slopes[3]) < 1e-2


@pytest.mark.parametrize("rho", [0.3, 0.9, 0.999])
@pytest.mark.parametrize("gap", [1e-3, 1e-6, 1e-9, 1e-12])
def test_near_equal_vs_quadrature(rho, gap, rng):
    for _ in range(5):
        phi1 = rho * np.exp(1j * rng.uniform(-np.pi, np.pi))
        phi2 = phi1 + gap * (1 - rho) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        p = EwcParams.from_complex(phi1, phi2)
        a, b = np.sort(rng.uniform(-np.pi, np.pi, 2))
        pts = [m for m in (p.mu1, p.mu2) if a < m < b]
        ref = quad(lambda t: ewc_density(t, p), a, b, epsabs=1e-14, epsrel=1e-13, limit=800, points=pts or None)[0]
        assert interval_probability(a, b, p) == pytest.approx(ref, abs=1e-10)


def test_closed_form_agrees_when_well_separated(rng):
    for p in random_params(rng, 30, 0.9):
        if abs(p.phi1 - p.phi2) < 0.2:
            continue
        a, b = np.sort(rng.uniform(-np.pi, np.pi, 2))
        assert _prob_general(a, b, p) == pytest.approx(interval_probability(a, b, p), abs=1e-12)


def test_equal_form_matches_limit(rng):
    for _ in range(10):
        phi = rng.uniform(0, 0.99) * np.exp(1j * rng.uniform(-np.pi, np.pi))
        p = EwcParams.from_complex(phi, phi)
        a, b = np.sort(rng.uniform(-np.pi, np.pi, 2))
        assert _prob_equal(a, b, p) == pytest.approx(_prob_divided(a, b, p), abs=1e-12)


def test_full_circle_and_endpoints():
    p = EwcParams(1.0, -2.0, 0.7, 0.4)
    assert interval_probability(-np.pi, np.pi, p) == 1.0
    assert interval_probability(-np.pi, np.pi - 1e-13, p) == pytest.approx(1.0, abs=1e-10)
    assert cdf(-np.pi, p) == 0.0 and cdf(np.pi, p) == 1.0
    assert cdf(0.0, EwcParams.uniform()) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(ValueError):
        interval_probability(1.0, 1.0, p)
    with pytest.raises(ValueError):
        interval_probability(1.0, -1.0, p)


def test_pole_endpoints():
    # endpoints exactly antipodal to a location hit the tan pole
    p = EwcParams(0.0, 1.0, 0.7, 0.4)
    for a, b in [(-np.pi, 0.0), (-np.pi, 1.0 - np.pi), (1.0 - np.pi, 2.0)]:
        assert interval_probability(a, b, p) == pytest.approx(quad_prob(a, b, p), abs=1e-9)


@settings(max_examples=60)
@given(ewc_params(), st.lists(angles, min_size=3, max_size=3, unique=True))
def test_additivity(p, pts):
    a, b, c = sorted(pts)
    lhs = interval_probability(a, b, p) + interval_probability(b, c, p)
    assert lhs == pytest.approx(interval_probability(a, c, p), abs=1e-12)


def test_cdf_monotone_and_vs_quadrature(rng):
    t = np.linspace(-np.pi, np.pi, 2001)
    for p in random_params(rng, 10):
        F = cdf(t, p)
        assert np.all(np.diff(F) >= -1e-15)
        for x in rng.uniform(-np.pi, np.pi, 3):
            assert cdf(x, p) == pytest.approx(quad_prob(-np.pi, x, p), abs=1e-9)


def test_angular_difference():
    assert angular_difference(3.0, -3.0) == pytest.approx(6.0 - 2 * np.pi)
