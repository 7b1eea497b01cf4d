"""Quadrature rules used as independent oracles for the closed forms."""

from typing import Callable, NamedTuple

import numpy as np


class QuadResult(NamedTuple):
    value: complex
    error: float
    nodes: int


def periodic_trapezoid(
    func: Callable[[np.ndarray], np.ndarray],
    tol: float = 1e-12,
    start_nodes: int = 64,
    max_nodes: int = 2**21,
) -> QuadResult:
    """Integrate a smooth 2*pi-periodic function over [-pi, pi).

    The node count is doubled until two successive estimates differ by
    less than ``tol``. Convergence is geometric for analytic integrands,
    so the difference is a conservative error bound for the finer rule.
    """
    n = start_nodes
    prev = _trapezoid(func, n)
    while n < max_nodes:
        n *= 2
        cur = _trapezoid(func, n)
        err = abs(cur - prev)
        if err < tol:
            return QuadResult(cur, err, n)
        prev = cur
    raise RuntimeError(f"periodic trapezoid did not reach tol={tol} with {n} nodes")


def _trapezoid(func, n):
    theta = -np.pi + 2.0 * np.pi * np.arange(n) / n
    vals = func(theta)
    total = np.sum(vals) * (2.0 * np.pi / n)
    if np.iscomplexobj(total):
        return complex(total)
    return float(total)


def sphere_product_gauss(
    func: Callable[[np.ndarray], np.ndarray], n_polar: int = 200, n_azimuth: int = 400
) -> float:
    """Integrate ``func`` over the unit sphere in R^3.

    Gauss-Legendre nodes in ``cos(polar angle)`` times an equispaced
    (spectrally accurate) rule in azimuth. ``func`` receives an
    ``(N, 3)`` array of unit vectors.
    """
    t, w = np.polynomial.legendre.leggauss(n_polar)
    phi = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    tt, pp = np.meshgrid(t, phi, indexing="ij")
    s = np.sqrt(1.0 - tt**2)
    x = np.stack([s * np.cos(pp), s * np.sin(pp), tt], axis=-1).reshape(-1, 3)
    vals = np.asarray(func(x)).reshape(n_polar, n_azimuth)
    return float(np.sum(vals.mean(axis=1) * w) * 2.0 * np.pi)
