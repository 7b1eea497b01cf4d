"""Curve and region data behind the standard density-shape pictures.

Nothing here draws; functions return arrays that a plotting tool can
consume directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EwcParams, ewc_density
from .shape import count_modes_on_grid, discriminant, is_symmetric

# Density shapes for mu2 = 0: four panels of four curves each.
DENSITY_PANELS: dict[str, list[tuple[str, EwcParams]]] = {
    "a": [
        (f"mu1={lab}", EwcParams(m, 0.0, 2 / 3, 1 / 3))
        for lab, m in (("0", 0.0), ("pi/3", np.pi / 3), ("2pi/3", 2 * np.pi / 3), ("pi", np.pi))
    ],
    "b": [
        (f"rho1={lab}", EwcParams(np.pi / 2, 0.0, r, 1 / 3))
        for lab, r in (("0", 0.0), ("1/4", 0.25), ("1/2", 0.5), ("3/4", 0.75))
    ],
    "c": [
        (lab, EwcParams(m, 0.0, r, 1 / 3))
        for lab, m, r in (
            ("mu1=pi,rho1=1/3", np.pi, 1 / 3),
            ("mu1=0,rho1=0", 0.0, 0.0),
            ("mu1=0,rho1=1/3", 0.0, 1 / 3),
            ("mu1=0,rho1=2/3", 0.0, 2 / 3),
        )
    ],
    "d": [
        (f"mu1={lab}", EwcParams(m, 0.0, 0.5, 0.5))
        for lab, m in (("0", 0.0), ("pi/3", np.pi / 3), ("2pi/3", 2 * np.pi / 3), ("pi", np.pi))
    ],
}


def angle_grid(n: int) -> np.ndarray:
    """``n`` equally spaced angles starting at ``-pi``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return -np.pi + 2 * np.pi * np.arange(n) / n


def density_curves(params: list[tuple[str, EwcParams]], n: int = 720):
    """Theta grid and a ``(len(params), n)`` array of densities."""
    t = angle_grid(n)
    return t, np.vstack([ewc_density(t, p) for _, p in params])


@dataclass
class CurveShape:
    label: str
    symmetric: bool
    modes: int


def curve_shapes(panel: str) -> list[CurveShape]:
    out = []
    for lab, p in DENSITY_PANELS[panel]:
        modes = 0 if p.rho1 == 0 and p.rho2 == 0 else count_modes_on_grid(p, 20_000)
        out.append(CurveShape(lab, is_symmetric(p).symmetric, modes))
    return out


# -- discriminant sign maps -------------------------------------------------------


def discriminant_map_disc(n: int = 201, rho2: float = 0.5):
    """Sign of the discriminant over ``(rho1 cos mu1, rho1 sin mu1)`` with ``mu2 = 0``.

    Returns ``(x, y, sign)`` where ``sign`` is +1 (bimodal), -1 (unimodal)
    or 0 outside the unit disc.
    """
    x = np.linspace(-1, 1, n)
    X, Y = np.meshgrid(x, x, indexing="xy")
    S = np.zeros_like(X)
    for idx in np.ndindex(X.shape):
        r = np.hypot(X[idx], Y[idx])
        if r >= 1 or r == 0:
            continue
        S[idx] = np.sign(discriminant(EwcParams(np.arctan2(Y[idx], X[idx]), 0.0, r, rho2)))
    return x, x, S


def discriminant_map_rho(n: int = 200, mu1: float = 2 * np.pi / 3):
    """Sign of the discriminant over ``(rho1, rho2)`` in ``(0, 1)^2`` with ``mu2 = 0``."""
    r = (np.arange(n) + 0.5) / n
    S = np.zeros((n, n))
    for i, r2 in enumerate(r):
        for j, r1 in enumerate(r):
            S[i, j] = np.sign(discriminant(EwcParams(mu1, 0.0, r1, r2)))
    return r, r, S


def disc_region_summary(x, y, S) -> dict:
    """Bimodal area fraction and how much of it lies in the half-plane ``cos mu1 <= 0``."""
    X, _ = np.meshgrid(x, y, indexing="xy")
    inside = S != 0
    bi = S > 0
    nb = int(bi.sum())
    return {
        "bimodal_fraction": nb / int(inside.sum()),
        "bimodal_in_back_half": float((bi & (X <= 0)).sum() / nb) if nb else float("nan"),
        "front_half_bimodal_fraction": float((bi & (X > 0)).sum() / max(1, (inside & (X > 0)).sum())),
        "back_half_bimodal_fraction": float((bi & (X <= 0)).sum() / max(1, (inside & (X <= 0)).sum())),
    }


def rho_region_summary(r1, r2, S) -> dict:
    """Bimodal fraction overall, near the diagonal, and off it."""
    R1, R2 = np.meshgrid(r1, r2, indexing="xy")
    bi = S > 0
    ratio = np.minimum(R1, R2) / np.maximum(R1, R2)
    near = ratio > 0.8
    return {
        "bimodal_fraction": float(bi.mean()),
        "near_diagonal_bimodal_fraction": float(bi[near].mean()),
        "off_diagonal_bimodal_fraction": float(bi[~near].mean()),
    }
