"""Maximum-likelihood fitting of WC and EWC models to angle data."""

from __future__ import annotations

import csv
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .core import LOG_TWO_PI, EwcParams, WcParams, log_density, normalize_angle

RHO_CAP = 1.0 - 1e-6
BOUNDARY_WARN = 0.999
GRAD_TOL = 1e-6
HESS_STEP = 1e-4


class DataError(ValueError):
    """Malformed or unusable angle data."""


class NearBoundaryWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class Dataset:
    angles: np.ndarray
    source: str = "inline"

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=float).reshape(-1)
        if a.size == 0:
            raise DataError("dataset is empty")
        if not np.all(np.isfinite(a)):
            raise DataError("dataset contains non-finite angles")
        a = np.asarray(normalize_angle(a), dtype=float).reshape(-1)
        a.setflags(write=False)
        object.__setattr__(self, "angles", a)

    def __len__(self):
        return self.angles.size

    @classmethod
    def from_csv(cls, path, degrees: bool = False) -> "Dataset":
        return load_csv(path, degrees)


def load_csv(path, degrees: bool = False) -> Dataset:
    """Read a ``theta`` column (radians, or degrees with ``degrees=True``).

    Errors name the offending line.
    """
    values = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        col = None
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row) or row[0].lstrip().startswith("#"):
                continue
            if col is None:
                names = [c.strip() for c in row]
                if "theta" not in names:
                    raise DataError(f"{path}:{line}: expected a header with a 'theta' column")
                col = names.index("theta")
                continue
            if col >= len(row):
                raise DataError(f"{path}:{line}: missing theta value")
            try:
                v = float(row[col])
            except ValueError:
                raise DataError(f"{path}:{line}: cannot parse {row[col].strip()!r} as a number") from None
            if not np.isfinite(v):
                raise DataError(f"{path}:{line}: non-finite value {row[col].strip()!r}")
            values.append(v)
    if col is None:
        raise DataError(f"{path}: no header line found")
    if not values:
        raise DataError(f"{path}: no data rows")
    a = np.asarray(values)
    if degrees:
        a = np.deg2rad(a)
    return Dataset(a, str(path))


def _angles(data) -> np.ndarray:
    return data.angles if isinstance(data, Dataset) else Dataset(data).angles


def loglik(data, p: EwcParams) -> float:
    return float(np.sum(log_density(_angles(data), p)))


def fit_wc(data) -> WcParams:
    """Moment estimator: ``mu = arg mean(e^{i theta})``, ``rho = |mean(e^{i theta})|``."""
    a = _angles(data)
    if a.size < 2:
        raise DataError("need at least two observations")
    m = np.mean(np.exp(1j * a))
    if abs(m) > 1.0 - 1e-12:
        raise DataError("degenerate data: all angles (nearly) coincide")
    return WcParams(float(np.angle(m)), float(abs(m)))


# -- EWC likelihood in a form suited to optimisation --------------------------


class _Objective:
    """Log-likelihood and its gradient with the data's cos/sin precomputed."""

    def __init__(self, angles: np.ndarray):
        self.angles = angles
        self.c = np.cos(angles)
        self.s = np.sin(angles)
        self.n = angles.size

    def _terms(self, q):
        mu1, mu2, r1, r2 = q
        k1 = 1 + r1 * r1 - 2 * r1 * (self.c * np.cos(mu1) + self.s * np.sin(mu1))
        k2 = 1 + r2 * r2 - 2 * r2 * (self.c * np.cos(mu2) + self.s * np.sin(mu2))
        r12 = r1 * r2
        cross = 1 + r12 * r12 - 2 * r12 * np.cos(mu1 - mu2)
        return k1, k2, cross

    def terms(self, q) -> np.ndarray:
        """Per-observation log densities, in the cancellation-free form."""
        return log_density(self.angles, _params(q))

    def value(self, q) -> float:
        mu1, mu2, r1, r2 = q
        k1, k2, cross = self._terms(q)
        logc = (
            np.log1p(-r1 * r1) + np.log1p(-r2 * r2) + np.log(cross)
            - LOG_TWO_PI - np.log1p(-(r1 * r2) ** 2)
        )
        return float(self.n * logc - np.sum(np.log(k1)) - np.sum(np.log(k2)))

    def gradient(self, q) -> np.ndarray:
        """Derivatives in ``(mu1, mu2, rho1, rho2)``."""
        mu1, mu2, r1, r2 = q
        k1, k2, cross = self._terms(q)
        d = mu1 - mu2
        # sin(theta - mu) and cos(theta - mu) from the cached cos/sin
        s1 = self.s * np.cos(mu1) - self.c * np.sin(mu1)
        s2 = self.s * np.cos(mu2) - self.c * np.sin(mu2)
        c1 = self.c * np.cos(mu1) + self.s * np.sin(mu1)
        c2 = self.c * np.cos(mu2) + self.s * np.sin(mu2)
        r12 = r1 * r2
        n = self.n
        g_mu1 = n * 2 * r12 * np.sin(d) / cross + np.sum(2 * r1 * s1 / k1)
        g_mu2 = -n * 2 * r12 * np.sin(d) / cross + np.sum(2 * r2 * s2 / k2)
        g_r1 = n * (
            -2 * r1 / (1 - r1 * r1)
            + (2 * r1 * r2 * r2 - 2 * r2 * np.cos(d)) / cross
            + 2 * r1 * r2 * r2 / (1 - r12 * r12)
        ) - np.sum((2 * r1 - 2 * c1) / k1)
        g_r2 = n * (
            -2 * r2 / (1 - r2 * r2)
            + (2 * r2 * r1 * r1 - 2 * r1 * np.cos(d)) / cross
            + 2 * r2 * r1 * r1 / (1 - r12 * r12)
        ) - np.sum((2 * r2 - 2 * c2) / k2)
        return np.array([g_mu1, g_mu2, g_r1, g_r2])


def _to_natural(x):
    r = RHO_CAP / (1.0 + np.exp(-np.asarray(x[2:], dtype=float)))
    return np.array([x[0], x[1], r[0], r[1]])


def _to_free(q):
    r = np.clip(np.asarray(q[2:], dtype=float) / RHO_CAP, 1e-12, 1 - 1e-12)
    return np.array([q[0], q[1], *np.log(r / (1 - r))])


def _params(q) -> EwcParams:
    return EwcParams(q[0], q[1], min(max(q[2], 0.0), RHO_CAP), min(max(q[3], 0.0), RHO_CAP))


def numeric_gradient(fun, q, h: float = 1e-4) -> np.ndarray:
    """Central differences with one Richardson step (error ``O(h^4)``).

    ``fun`` may return per-observation terms; they are differenced before
    summing, which keeps rounding far below the differences themselves.
    """
    q = np.asarray(q, dtype=float)
    g = np.empty_like(q)
    for i in range(q.size):
        e = np.zeros_like(q)
        e[i] = 1.0

        def cd(step):
            return float(np.sum(np.asarray(fun(q + step * e)) - np.asarray(fun(q - step * e)))) / (2 * step)

        g[i] = (4 * cd(h / 2) - cd(h)) / 3
    return g


def numeric_hessian(fun, q, h: float = HESS_STEP) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    m = q.size
    H = np.empty((m, m))
    f0 = fun(q)
    for i in range(m):
        ei = np.zeros(m)
        ei[i] = h
        H[i, i] = (fun(q + ei) - 2 * f0 + fun(q - ei)) / (h * h)
        for j in range(i):
            ej = np.zeros(m)
            ej[j] = h
            H[i, j] = H[j, i] = (
                fun(q + ei + ej) - fun(q + ei - ej) - fun(q - ei + ej) + fun(q - ei - ej)
            ) / (4 * h * h)
    return H


def _gradient_hessian(obj: _Objective, q, h=1e-6):
    g = obj.gradient(q)
    H = np.empty((4, 4))
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        H[:, i] = (obj.gradient(q + e) - obj.gradient(q - e)) / (2 * h)
    return g, 0.5 * (H + H.T)


def _feasible(q):
    return 0.0 <= q[2] < RHO_CAP and 0.0 <= q[3] < RHO_CAP


def _newton_polish(obj: _Objective, q, iters: int = 30):
    """Damped Newton ascent on the likelihood; stops when the Hessian is not negative definite."""
    q = np.asarray(q, dtype=float)
    f = obj.value(q)
    steps = 0
    for _ in range(iters):
        g, H = _gradient_hessian(obj, q)
        if np.linalg.norm(g) < 1e-10 * max(1.0, obj.n):
            break
        try:
            np.linalg.cholesky(-H)
        except np.linalg.LinAlgError:
            break
        step = np.linalg.solve(-H, g)
        t = 1.0
        while t > 1e-6:
            cand = q + t * step
            if _feasible(cand):
                fc = obj.value(cand)
                if fc >= f - 1e-12 * abs(f):
                    break
            t *= 0.5
        else:
            break
        q, f = cand, fc
        steps += 1
    return q, steps


@dataclass
class FitResult:
    params: EwcParams
    loglik: float
    converged: bool
    iterations: int
    stderr: Optional[tuple] = None
    init: Optional[EwcParams] = None
    gradient_norm: float = float("nan")
    at_boundary: bool = False
    message: str = ""
    starts: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "loglik": self.loglik,
            "converged": self.converged,
            "iterations": self.iterations,
            "stderr": None if self.stderr is None else dict(zip(("mu1", "mu2", "rho1", "rho2"), self.stderr)),
            "init": None if self.init is None else self.init.to_dict(),
            "gradient_norm": self.gradient_norm,
            "at_boundary": self.at_boundary,
            "message": self.message,
        }


def default_starts(data) -> list[EwcParams]:
    """Eight starting points built around the wrapped Cauchy fit."""
    a = _angles(data)
    m = np.mean(np.exp(1j * a))
    mu = float(np.angle(m)) if abs(m) > 1e-12 else 0.0
    r = float(min(abs(m), 0.95))
    return [
        EwcParams(mu, mu, r, 0.0),
        EwcParams(mu, mu, 0.0, r),
        EwcParams(mu + np.pi / 4, mu - np.pi / 4, 0.6, 0.3),
        EwcParams(mu - np.pi / 4, mu + np.pi / 4, 0.6, 0.3),
        EwcParams(mu + np.pi / 2, mu - np.pi / 2, 0.5, 0.5),
        EwcParams(mu + 2 * np.pi / 3, mu, 0.7, 0.3),
        EwcParams(mu - 2 * np.pi / 3, mu, 0.7, 0.3),
        EwcParams(mu + np.pi, mu, 0.4, 0.6),
    ]


def _local_fit(obj: _Objective, start: EwcParams, max_iter: int):
    q0 = np.array([start.mu1, start.mu2, start.rho1, start.rho2])

    def neg(x):
        return -obj.value(_to_natural(x)) / obj.n

    res = minimize(
        neg, _to_free(q0), method="Nelder-Mead",
        options={"maxiter": max_iter, "maxfev": 2 * max_iter, "xatol": 1e-10, "fatol": 1e-14, "adaptive": True},
    )
    q, polish = _newton_polish(obj, _to_natural(res.x))
    return q, obj.value(q), bool(res.success), int(res.nit) + polish


def fit_ewc(
    data,
    init: Optional[EwcParams] = None,
    starts: Optional[Sequence[EwcParams]] = None,
    jobs: int = 1,
    max_iter: int = 4000,
) -> FitResult:
    """Maximum-likelihood EWC fit by multistart simplex search.

    The search runs over ``(mu1, mu2, logit rho1, logit rho2)`` from each
    start, is polished with Newton steps, and the best local optimum is
    reported in canonical labelling (``rho1 >= rho2``).

    Parameters
    ----------
    data : Dataset or array of angles
    init : EwcParams, optional
        Extra start tried first; reported as ``init`` in the result.
    starts : sequence of EwcParams, optional
        Replaces the default eight starts.
    jobs : int
        Threads used for the independent starts.
    """
    a = _angles(data)
    if a.size < 8:
        raise DataError("need at least eight observations to fit four parameters")
    obj = _Objective(a)
    pts = list(starts) if starts is not None else default_starts(a)
    if init is not None:
        pts = [init] + pts
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(lambda s: _local_fit(obj, s, max_iter), pts))
    else:
        results = [_local_fit(obj, s, max_iter) for s in pts]

    best = max(range(len(results)), key=lambda i: (results[i][1], -i))
    q, ll, ok, iters = results[best]
    at_boundary = bool(q[2] <= 1e-8 or q[3] <= 1e-8 or q[2] >= RHO_CAP - 1e-8 or q[3] >= RHO_CAP - 1e-8)
    if at_boundary:
        gnorm = float("nan")
    else:
        gnorm = float(np.linalg.norm(numeric_gradient(obj.terms, q)))
    converged = bool(ok and not at_boundary and gnorm < GRAD_TOL)

    stderr = None
    if not at_boundary and min(q[2], q[3]) > 2 * HESS_STEP and max(q[2], q[3]) < RHO_CAP - 2 * HESS_STEP:
        H = numeric_hessian(obj.value, q)
        try:
            np.linalg.cholesky(-H)
            stderr = tuple(float(v) for v in np.sqrt(np.diag(np.linalg.inv(-H))))
        except np.linalg.LinAlgError:
            stderr = None

    p = _params(q)
    if p.canonical() is not p:
        p = p.swapped()
        if stderr is not None:
            stderr = (stderr[1], stderr[0], stderr[3], stderr[2])
    if max(p.rho1, p.rho2) > BOUNDARY_WARN:
        warnings.warn(f"fitted concentration {max(p.rho1, p.rho2):.6f} is near 1", NearBoundaryWarning, stacklevel=2)

    if converged:
        msg = "converged"
    elif at_boundary:
        msg = "optimum on the parameter boundary"
    elif not ok:
        msg = "iteration cap reached"
    else:
        msg = f"gradient norm {gnorm:.3g} above {GRAD_TOL:g}"
    return FitResult(
        params=p,
        loglik=float(ll),
        converged=converged,
        iterations=iters,
        stderr=stderr,
        init=init if init is not None else pts[best],
        gradient_norm=gnorm,
        at_boundary=at_boundary,
        message=msg,
        starts=[(s, r[1]) for s, r in zip(pts, results)],
    )
