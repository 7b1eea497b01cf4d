"""Command-line entry point: ``ewcirc <subcommand> ...``.

Exit status is 0 on success, 1 for usage or input errors and 2 when a
numerical procedure fails (or, for ``verify``, when a check fails).
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from typing import Optional, Sequence

import numpy as np

from . import io as eio
from .core import EwcParams, cdf, ewc_density, interval_probability, log_density

EXIT_USAGE = 1
EXIT_NUMERIC = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _params(arg: str) -> EwcParams:
    # inline JSON is accepted as well as a path
    if arg.lstrip().startswith("{"):
        try:
            return EwcParams.from_dict(json.loads(arg))
        except (json.JSONDecodeError, TypeError, ValueError) as e:
            raise eio.ParamsError(f"--params: {e}") from None
    return eio.read_params(arg)


def _sphere_params(arg: str):
    from .sphere import SphereParams

    if arg.lstrip().startswith("{"):
        try:
            return SphereParams.from_dict(json.loads(arg))
        except (json.JSONDecodeError, TypeError, ValueError) as e:
            raise eio.ParamsError(f"--params: {e}") from None
    return eio.read_sphere_params(arg)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse {text!r} as comma-separated numbers") from None


def _thetas(args) -> np.ndarray:
    if args.theta is not None and args.grid is not None:
        raise UsageError("give either --theta or --grid, not both")
    if args.grid is not None:
        if args.grid < 1:
            raise UsageError("--grid must be >= 1")
        return -np.pi + 2 * np.pi * np.arange(args.grid) / args.grid
    if args.theta is None:
        raise UsageError("one of --theta or --grid is required")
    t = np.asarray(_floats(args.theta))
    return np.deg2rad(t) if args.degrees else t


def _table(args, header, rows):
    rows = list(rows)
    if args.format == "json":
        eio.emit(eio.table_json(header, rows), args.out)
    elif len(rows) == 1 and len(header) == 2 and args.format is None:
        eio.emit(eio.fmt(rows[0][1]) + "\n", args.out)
    else:
        eio.emit(eio.table_csv(header, rows), args.out)


def _json(args, obj):
    eio.emit(eio.dumps(obj), args.out)


# -- subcommands ----------------------------------------------------------------------


def cmd_pdf(args):
    p = _params(args.params)
    t = _thetas(args)
    f = log_density(t, p) if args.log else ewc_density(t, p)
    _table(args, ["theta", "log_density" if args.log else "density"], zip(t, np.atleast_1d(f)))


def cmd_cdf(args):
    p = _params(args.params)
    t = _thetas(args)
    _table(args, ["theta", "cdf"], zip(t, np.atleast_1d(cdf(t, p))))


def cmd_prob(args):
    p = _params(args.params)
    a, b = args.a, args.b
    if args.degrees:
        a, b = np.deg2rad(a), np.deg2rad(b)
    try:
        v = interval_probability(a, b, p)
    except ValueError as e:
        raise UsageError(str(e)) from None
    _table(args, ["interval", "probability"], [(f"[{eio.fmt(a)}, {eio.fmt(b)}]", v)])


def cmd_moments(args):
    from .moments import circular_summary, trig_moment

    p = _params(args.params)
    if args.max_order < 0:
        raise UsageError("--max-order must be >= 0")
    moms = [trig_moment(n, p) for n in range(args.max_order + 1)]
    if args.format == "csv":
        _table(args, ["n", "re", "im", "modulus"], [(n, m.real, m.imag, abs(m)) for n, m in enumerate(moms)])
        return
    _json(args, {
        "params": p.to_dict(),
        "moments": [{"n": n, "re": m.real, "im": m.imag} for n, m in enumerate(moms)],
        "summary": circular_summary(p).to_dict(),
    })


def cmd_shape(args):
    from .shape import is_symmetric, modality, stationary_coeffs

    p = _params(args.params)
    if p.rho1 == 0 and p.rho2 == 0:
        raise UsageError("the circular uniform distribution has no modes")
    sym = is_symmetric(p)
    sc = stationary_coeffs(p)
    _json(args, {
        "params": p.to_dict(),
        "symmetric": sym.symmetric,
        "axis": sym.axis,
        "stationary_coefficients": dict(zip(("a0", "a1", "a2", "a3", "a4"), sc.as_tuple())),
        "shift": sc.shift,
        **modality(p).to_dict(),
    })


def cmd_sample(args):
    from .sampling import McmcConfig, sample

    p = _params(args.params)
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    kw = {}
    if args.method == "mcmc":
        kw["cfg"] = McmcConfig(args.burn_in, args.thin, args.chains)
    batch = sample(p, args.n, args.method, args.seed, **kw)
    meta = {"params": p.to_dict(), **batch.metadata()}
    eio.write_angles(batch.angles, meta, args.out)


def cmd_fit(args):
    from .fitting import fit_ewc, fit_wc, load_csv, loglik

    data = load_csv(args.data, degrees=args.degrees)
    init = _params(args.init) if args.init else None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = fit_ewc(data, init=init, jobs=args.jobs)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    wc = fit_wc(data)
    out = res.to_dict()
    out["n"] = len(data)
    out["wc_fit"] = {"mu": wc.mu, "rho": wc.rho, "loglik": loglik(data, EwcParams(wc.mu, 0.0, wc.rho, 0.0))}
    if args.params_out:
        eio.write_params(args.params_out, res.params)
    _json(args, out)


def cmd_oracle(args):
    from .brownian import WalkConfig, conditional_equal_sample, conditional_exit_sample

    p = _params(args.params)
    if args.construction == "walk":
        cfg = WalkConfig(step_std=args.step_std, epsilon=args.epsilon, batch_size=args.batch_size)
        batch, rep = conditional_exit_sample(p, args.n_target, cfg, args.seed, args.bins, jobs=args.jobs)
    else:
        batch, rep = conditional_equal_sample(p, args.n_target, args.epsilon, args.seed, args.bins)
    if args.samples_out:
        eio.write_angles(batch.angles, batch.metadata(), args.samples_out)
    _json(args, {"params": p.to_dict(), "construction": args.construction, **rep.to_dict(), **batch.metadata()})


def cmd_sphere_pdf(args):
    from .sphere import sphere_density

    sp = _sphere_params(args.params)
    x = np.asarray(_floats(args.x))
    if x.size != sp.d:
        raise UsageError(f"--x has {x.size} coordinates, the model has d = {sp.d}")
    if abs(np.linalg.norm(x) - 1) > 1e-12:
        raise UsageError("--x must be a unit vector")
    v = sphere_density(x, sp)
    if args.format == "json":
        _json(args, {"x": x.tolist(), "density": v})
    else:
        eio.emit(eio.fmt(v) + "\n", args.out)


def cmd_sphere_sample(args):
    from .sampling import McmcConfig
    from .sphere import sample_exit, sample_sphere_mcmc

    sp = _sphere_params(args.params)
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    if args.method == "exit":
        if sp.rho2 != 0:
            raise UsageError("exact sampling needs rho2 = 0; use --method mcmc")
        x, rate = sample_exit(sp.rho1, sp.eta1, args.n, args.seed, return_rate=True)
    else:
        cfg = McmcConfig(args.burn_in, args.thin, args.chains)
        x, rate = sample_sphere_mcmc(sp, args.n, cfg, args.seed, return_rate=True)
    meta = {"params": sp.to_dict(), "method": args.method, "seed": args.seed, "n": args.n, "acceptance_rate": rate}
    eio.write_vectors(x, meta, args.out)


def cmd_plotdata(args):
    from . import figures

    if args.sign_map:
        if args.sign_map == "disc":
            x, y, S = figures.discriminant_map_disc(args.n)
            cols = ["x", "y", "sign"]
        else:
            x, y, S = figures.discriminant_map_rho(args.n)
            cols = ["rho1", "rho2", "sign"]
        X, Y = np.meshgrid(x, y, indexing="xy")
        _table(args, cols, zip(X.ravel(), Y.ravel(), S.ravel()))
        return
    if args.params and args.panel:
        raise UsageError("give either --params or --panel, not both")
    if args.params:
        curves = [("density", _params(args.params))]
    else:
        panels = "abcd" if args.panel in (None, "all") else args.panel
        curves = []
        for k in panels:
            curves += [(f"{k}:{lab}", p) for lab, p in figures.DENSITY_PANELS[k]]
    t, f = figures.density_curves(curves, args.n)
    _table(args, ["theta"] + [lab for lab, _ in curves], (np.r_[ti, fi] for ti, fi in zip(t, f.T)))


def cmd_verify(args):
    from .verify import SUITES, run

    if args.suite != "all" and args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from all, {', '.join(SUITES)}")
    failed = 0
    for suite, name, ok, detail, secs in run(args.suite, args.seed):
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {suite:<9} {name:<45} {detail} ({secs:.1f}s)", flush=True)
    print(f"{failed} check(s) failed" if failed else "all checks passed")
    return EXIT_NUMERIC if failed else 0


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ewcirc", description="Extended wrapped Cauchy distributions on the circle and sphere.")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def common(sp, params=True, fmt=True):
        if params:
            sp.add_argument("--params", required=True, help="parameter JSON file or inline JSON object")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", default=None, help="output path (default stdout)")
        if fmt:
            sp.add_argument("--format", choices=("csv", "json"), default=None)
        sp.add_argument("--jobs", type=int, default=1)

    def thetas(sp):
        sp.add_argument("--theta", help="comma-separated angles")
        sp.add_argument("--grid", type=int, help="evaluate on n equally spaced angles")
        sp.add_argument("--degrees", action="store_true")

    s = sub.add_parser("pdf", help="density values")
    common(s)
    thetas(s)
    s.add_argument("--log", action="store_true", help="log density")
    s.set_defaults(func=cmd_pdf)

    s = sub.add_parser("cdf", help="distribution function")
    common(s)
    thetas(s)
    s.set_defaults(func=cmd_cdf)

    s = sub.add_parser("prob", help="probability of an interval [a, b]")
    common(s)
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--b", type=float, required=True)
    s.add_argument("--degrees", action="store_true")
    s.set_defaults(func=cmd_prob)

    s = sub.add_parser("moments", help="trigonometric moments and summary")
    common(s)
    s.add_argument("--max-order", type=int, default=4)
    s.set_defaults(func=cmd_moments)

    s = sub.add_parser("shape", help="symmetry, modality and extrema")
    common(s)
    s.set_defaults(func=cmd_shape)

    s = sub.add_parser("sample", help="draw angles")
    common(s, fmt=False)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--method", choices=("rejection", "inverse_cdf", "mcmc"), default="rejection")
    s.add_argument("--burn-in", type=int, default=1000)
    s.add_argument("--thin", type=int, default=10)
    s.add_argument("--chains", type=int, default=1)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("fit", help="maximum-likelihood fit to a theta CSV")
    common(s, params=False)
    s.add_argument("--data", required=True)
    s.add_argument("--degrees", action="store_true")
    s.add_argument("--init", help="extra starting point (JSON)")
    s.add_argument("--params-out", help="write fitted parameters as JSON")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("oracle", help="Brownian-motion conditioning check")
    common(s)
    s.add_argument("--construction", choices=("walk", "equal"), default="walk")
    s.add_argument("--n-target", type=int, default=20_000)
    s.add_argument("--epsilon", type=float, default=0.05)
    s.add_argument("--step-std", type=float, default=0.005)
    s.add_argument("--bins", type=int, default=72)
    s.add_argument("--batch-size", type=int, default=200_000)
    s.add_argument("--samples-out", help="also write the accepted angles")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("sphere-pdf", help="spherical density at a unit vector")
    common(s)
    s.add_argument("--x", required=True, help="comma-separated coordinates")
    s.set_defaults(func=cmd_sphere_pdf)

    s = sub.add_parser("sphere-sample", help="draw unit vectors")
    common(s, fmt=False)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--method", choices=("exit", "mcmc"), default="mcmc")
    s.add_argument("--burn-in", type=int, default=1000)
    s.add_argument("--thin", type=int, default=10)
    s.add_argument("--chains", type=int, default=1)
    s.set_defaults(func=cmd_sphere_sample)

    s = sub.add_parser("plotdata", help="density curves and discriminant maps as CSV")
    common(s, params=False)
    s.add_argument("--params", help="single parameter set (JSON)")
    s.add_argument("--panel", choices=("a", "b", "c", "d", "all"))
    s.add_argument("--sign-map", choices=("disc", "rho"),
                   help="discriminant sign map over the disc (rho2 = 0.5) or over (rho1, rho2) instead of curves")
    s.add_argument("--n", type=int, default=720)
    s.set_defaults(func=cmd_plotdata)

    s = sub.add_parser("verify", help="run the property sweeps")
    common(s, params=False, fmt=False)
    s.add_argument("--suite", default="all")
    s.set_defaults(func=cmd_verify, seed=42)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    from .brownian import OracleError
    from .fitting import DataError
    from .sampling import ConvergenceError

    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "jobs", 1) < 1:
            raise UsageError("--jobs must be >= 1")
        if args.command == "verify" and args.seed is None:
            args.seed = 42
        return int(args.func(args) or 0)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (eio.ParamsError, DataError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, OracleError, FloatingPointError, np.linalg.LinAlgError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as e:
        # invalid parameter values caught by the domain types
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
