"""Command-line driver.

Every subcommand accepts ``--out`` (default stdout), ``--seed``, ``--tol``
and ``--config FILE.json`` whose keys mirror the long flags; flags given
on the command line win over the file. Exit codes: 0 success, 2 domain
error, 3 resource cap, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import os
import sys
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence

import numpy as np

from . import ensemble, io, llt, vershik, young
from .errors import CapExceeded, DomainError, EnsembleError, InfeasibleConstraint
from .inversion import DEFAULT_MARGIN, DEFAULT_TOL, invert
from .profile import MacroState, ProfileParams, phi

THREADS_ENV = "BERNOULLI_ENSEMBLES_THREADS"
TV_CLASS_LIMIT = 1000


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _pool_map(fn: Callable, items: Sequence) -> list:
    """``map`` over independent work items; results keep the input order."""
    workers = min(_threads(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(fn, items))


@contextlib.contextmanager
def _output(path: str, binary: bool = False):
    if path in (None, "-"):
        yield sys.stdout.buffer if binary else sys.stdout
    else:
        with open(path, "wb" if binary else "w", newline=None if binary else "") as fh:
            yield fh


def _emit_json(args, record: dict) -> None:
    with _output(args.out) as fh:
        fh.write(io.dumps(record))
        fh.write("\n")


def _int_list(s: str) -> list[int]:
    return [int(x) for x in s.split(",") if x.strip()]


def _macro_to_profile(rho: float, m: float, tol: float) -> ProfileParams:
    return invert(MacroState(rho, m), tol=tol).params


# --- commands --------------------------------------------------------------------


def cmd_invert(args) -> int:
    target = MacroState(args.rho, args.m)
    res = invert(target, tol=args.tol, margin=args.margin)
    back = phi(res.params)
    _emit_json(
        args,
        {
            "rho": target.rho,
            "m": target.m,
            "a": res.params.a,
            "b": res.params.b,
            "logit_a": res.params.logit,
            "residual": [abs(back.rho - target.rho), abs(back.m - target.m)],
            "iterations": res.iterations,
        },
    )
    return 0


def cmd_profile(args) -> int:
    if args.a is not None and args.b is not None:
        p = ProfileParams(args.a, args.b)
    elif args.rho is not None and args.m is not None:
        p = _macro_to_profile(args.rho, args.m, args.tol)
    else:
        raise DomainError("give either --a and --b or --rho and --m")
    curve = young.limit_curve(p, args.grid_points)
    if args.curve == "beta":
        curve = young.Curve(curve.grid, -curve.d1)
    with _output(args.out) as fh:
        io.write_curve_csv(curve, fh, args.curve)
    return 0


def _resolve_spec(args) -> ensemble.CanonicalSpec:
    if args.K is not None and args.M is not None:
        spec = ensemble.CanonicalSpec(args.ell, args.K, args.M)
    elif args.rho is not None and args.m is not None:
        spec = ensemble.CanonicalSpec.from_macro(args.ell, args.rho, args.m)
    else:
        raise DomainError("give either --K and --M or --rho and --m")
    if not spec.feasible:
        raise InfeasibleConstraint(f"no configuration with K={spec.K}, M={spec.M} on ell={spec.ell}")
    return spec


def _draw(spec, method: str, seed: int, count: int, sweeps: Optional[int], burn_in, thin) -> np.ndarray:
    if method == "exact":
        return ensemble.exact_occupancy(spec, seed, count)
    if sweeps is None:
        sweeps = 8 * spec.ell * spec.ell
    return ensemble.mcmc_occupancy(spec, seed, sweeps, count, burn_in, thin)


def _tv(a: np.ndarray, b: np.ndarray) -> float:
    ca = Counter(map(bytes, a))
    cb = Counter(map(bytes, b))
    return 0.5 * math.fsum(abs(ca[k] / len(a) - cb[k] / len(b)) for k in ca.keys() | cb.keys())


def cmd_sample(args) -> int:
    spec = _resolve_spec(args)
    if args.method == "exact" and spec.ell > ensemble.EXACT_CAP:
        raise CapExceeded(f"exact sampler is capped at ell={ensemble.EXACT_CAP}; use --method mcmc")
    occ = _draw(spec, args.method, args.seed, args.count, args.sweeps, args.burn_in, args.thin)
    header = {
        "type": "spec",
        "ell": spec.ell,
        "K": spec.K,
        "M": spec.M,
        "rho": spec.rho,
        "m": spec.m,
        "method": args.method,
        "seed": args.seed,
        "count": args.count,
    }
    summary = {"type": "summary", "sites": list(range(-spec.ell, spec.ell + 1))}
    summary["one_point"] = occ.mean(axis=0).tolist()
    steps = [young.height_from_config(row, spec.ell).scaled_steps() for row in occ]
    summary["scaled_height"] = {
        "x": steps[0].grid.tolist(),
        "value": np.mean([s.values for s in steps], axis=0).tolist(),
    }
    if ensemble.count(spec) <= TV_CLASS_LIMIT and spec.ell <= ensemble.EXACT_CAP:
        n_tv = args.tv_samples
        exact = ensemble.exact_occupancy(spec, args.seed, n_tv)
        chain = ensemble.mcmc_occupancy(spec, args.seed, 1000 + 10 * n_tv, n_tv, burn_in=1000, thin=10)
        summary["tv_exact_mcmc"] = _tv(exact, chain)
        summary["tv_samples"] = n_tv
    with _output(args.out) as fh:
        io.write_ndjson([header], fh)
        io.write_ndjson(
            ({"type": "sample", "ell": spec.ell, "K": spec.K, "M": spec.M, "occupancy": row.tolist()} for row in occ),
            fh,
        )
        io.write_ndjson([summary], fh)
    return 0


def _alpha_model(spec_str: str, n: int, defects: frozenset) -> llt.WeightedSumModel:
    kind, _, rest = spec_str.partition(":")
    if kind == "const":
        return llt.WeightedSumModel.constant(n, float(rest), defects)
    if kind == "profile":
        a, b = (float(x) for x in rest.split(","))
        return llt.WeightedSumModel.from_profile(n, ProfileParams(a, b), defects)
    raise DomainError(f"unknown alpha spec {spec_str!r}; use const:VALUE or profile:A,B")


def _defect_sites(tokens: list[str], n: int) -> frozenset:
    out = set()
    for tok in tokens:
        out.add(n // 2 if tok == "half" else int(tok))
    return frozenset(out)


def cmd_llt(args) -> int:
    ns = sorted(_int_list(args.n))
    if not ns:
        raise DomainError("--n needs at least one size")
    if ns[-1] > llt.PMF_CAP:
        raise CapExceeded(f"exact PMF is capped at n={llt.PMF_CAP}, got n={ns[-1]}")
    tokens = [t for t in (args.defects or "").split(",") if t.strip()]
    try:
        models = [_alpha_model(args.alpha, n, _defect_sites(tokens, n)) for n in ns]
    except ValueError as exc:
        raise DomainError(str(exc)) from exc

    def scan(model):
        pmf = llt.exact_pmf(model)
        if args.pmf_dir:
            with open(os.path.join(args.pmf_dir, f"pmf_n{model.n}.bin"), "wb") as fh:
                io.write_pmf_binary(pmf, fh)
        return llt.sup_error(model, pmf), llt.moments(model)

    results = _pool_map(scan, models)
    rows = []
    errors = []
    for model, (err, mom) in zip(models, results):
        errors.append(err)
        slope = llt.log_log_slope(ns[: len(errors)], errors) if len(errors) > 1 else float("nan")
        bound = 0.05 * llt.gaussian_q0(0.0, 0.0, mom.lam)
        rows.append([model.n, len(model.defects), float(mom.lam), float(err), float(bound), slope])
    with _output(args.out) as fh:
        io.write_table_csv(["n", "defects", "lam", "sup_error", "bound", "slope"], rows, fh)
    return 0


def _converge_one(rho, m, p, samples, seed, sweeps_factor, self_test):
    psi = young.limit_curve(p)

    def run(ell: int) -> list:
        spec = ensemble.CanonicalSpec.from_macro(ell, rho, m)
        if not spec.feasible:
            raise InfeasibleConstraint(f"(rho, m) rounds to an infeasible class at ell={ell}")
        sweeps = int(sweeps_factor * ell * ell)
        burn = sweeps // 2
        thin = max(1, (sweeps - burn) // samples)
        child = int(np.random.SeedSequence([seed, ell]).generate_state(1)[0])
        occ = ensemble.mcmc_occupancy(spec, child, sweeps, samples, burn, thin)
        if self_test:
            curves = [young.height_from_config(row, ell).scaled_steps() for row in occ]
            d = [young.sup_distance(c, c) for c in curves] + [young.sup_distance(psi, psi)]
        else:
            d = [young.sup_distance(young.height_from_config(row, ell).scaled_steps(), psi) for row in occ]
        d = np.asarray(d)
        return [ell, spec.K, spec.M, float(d.mean()), float(d.std(ddof=1)) if d.size > 1 else 0.0]

    return run


def cmd_converge(args) -> int:
    ells = sorted(_int_list(args.ell))
    if not ells or ells[0] < 1:
        raise DomainError("--ell needs positive sizes")
    if args.samples < 1:
        raise DomainError("--samples must be positive")
    p = _macro_to_profile(args.rho, args.m, args.tol)
    run = _converge_one(args.rho, args.m, p, args.samples, args.seed, args.sweeps_factor, args.self_test)
    rows = _pool_map(run, ells)
    with _output(args.out) as fh:
        io.write_table_csv(["ell", "K", "M", "mean_sup_distance", "sd"], rows, fh)
    return 0


def cmd_vershik(args) -> int:
    MacroState(args.rho, args.m)
    p = _macro_to_profile(args.rho, args.m, args.tol)
    bose = vershik.BoseCurveParams(args.rho, 0.0 - p.b)
    fermi = vershik.rotate_to_fermi(bose, args.grid_points)
    record = {
        "rho": args.rho,
        "m": args.m,
        "a": p.a,
        "b": p.b,
        "c_bar": bose.c_bar,
        "sup_discrepancy": vershik.identify_curves(args.rho, args.m, args.grid_points, args.tol),
        "ode_residual_fermi": vershik.ode_residual(fermi, vershik.SQRT2 * bose.c_bar),
        "ode_residual_bose": vershik.bose_ode_residual(bose, args.grid_points),
        "ode_residual_limit": vershik.ode_residual(young.limit_curve(p, args.grid_points), -p.b),
        "L0": vershik.bose_L(0.0, bose),
        "L1": vershik.bose_L(1.0, bose),
    }
    if args.curve_out:
        with open(args.curve_out, "w", newline="") as fh:
            io.write_curve_csv(fermi, fh, "psi_bar")
    _emit_json(args, record)
    return 0


# --- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="-", help="output path, '-' for stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--config", help="JSON file of flag values; explicit flags override it")

    parser = argparse.ArgumentParser(
        prog="bernoulli-ensembles",
        description="Equivalence of ensembles for Bernoulli measures with two conserved quantities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("invert", parents=[common], help="solve (rho, m) -> (a, b)")
    p.add_argument("--rho", type=float)
    p.add_argument("--m", type=float)
    p.add_argument("--margin", type=float, default=DEFAULT_MARGIN)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("profile", parents=[common], help="limit curve or profile as CSV")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--m", type=float)
    p.add_argument("--curve", choices=["psi", "beta"], default="psi")
    p.add_argument("--grid-points", type=int, default=young.DEFAULT_GRID)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("sample", parents=[common], help="draw configurations as NDJSON")
    p.add_argument("--ell", type=int)
    p.add_argument("--K", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--rho", type=float)
    p.add_argument("--m", type=float)
    p.add_argument("--method", choices=["exact", "mcmc"], default="exact")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--sweeps", type=int, help="MCMC sweeps (default 8 ell^2)")
    p.add_argument("--burn-in", type=int)
    p.add_argument("--thin", type=int)
    p.add_argument("--tv-samples", type=int, default=100000)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("llt", parents=[common], help="local limit theorem error scan as CSV")
    p.add_argument("--n", default="40,80,160", help="comma-separated sizes")
    p.add_argument("--alpha", default="const:0.5", help="const:VALUE or profile:A,B")
    p.add_argument("--defects", default="", help="comma-separated sites; 'half' means n//2")
    p.add_argument("--pmf-dir", help="also write each PMF in binary form to this directory")
    p.set_defaults(func=cmd_llt)

    p = sub.add_parser("converge", parents=[common], help="sup distance of scaled heights to the limit")
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--m", type=float, default=0.05)
    p.add_argument("--ell", default="50,200", help="comma-separated window sizes")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--sweeps-factor", type=float, default=4.0, help="MCMC sweeps per ell^2")
    p.add_argument("--self-test", action="store_true", help="compare each curve with itself")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("vershik", parents=[common], help="identify the limit curve with the rotated box curve")
    p.add_argument("--rho", type=float)
    p.add_argument("--m", type=float)
    p.add_argument("--grid-points", type=int, default=young.DEFAULT_GRID)
    p.add_argument("--curve-out", help="also write psi_bar as CSV")
    p.set_defaults(func=cmd_vershik)
    parser.set_defaults(_subparsers=sub.choices)
    return parser


REQUIRED = {"invert": ("rho", "m"), "sample": ("ell",), "vershik": ("rho", "m")}


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise DomainError("config file must hold a JSON object")
        sub = args._subparsers[args.command]
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        unknown = set(cfg) - {a.dest for a in sub._actions}
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        # file values become defaults, so explicit flags still override them
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    missing = [f"--{k.replace('_', '-')}" for k in REQUIRED.get(args.command, ()) if getattr(args, k) is None]
    if missing:
        raise DomainError(f"{args.command} needs {', '.join(missing)}")
    return args


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = parse_args(argv)
        return args.func(args)
    except EnsembleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
