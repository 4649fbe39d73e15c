"""Command-line front end.

Subcommands: ``derive``, ``ruin``, ``transform``, ``invert``, ``simulate``,
``pde``, ``table``.  Reserve inputs are raw company reserves (u-coordinates)
and are normalized internally; ``table`` sweeps normalized coordinates, which
coincide with raw reserves whenever ``delta = (1, 1)``.

Exit codes: 0 success, 2 model validation failure, 3 capability mismatch
(method does not support the claim law or discount), 4 numerical tolerance
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import closedform, mc, pde, transform
from .errors import Ruin2dError, ToleranceNotMet, UnsupportedClaimLaw
from .model import (
    Exponential,
    RiskModel,
    derive,
    load_model,
    model_from_dict,
    normalize,
    validate,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CAPABILITY = 3
EXIT_TOLERANCE = 4

_FMT = "%.12g"


def _fmt(x) -> str:
    return _FMT % float(x)


def _default_threads() -> int:
    return int(os.environ.get("RUIN2D_THREADS", "1"))


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", help="path to a JSON model file")
    p.add_argument("--lam", type=float, help="claim arrival intensity (inline model)")
    p.add_argument("--mu", type=float, help="exponential claim intensity (inline model)")
    p.add_argument("--c", type=float, nargs=2, metavar=("C1", "C2"), help="premium rates")
    p.add_argument(
        "--delta", type=float, nargs=2, metavar=("D1", "D2"), default=[1.0, 1.0],
        help="claim proportions (default 1 1)",
    )


def _build_model(args) -> RiskModel:
    inline = args.lam is not None or args.mu is not None or args.c is not None
    if args.model and inline:
        raise SystemExit("specify either --model or inline parameters, not both")
    if args.model:
        return load_model(args.model)
    if not (args.lam is not None and args.mu is not None and args.c is not None):
        raise SystemExit("inline model needs --lam, --mu and --c (or use --model FILE)")
    return model_from_dict(
        {
            "lambda": args.lam,
            "claim": {"type": "exponential", "mu": args.mu},
            "c": list(args.c),
            "delta": list(args.delta),
        }
    )


def _validated_model(args):
    model = _build_model(args)
    report = validate(model)
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if not report.ok:
        for v in report.violations:
            print(f"invalid model: {v}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)
    return model


def cmd_derive(args) -> int:
    model = _validated_model(args)
    dc = derive(model)
    rows = {
        "p1": dc.p1,
        "p2": dc.p2,
        "rho": dc.rho,
        "d": dc.d,
        "regime": dc.regime,
    }
    if isinstance(model.claim, Exponential):
        rows.update(
            mu=dc.mu,
            gamma1=dc.gamma1,
            gamma2=dc.gamma2,
            gamma3=dc.gamma3,
            C1=dc.C1,
            C2=dc.C2,
            q_plus=dc.q_plus_end,
            q_minus=dc.q_minus_end,
        )
    if args.json:
        print(json.dumps({k: v if isinstance(v, str) else float(v) for k, v in rows.items()}))
    else:
        for key, value in rows.items():
            print(f"{key:>8} = {value if isinstance(value, str) else _fmt(value)}")
    return EXIT_OK


def cmd_ruin(args) -> int:
    model = _validated_model(args)
    u1, u2 = args.u
    x1, x2 = normalize(model, u1, u2)
    s = args.s
    method = args.method
    exponential = isinstance(model.claim, Exponential)
    if method is None:
        method = "exact" if exponential and s == 0.0 else ("pde" if exponential else "mc")
    try:
        if method == "exact":
            if not exponential or s != 0.0:
                raise UnsupportedClaimLaw("exact method needs exponential claims and s=0")
            res = closedform.survival(model, x1, x2, tol=args.tol)
            print(f"ruin = {_fmt(1.0 - res.value)}  method=exact  "
                  f"error<={_fmt(res.quadrature_error)}  regime={res.regime}")
        elif method == "invert":
            if not exponential or s != 0.0:
                raise UnsupportedClaimLaw("invert method needs exponential claims and s=0")
            if not (x2 > x1 > 0):
                raise UnsupportedClaimLaw("invert method needs upper-cone reserves x2 > x1 > 0")
            val = transform.invert_2d(model, x1, x2)
            print(f"ruin = {_fmt(1.0 - val)}  method=invert  error<=1e-3 (cross-check grade)")
        elif method == "pde":
            if not exponential:
                raise UnsupportedClaimLaw("pde method needs exponential claims")
            label = "ruin" if s == 0.0 else "ruin_lt"
            r_needed, w = pde.to_grid_coords(model, u1, u2)
            if w > 0:
                # lower cone: the transform is company 2's discounted value
                from .onedim import ruin_transform_exp

                val = ruin_transform_exp(model, x2, s)
                print(f"{label} = {_fmt(val)}  method=exact (lower cone)  s={_fmt(s)}")
                return EXIT_OK
            grid = pde.solve(model, s=s, r_max=max(1.0, 1.05 * r_needed), steps=args.steps)
            val = pde.evaluate(grid, u1, u2)
            print(f"{label} = {_fmt(val)}  method=pde  error<={_fmt(grid.error_estimate)}  s={_fmt(s)}")
        elif method == "mc":
            if s > 0.0:
                est = mc.ruin_time_lt(
                    model, u1, u2, s, args.horizon, args.paths, args.seed,
                    threads=args.threads,
                )
                print(
                    f"ruin_lt = {_fmt(est.mean)}  stderr={_fmt(est.std_error)}  "
                    f"bias<={_fmt(est.meta['bias_bound'])}  method=mc  n={est.n}  seed={est.seed}"
                )
            elif args.ultimate:
                # lower-cone points reduce to the one-dimensional problem at x2
                xa, xb = (x1, x2) if x2 >= x1 else (x2, x2)
                est = mc.conditional_survival(
                    model, xa, xb, args.paths, args.seed, threads=args.threads
                )
                print(
                    f"ruin = {_fmt(1.0 - est.mean)}  stderr={_fmt(est.std_error)}  "
                    f"method=mc(conditional)  n={est.n}  seed={est.seed}"
                )
            else:
                est = mc.simulate_joint_ruin(
                    model, u1, u2, args.horizon, args.paths, args.seed,
                    threads=args.threads,
                )
                tail = est.meta.get("lundberg_tail")
                extra = f"  tail<={_fmt(tail)}" if tail is not None else ""
                print(
                    f"ruin(T={_fmt(args.horizon)}) = {_fmt(est.mean)}  "
                    f"stderr={_fmt(est.std_error)}  method=mc  n={est.n}  seed={est.seed}{extra}"
                )
        else:
            raise UnsupportedClaimLaw(f"unknown method {method}")
    except UnsupportedClaimLaw as exc:
        print(f"capability error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except ToleranceNotMet as exc:
        print(f"tolerance error: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_transform(args) -> int:
    model = _validated_model(args)
    try:
        val = transform.psi_tilde(model, args.p, args.q)
    except UnsupportedClaimLaw as exc:
        print(f"capability error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    print(f"psi_tilde({_fmt(args.p)},{_fmt(args.q)}) = {_fmt(val)}")
    return EXIT_OK


def cmd_invert(args) -> int:
    model = _validated_model(args)
    x1, x2 = args.x
    try:
        val = transform.invert_2d(model, x1, x2)
    except (UnsupportedClaimLaw, Ruin2dError) as exc:
        print(f"capability error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    print(f"survival({_fmt(x1)},{_fmt(x2)}) = {_fmt(val)}  method=invert")
    return EXIT_OK


def cmd_simulate(args) -> int:
    model = _validated_model(args)
    u1, u2 = args.u
    try:
        if args.method == "conditional":
            x1, x2 = normalize(model, u1, u2)
            if x2 < x1:
                print("capability error: conditional estimator needs the upper cone",
                      file=sys.stderr)
                return EXIT_CAPABILITY
            est = mc.conditional_survival(
                model, x1, x2, args.paths, args.seed, threads=args.threads
            )
            kind = "survival"
        elif args.method == "fluid":
            est = mc.simulate_joint_ruin_fluid(model, u1, u2, args.horizon, args.paths, args.seed)
            kind = "ruin_by_horizon"
        elif args.s is not None:
            est = mc.ruin_time_lt(
                model, u1, u2, args.s, args.horizon, args.paths, args.seed,
                threads=args.threads,
            )
            kind = "ruin_time_lt"
        else:
            est = mc.simulate_joint_ruin(
                model, u1, u2, args.horizon, args.paths, args.seed, threads=args.threads
            )
            kind = "ruin_by_horizon"
    except (UnsupportedClaimLaw, Ruin2dError) as exc:
        print(f"capability error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    meta = json.dumps({**est.meta, "estimand": kind}, sort_keys=True, default=float)
    out = args.output or sys.stdout
    close = False
    if isinstance(out, str):
        out = open(out, "w", encoding="utf-8", newline="\n")
        close = True
    out.write("estimate,stderr,n,seed,meta\n")
    out.write(
        f"{_fmt(est.mean)},{_fmt(est.std_error)},{est.n},{est.seed},\"{meta}\"\n"
    )
    if close:
        out.close()
    return EXIT_OK


def cmd_pde(args) -> int:
    model = _validated_model(args)
    try:
        grid = pde.solve(model, s=args.s, r_max=args.rmax, steps=args.steps, tol=args.tol)
    except UnsupportedClaimLaw as exc:
        print(f"capability error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except Ruin2dError as exc:
        print(f"tolerance error: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    if args.point is not None:
        u1, u2 = args.point
        try:
            val = pde.evaluate(grid, u1, u2)
        except Ruin2dError as exc:
            print(f"capability error: {exc}", file=sys.stderr)
            return EXIT_CAPABILITY
        print(f"psi({_fmt(u1)},{_fmt(u2)};s={_fmt(args.s)}) = {_fmt(val)}  "
              f"error<={_fmt(grid.error_estimate)}")
        return EXIT_OK
    out = args.output or sys.stdout
    close = False
    if isinstance(out, str):
        out = open(out, "w", encoding="utf-8", newline="\n")
        close = True
    out.write("r,w,u1,u2,chi,xi,h\n")
    h = grid.h
    stride = args.dump_stride if args.dump_stride > 0 else 1
    for i in range(0, grid.n + 1, stride):
        r = i * grid.r_step
        for j in range(0, i + 1, stride):
            w = -j * grid.w_step
            u1 = model.delta1 * r + model.c1 * w
            u2 = model.delta2 * r + model.c2 * w
            out.write(
                ",".join(
                    _fmt(v) for v in (r, w, u1, u2, grid.chi[i, j], grid.xi[i, j], h[i, j])
                )
                + "\n"
            )
    if close:
        out.close()
    return EXIT_OK


def _table_rows(model, xs1, xs2, tol):
    for x1 in xs1:
        for x2 in xs2:
            yield x1, x2


def cmd_table(args) -> int:
    model = _validated_model(args)
    if not isinstance(model.claim, Exponential):
        print("capability error: table uses the exponential closed form", file=sys.stderr)
        return EXIT_CAPABILITY
    lo1, hi1, n1 = args.x1
    lo2, hi2, n2 = args.x2
    xs1 = np.linspace(lo1, hi1, int(n1))
    xs2 = np.linspace(lo2, hi2, int(n2))
    pairs = [(x1, x2) for x1 in xs1 for x2 in xs2]

    def one(pair):
        x1, x2 = pair
        try:
            res = closedform.survival(model, x1, x2, tol=args.tol)
            return (x1, x2, res, None)
        except ToleranceNotMet as exc:
            return (x1, x2, None, str(exc))

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(one, pairs))
    else:
        results = [one(p) for p in pairs]

    out = args.output or sys.stdout
    close = False
    if isinstance(out, str):
        out = open(out, "w", encoding="utf-8", newline="\n")
        close = True
    out.write("x1,x2,survival,ruin,omega,quadratureError,regime\n")
    failed = False
    for x1, x2, res, err in results:
        if res is None:
            failed = True
            out.write(f"{_fmt(x1)},{_fmt(x2)},nan,nan,nan,nan,failed\n")
            continue
        out.write(
            ",".join(
                (
                    _fmt(x1),
                    _fmt(x2),
                    _fmt(res.value),
                    _fmt(1.0 - res.value),
                    _fmt(res.omega),
                    _fmt(res.quadrature_error),
                    res.regime,
                )
            )
            + "\n"
        )
    if close:
        out.close()
    return EXIT_TOLERANCE if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ruin2d",
        description="Joint ruin probabilities for two proportionally coupled companies",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("derive", help="print derived model constants")
    _add_model_args(p)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("ruin", help="joint ruin probability at raw reserves")
    _add_model_args(p)
    p.add_argument("--u", type=float, nargs=2, required=True, metavar=("U1", "U2"))
    p.add_argument("--s", type=float, default=0.0, help="ruin-time discount rate")
    p.add_argument("--method", choices=["exact", "pde", "mc", "invert"])
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--paths", type=float, default=1e5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=float, default=200.0)
    p.add_argument("--steps", type=int, default=400)
    p.add_argument("--ultimate", action="store_true",
                   help="with --method mc: use the unbiased conditional estimator")
    p.add_argument("--threads", type=int, default=_default_threads())
    p.set_defaults(func=lambda a: cmd_ruin(_coerce_paths(a)))

    p = sub.add_parser("transform", help="evaluate the double transform psi_tilde(p,q)")
    _add_model_args(p)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("invert", help="numeric double inversion at normalized (x1,x2)")
    _add_model_args(p)
    p.add_argument("--x", type=float, nargs=2, required=True, metavar=("X1", "X2"))
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("simulate", help="Monte Carlo estimators (CSV output)")
    _add_model_args(p)
    p.add_argument("--u", type=float, nargs=2, required=True, metavar=("U1", "U2"))
    p.add_argument("--paths", type=float, default=1e5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=float, default=100.0)
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--method", choices=["naive", "conditional", "fluid"], default="naive")
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--output", help="CSV file (default stdout)")
    p.set_defaults(func=lambda a: cmd_simulate(_coerce_paths(a)))

    p = sub.add_parser("pde", help="solve the transform system on the cone")
    _add_model_args(p)
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--rmax", type=float, default=10.0)
    p.add_argument("--steps", type=int, default=400)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--point", type=float, nargs=2, metavar=("U1", "U2"))
    p.add_argument("--dump-stride", type=int, default=0,
                   help="emit every k-th node only (0 = all nodes)")
    p.add_argument("--output", help="CSV file (default stdout)")
    p.set_defaults(func=cmd_pde)

    p = sub.add_parser("table", help="closed-form survival sweep to CSV")
    _add_model_args(p)
    p.add_argument("--x1", type=float, nargs=3, required=True, metavar=("LO", "HI", "N"))
    p.add_argument("--x2", type=float, nargs=3, required=True, metavar=("LO", "HI", "N"))
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--output", help="CSV file (default stdout)")
    p.set_defaults(func=cmd_table)

    return parser


def _coerce_paths(args):
    args.paths = int(args.paths)
    return args


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
