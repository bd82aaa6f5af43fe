"""Command-line front end: simulation, analysis and verification.

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from . import bifurcation as bif
from . import catalog
from . import scalar_analysis as sa
from .caputo_solver import CaputoProblem, solve_pece
from .field_expr import FieldDef, ParseError
from .function_space_semigroup import (
    RhoParams,
    SampledFunction,
    semigroup_defect,
    state_space_defect,
)
from .mittag_leffler import MLDomainError, MLOverflowError, MLQuery, ml_eval
from .triangular_systems import (
    TriangularField,
    componentwise_limits,
    product_attractor,
    validate_triangular,
)
from .verification import run_checks

FMT = "%.15g"


def _fmt(v):
    return FMT % v


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    text = "\n".join(lines) + "\n"
    if path == "-" or path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _emit_json(obj):
    json.dump(obj, sys.stdout, indent=2, default=float)
    sys.stdout.write("\n")


def _parse_params(pairs):
    names, values = [], []
    for pair in pairs or []:
        if "=" not in pair:
            raise ValueError(f"--param expects name=value, got '{pair}'")
        name, _, value = pair.partition("=")
        names.append(name.strip())
        values.append(float(value))
    return names, values


def _add_field_args(p, triangular=False):
    p.add_argument("--catalog", help="named catalog field")
    p.add_argument("--component", action="append", default=[],
                   help="component expression (repeat per coordinate)")
    p.add_argument("--param", action="append", default=[],
                   metavar="NAME=VALUE", help="parameter value (repeatable)")
    if triangular:
        p.add_argument("--h", action="append", default=[], metavar="EXPR",
                       help="prefactor h_i expression (repeat per coordinate)")
        p.add_argument("--f", action="append", default=[], metavar="EXPR",
                       help="scalar factor f_i expression (repeat per coordinate)")


def _resolve_scalar_field(args, parser):
    """Returns (FieldDef, params tuple, catalog entry or None)."""
    if bool(args.catalog) == bool(args.component):
        parser.error("exactly one of --catalog or --component is required")
    names, values = _parse_params(args.param)
    if args.catalog:
        entry = catalog.get(args.catalog)
        if entry.triangular:
            parser.error(f"catalog field '{args.catalog}' is triangular; "
                         "use the 'triangular' subcommand")
        fld = entry.fld
        params = list(entry.default_params)
        for n, v in zip(names, values):
            if n not in fld.params:
                parser.error(f"field has no parameter '{n}'")
            params[fld.params.index(n)] = v
        return fld, tuple(params), entry
    fld = FieldDef.parse(args.component, tuple(names))
    return fld, tuple(values), None


def _check_alpha(alpha, parser):
    if not 0.0 < alpha < 1.0:
        parser.error(f"alpha must be in (0, 1), got {alpha}")
    return alpha


# ---------------------------------------------------------------------------
# Subcommands


def cmd_ml(args, parser):
    if args.batch:
        rows = []
        for line in sys.stdin:
            line = line.strip()
            if not line:
                continue
            a, b, z = (float(tok) for tok in line.split())
            rows.append((a, b, z, ml_eval(MLQuery(a, b, z))))
        _write_csv(None, ["alpha", "beta", "z", "value"], rows)
        return 0
    if args.alpha is None or args.z is None:
        parser.error("--alpha and --z are required unless --batch is given")
    try:
        value = ml_eval(MLQuery(args.alpha, args.beta, args.z))
    except (MLDomainError, MLOverflowError) as exc:
        parser.error(str(exc))
    print(_fmt(value))
    return 0


def cmd_simulate(args, parser):
    _check_alpha(args.alpha, parser)
    x0 = tuple(float(v) for v in args.x0.split(","))
    if args.catalog and catalog.get(args.catalog).triangular:
        entry = catalog.get(args.catalog)
        fld, params = entry.fld.assembled(), ()
    else:
        fld, params, _ = _resolve_scalar_field(args, parser)
        if fld.dimension != len(x0) and len(args.component) > 1:
            parser.error("x0 length must match the number of components")
    p = CaputoProblem(args.alpha, fld, params, x0, args.t_end, args.dt)
    traj = solve_pece(p)
    header = ["t"] + [f"x{i + 1}" for i in range(fld.dimension)]
    rows = [(float(t), *map(float, s)) for t, s in zip(traj.times, traj.states)]
    _write_csv(args.out, header, rows)
    if traj.escape_index is not None:
        print(f"escape at t={traj.times[traj.escape_index]:.6g} "
              f"(sign {traj.escape_sign:+d})", file=sys.stderr)
    return 0


def _scan_from_args(args, entry):
    if args.scan:
        lo, _, hi = args.scan.partition(":")
        return (float(lo), float(hi))
    if entry is not None:
        return entry.scan_interval
    return (-10.0, 10.0)


def cmd_attractor(args, parser):
    fld, params, entry = _resolve_scalar_field(args, parser)
    scan = _scan_from_args(args, entry)
    zs = sa.find_zeros(fld, scan, params=params)
    iv = sa.attractor_interval(zs)
    _emit_json({
        "version": __version__,
        "config": {"scan": list(scan)},
        "zeros": list(zs.zeros),
        "derivatives": list(zs.derivs),
        "stable": list(zs.stable()),
        "attractor": [iv.lo, iv.hi],
    })
    return 0


def cmd_limits(args, parser):
    fld, params, entry = _resolve_scalar_field(args, parser)
    scan = _scan_from_args(args, entry)
    zs = sa.find_zeros(fld, scan, params=params)
    etas = [float(v) for v in args.eta.split(",")]
    _emit_json({
        "version": __version__,
        "config": {"scan": list(scan), "eta": etas},
        "limits": [sa.classify_limit(fld, zs, eta, params) for eta in etas],
    })
    return 0


def cmd_heteroclinic(args, parser):
    _check_alpha(args.alpha, parser)
    fld, params, entry = _resolve_scalar_field(args, parser)
    scan = _scan_from_args(args, entry)
    zs = sa.find_zeros(fld, scan, params=params)
    eta = args.eta
    idx = None
    for j in range(len(zs.zeros) - 1):
        if zs.zeros[j] < eta < zs.zeros[j + 1]:
            idx = j
            break
    if idx is None:
        parser.error(f"eta={eta} is not strictly between adjacent zeros")
    orbit = sa.heteroclinic_orbit(
        fld, args.alpha, zs, idx, eta, args.t_back, args.t_fwd, args.dt,
        params=params,
    )
    if args.out:
        _write_csv(args.out, ["t", "x1"],
                   [(float(t), float(v)) for t, v in zip(orbit.times, orbit.values)])
    _emit_json({
        "version": __version__,
        "config": {"alpha": args.alpha, "eta": eta,
                   "t_back": args.t_back, "t_fwd": args.t_fwd, "dt": args.dt},
        "source": orbit.source,
        "target": orbit.target,
        "backward_endpoint": float(orbit.values[0]),
        "forward_endpoint": float(orbit.values[-1]),
    })
    return 0


def cmd_triangular(args, parser):
    has_custom = bool(args.f)
    if bool(args.catalog) == has_custom:
        parser.error("exactly one of --catalog or --f/--h expressions is required")
    if args.catalog:
        entry = catalog.get(args.catalog)
        if not entry.triangular:
            parser.error(f"catalog field '{args.catalog}' is scalar")
        tf = entry.fld
    else:
        d = len(args.f)
        hs = list(args.h) + ["1"] * (d - len(args.h))
        from .field_expr import parse_expr

        tf = TriangularField(
            d,
            tuple(parse_expr(h, d) for h in hs),
            tuple(parse_expr(f, d) for f in args.f),
        )
    box = [(-3.0, 3.0)] * tf.dimension
    report = validate_triangular(tf, box)
    attractor = product_attractor(tf, box)
    out = {
        "version": __version__,
        "config": {"dimension": tf.dimension},
        "h_signs": list(report.h_signs),
        "attractor_box": [[iv.lo, iv.hi] for iv in attractor.intervals],
    }
    if args.x0:
        x0 = tuple(float(v) for v in args.x0.split(","))
        out["predicted_limits"] = list(componentwise_limits(tf, x0, box))
        if args.alpha is not None:
            _check_alpha(args.alpha, parser)
            traj = solve_pece(CaputoProblem(
                args.alpha, tf.assembled(), (), x0, args.t_end, args.dt))
            out["solver_endpoint"] = [float(v) for v in traj.endpoint()]
            if args.out:
                header = ["t"] + [f"x{i + 1}" for i in range(tf.dimension)]
                _write_csv(args.out, header,
                           [(float(t), *map(float, s))
                            for t, s in zip(traj.times, traj.states)])
    _emit_json(out)
    return 0


def cmd_bifurcate(args, parser):
    if args.family in ("saddle", "pitchfork"):
        if args.component:
            parser.error("--component conflicts with a named --family")
        fld = catalog.get(args.family).fld
        params = ()
    elif args.family == "custom":
        if not args.component:
            parser.error("--family custom requires --component")
        names, values = _parse_params(args.param)
        if "gamma" not in names:
            names = ["gamma"] + names
            values = [0.0] + values
        fld = FieldDef.parse(args.component, tuple(names))
        params = tuple(values)
    else:
        parser.error(f"unknown family '{args.family}'")
    lo, _, rest = args.gamma_range.partition(":")
    hi, _, m = rest.partition(":")
    diag = bif.sweep(fld, (float(lo), float(hi)), int(m), base_params=params)
    label = bif.classify(diag)
    rows = []
    for pts in diag.points:
        for p in pts:
            stability = ("degenerate" if p.degenerate
                         else "stable" if p.stable else "unstable")
            rows.append((p.gamma, p.zero, stability))
    if args.out:
        _write_csv(args.out, ["gamma", "zero", "stability"], rows)
    _emit_json({
        "version": __version__,
        "config": {"family": args.family, "gamma_range": args.gamma_range},
        "classification": label,
        "zero_counts": diag.counts(),
    })
    return 0


def cmd_semigroup(args, parser):
    _check_alpha(args.alpha, parser)
    fld, params, _ = _resolve_scalar_field(args, parser)
    p = RhoParams(n_max=args.n_max)
    horizon = float(p.n_max) + args.tau1 + args.tau2
    defects = []
    dt = args.dt0
    for _ in range(args.dt_levels):
        f = SampledFunction.constant([args.f0] * fld.dimension, horizon + dt, dt)
        defects.append(semigroup_defect(
            args.tau1, args.tau2, f, fld, params, args.alpha, dt, p))
        dt /= 2.0
    ratios = [defects[i] / defects[i + 1] if defects[i + 1] > 0 else float("inf")
              for i in range(len(defects) - 1)]
    _emit_json({
        "version": __version__,
        "config": {"alpha": args.alpha, "tau1": args.tau1, "tau2": args.tau2,
                   "dt0": args.dt0, "dt_levels": args.dt_levels},
        "defects": defects,
        "ratios": ratios,
        "state_space_defect": state_space_defect(args.alpha, 1.0, 1.0, 1.0),
    })
    return 0


def cmd_verify(args, parser):
    try:
        results = run_checks(suite=args.suite, fault=args.fault)
    except ValueError as exc:
        parser.error(str(exc))
    report = {
        "version": __version__,
        "config": {"suite": args.suite or "all", "fault": args.fault},
        "results": [r.to_record() for r in results],
    }
    _emit_json(report)
    return 0 if all(r.passed for r in results) else 1


# ---------------------------------------------------------------------------
# Parser assembly


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fracdyn",
        description="Numerical dynamics of Caputo fractional differential equations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ml", help="evaluate the Mittag-Leffler function")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--z", type=float)
    p.add_argument("--batch", action="store_true",
                   help="read 'alpha beta z' lines from stdin, emit CSV")
    p.set_defaults(fn=cmd_ml)

    p = sub.add_parser("simulate", help="solve a Caputo initial value problem")
    _add_field_args(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--x0", required=True, help="comma-separated initial value")
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--out", help="CSV output path ('-' for stdout)")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("attractor", help="zero set and attractor interval")
    _add_field_args(p)
    p.add_argument("--scan", help="scan interval lo:hi")
    p.set_defaults(fn=cmd_attractor)

    p = sub.add_parser("limits", help="predicted limits of given seeds")
    _add_field_args(p)
    p.add_argument("--eta", required=True, help="comma-separated seeds")
    p.add_argument("--scan", help="scan interval lo:hi")
    p.set_defaults(fn=cmd_limits)

    p = sub.add_parser("heteroclinic", help="heteroclinic orbit through a seed")
    _add_field_args(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--t-back", type=float, default=50.0)
    p.add_argument("--t-fwd", type=float, default=100.0)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--scan", help="scan interval lo:hi")
    p.add_argument("--out", help="orbit CSV output path")
    p.set_defaults(fn=cmd_heteroclinic)

    p = sub.add_parser("triangular", help="product attractor of a triangular field")
    _add_field_args(p, triangular=True)
    p.add_argument("--x0", help="comma-separated seed for limit prediction")
    p.add_argument("--alpha", type=float)
    p.add_argument("--t-end", type=float, default=500.0)
    p.add_argument("--dt", type=float, default=0.05)
    p.add_argument("--out", help="orbit CSV output path")
    p.set_defaults(fn=cmd_triangular)

    p = sub.add_parser("bifurcate", help="one-parameter bifurcation sweep")
    p.add_argument("--family", required=True,
                   help="saddle | pitchfork | custom")
    p.add_argument("--gamma-range", required=True, metavar="LO:HI:M")
    p.add_argument("--component", action="append", default=[])
    p.add_argument("--param", action="append", default=[])
    p.add_argument("--out", help="CSV output path (gamma,zero,stability)")
    p.set_defaults(fn=cmd_bifurcate)

    p = sub.add_parser("semigroup", help="function-space semigroup defect study")
    _add_field_args(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--tau1", type=float, default=0.5)
    p.add_argument("--tau2", type=float, default=0.5)
    p.add_argument("--dt0", type=float, default=0.05)
    p.add_argument("--dt-levels", type=int, default=3)
    p.add_argument("--n-max", type=int, default=20)
    p.add_argument("--f0", type=float, default=1.0,
                   help="constant forcing value")
    p.set_defaults(fn=cmd_semigroup)

    p = sub.add_parser("verify", help="run the invariant battery")
    p.add_argument("--suite", help="restrict to one suite (ml, solver, scalar, "
                                   "triangular, bifurcation, semigroup)")
    p.add_argument("--fault", help="inject a named fault (inflate-gamma)")
    p.set_defaults(fn=cmd_verify)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args, parser)
    except (ParseError, ValueError, KeyError) as exc:
        parser.exit(2, f"error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
