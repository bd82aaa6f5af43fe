"""One-shot verification battery binding every module's invariants.

Each check returns a CheckResult with a margin (how far inside the
tolerance the measurement landed; negative means failure).  The CLI's
`verify` subcommand renders these as a JSON report; the test suite reuses
them directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from . import bifurcation as bif
from . import catalog
from . import scalar_analysis as sa
from .caputo_solver import CaputoProblem, convergence_order, solve_pece
from .function_space_semigroup import (
    RhoParams,
    SampledFunction,
    apply_T,
    semigroup_defect,
    state_space_defect,
)
from .mittag_leffler import ml

__all__ = ["CheckResult", "run_checks", "SUITES", "FAULTS"]

FAULTS = ("inflate-gamma",)


@dataclass
class CheckResult:
    check: str
    status: str  # "pass" | "fail"
    margin: float
    details: str

    @property
    def passed(self):
        return self.status == "pass"

    def to_record(self):
        return asdict(self)


def _result(name, passed, margin, details):
    return CheckResult(name, "pass" if passed else "fail", float(margin), details)


# ---------------------------------------------------------------------------
# Mittag-Leffler suite


def check_ml_exp():
    errs = [
        abs(ml(1.0, 1.0, z) - math.exp(z)) / math.exp(z)
        for z in np.linspace(-10, 10, 41)
    ]
    worst = max(errs)
    return _result("ml_exp_identity", worst <= 1e-10, 1e-10 - worst,
                   f"max relative error vs exp on [-10,10]: {worst:.3e}")


def check_ml_cosh():
    errs = [
        abs(ml(2.0, 1.0, z) - math.cosh(math.sqrt(z))) / math.cosh(math.sqrt(z))
        for z in np.linspace(0, 10, 21)
    ]
    worst = max(errs)
    return _result("ml_cosh_identity", worst <= 1e-10, 1e-10 - worst,
                   f"max relative error vs cosh(sqrt(z)) on [0,10]: {worst:.3e}")


def check_ml_erfc():
    ref = math.exp(1.0) * math.erfc(1.0)
    err = abs(ml(0.5, 1.0, -1.0) - ref) / ref
    return _result("ml_erfc_identity", err <= 1e-8, 1e-8 - err,
                   f"relative error vs exp(1)*erfc(1): {err:.3e}")


def check_ml_monotone():
    ts = np.linspace(0.0, 50.0, 200)
    for alpha in (0.3, 0.5, 0.8, 1.0):
        vals = [ml(alpha, 1.0, -t) for t in ts]
        if min(vals) <= 0 or any(b > a + 1e-14 for a, b in zip(vals, vals[1:])):
            return _result("ml_monotone_decay", False, -1.0,
                           f"positivity/monotonicity broken for alpha={alpha}")
    return _result("ml_monotone_decay", True, 0.0,
                   "E_alpha(-t) positive and non-increasing on [0,50]")


# ---------------------------------------------------------------------------
# Solver suite


def _scalar_problem(name, alpha, eta, t_end, dt):
    entry = catalog.get(name)
    return CaputoProblem(alpha, entry.fld, entry.default_params, (eta,), t_end, dt)


def check_solver_order():
    slope = convergence_order(_scalar_problem("linear", 0.5, 1.0, 1.0, 0.02), levels=4)
    ok = slope != "exact" and slope >= 1.2
    return _result("solver_order_linear", ok, (slope if ok else 0.0) - 1.2,
                   f"empirical order {slope} (theory 1+alpha=1.5, need >= 1.2)")


def check_order_preservation(n_pairs=20, seed=42):
    rng = np.random.default_rng(seed)
    specs = [("linear", -2.5, 2.5), ("cubic", -2.5, 2.5),
             ("pitchfork", -2.5, 2.5), ("saddle", -0.9, 2.5)]
    worst_gap = math.inf
    for _ in range(n_pairs):
        name, lo, hi = specs[rng.integers(len(specs))]
        alpha = float(rng.uniform(0.2, 0.9))
        e1 = float(rng.uniform(lo, hi))
        e2 = float(rng.uniform(lo, hi))
        if abs(e1 - e2) < 1e-3:
            e2 = e1 + 1e-3
        lo_eta, hi_eta = min(e1, e2), max(e1, e2)
        t1 = solve_pece(_scalar_problem(name, alpha, lo_eta, 10.0, 0.01))
        t2 = solve_pece(_scalar_problem(name, alpha, hi_eta, 10.0, 0.01))
        stop = min(
            t1.escape_index if t1.escape_index is not None else len(t1.times),
            t2.escape_index if t2.escape_index is not None else len(t2.times),
        )
        gap = float(np.min(t2.scalar()[:stop] - t1.scalar()[:stop]))
        worst_gap = min(worst_gap, gap)
        if gap <= 0:
            return _result("order_preservation", False, gap,
                           f"order broken for {name}, alpha={alpha:.3f}, "
                           f"etas ({lo_eta:.4f}, {hi_eta:.4f})")
    return _result("order_preservation", True, worst_gap,
                   f"{n_pairs} random pairs stayed ordered (min gap {worst_gap:.3e})")


def check_cauchy_refinement():
    ends = []
    for dt in (0.02, 0.01, 0.005):
        ends.append(float(solve_pece(_scalar_problem("cubic", 0.5, 2.0, 5.0, dt)).scalar()[-1]))
    d1 = abs(ends[0] - ends[1])
    d2 = abs(ends[1] - ends[2])
    ratio = d1 / d2 if d2 > 0 else math.inf
    return _result("cauchy_refinement", ratio >= 2.0, ratio - 2.0,
                   f"endpoint change shrank by factor {ratio:.2f} per halving")


def check_absorbing_bound():
    entry = catalog.get("cubic")
    a, b = entry.dissipativity
    bound = 1.0 + a / b + 0.1
    traj = solve_pece(_scalar_problem("cubic", 0.5, 2.5, 50.0, 0.01))
    tail = traj.scalar()[traj.times >= 25.0]
    worst = float(np.max(tail**2))
    return _result("absorbing_bound", worst <= bound, bound - worst,
                   f"max |x|^2 after t_end/2 is {worst:.4f} (bound {bound})")


# ---------------------------------------------------------------------------
# Scalar asymptotics suite


def check_attractor_cubic():
    entry = catalog.get("cubic")
    zs = sa.find_zeros(entry.fld, entry.scan_interval)
    iv = sa.attractor_interval(zs)
    err = max(abs(iv.lo + 1.0), abs(iv.hi - 1.0))
    return _result("attractor_cubic", err <= 1e-9, 1e-9 - err,
                   f"interval [{iv.lo:.12f}, {iv.hi:.12f}], endpoint error {err:.2e}")


def check_envelope_cubic(fault=None):
    entry = catalog.get("cubic")
    gamma = sa.gamma_rate_constant(entry.fld, 1.0, 0.5)
    if fault == "inflate-gamma":
        gamma *= 10.0
    traj = solve_pece(_scalar_problem("cubic", 0.6, 0.5, 30.0, 0.002))
    rep = sa.envelope_check(traj, 1.0, gamma)
    return _result("envelope_check", rep.holds, 1.0 - rep.worst_ratio,
                   f"gamma={gamma:.4f}, worst envelope ratio {rep.worst_ratio:.4f}"
                   + ("" if rep.holds else f", first violation at index {rep.first_violation_index}"))


def check_rate_linear():
    traj = solve_pece(_scalar_problem("linear", 0.5, 1.0, 1000.0, 0.05))
    slope = sa.rate_fit(traj, 0.0)
    err = abs(slope + 0.5)
    return _result("rate_fit_linear", err <= 0.1, 0.1 - err,
                   f"fitted slope {slope:.4f} (expected -0.5 +- 0.1)")


def check_classify_vs_solver():
    entry = catalog.get("cubic")
    zs = sa.find_zeros(entry.fld, entry.scan_interval)
    worst = 0.0
    for eta in (-2.5, -0.3, 0.4, 2.2):
        pred = sa.classify_limit(entry.fld, zs, eta)
        traj = solve_pece(_scalar_problem("cubic", 0.6, eta, 2000.0, 0.1))
        err = abs(float(traj.scalar()[-1]) - pred)
        worst = max(worst, err)
    return _result("classify_vs_solver", worst < 0.05, 0.05 - worst,
                   f"max |endpoint - prediction| = {worst:.4f} over 4 seeds")


# ---------------------------------------------------------------------------
# Triangular suite


def check_product_attractor():
    from .triangular_systems import product_attractor

    entry = catalog.get("fig2")
    box = product_attractor(entry.fld, box=[(-3.0, 3.0), (-3.0, 3.0)])
    err = max(
        max(abs(iv.lo + 1.0), abs(iv.hi - 1.0)) for iv in box.intervals
    )
    return _result("product_attractor_fig2", err <= 1e-9, 1e-9 - err,
                   f"box {[(iv.lo, iv.hi) for iv in box.intervals]}, error {err:.2e}")


def check_componentwise_limits():
    from .triangular_systems import componentwise_limits

    entry = catalog.get("fig2")
    fld = entry.fld.assembled()
    worst = 0.0
    for x0 in ((0.5, 0.5), (-0.4, 1.5), (1.8, -0.6), (-1.2, -1.7)):
        pred = componentwise_limits(entry.fld, x0, box=[(-3.0, 3.0), (-3.0, 3.0)])
        traj = solve_pece(CaputoProblem(0.6, fld, (), x0, 500.0, 0.05))
        err = float(np.max(np.abs(traj.states[-1] - np.asarray(pred))))
        worst = max(worst, err)
    return _result("componentwise_limits_fig2", worst < 0.05, 0.05 - worst,
                   f"max endpoint deviation {worst:.4f} over 4 seeds")


# ---------------------------------------------------------------------------
# Bifurcation suite


def check_bifurcation_labels():
    saddle = catalog.get("saddle")
    pitch = catalog.get("pitchfork")
    d1 = bif.sweep(saddle.fld, (-1.0, 1.0), 201)
    d2 = bif.sweep(pitch.fld, (-1.0, 1.0), 201)
    l1, l2 = bif.classify(d1), bif.classify(d2)
    ok = l1 == "saddle-node" and l2 == "pitchfork"
    return _result("bifurcation_labels", ok, 1.0 if ok else -1.0,
                   f"saddle family -> {l1!r}, pitchfork family -> {l2!r}")


def check_divergence_cases():
    saddle = catalog.get("saddle").fld
    cases = [(-0.5, 0.0, True), (0.25, 0.0, False), (0.25, -1.0, True)]
    for gam, x0, expect in cases:
        got = bif.divergence_check(saddle, gam, 0.5, x0, 50.0)
        if got != expect:
            return _result("divergence_cases", False, -1.0,
                           f"gamma={gam}, x0={x0}: expected {expect}, got {got}")
    return _result("divergence_cases", True, 1.0,
                   "all three saddle-family divergence cases match")


# ---------------------------------------------------------------------------
# Semigroup suite


def check_state_space_defect():
    worst = math.inf
    for alpha in (0.3, 0.5, 0.8):
        worst = min(worst, state_space_defect(alpha, 1.0, 1.0, 1.0))
    return _result("state_space_defect", worst > 0.01, worst - 0.01,
                   f"min defect over alpha in (0.3,0.5,0.8): {worst:.4f}")


def check_semigroup_defect():
    entry = catalog.get("linear")
    p = RhoParams(n_max=20)
    defects = []
    # dt must divide tau = 0.5 so the shifts stay grid-aligned.
    for dt in (0.05, 0.025):
        f = SampledFunction.constant([1.0], 21.0 + dt, dt)
        defects.append(semigroup_defect(0.5, 0.5, f, entry.fld, (), 0.5, dt, p))
    ratio = defects[0] / defects[1] if defects[1] > 0 else math.inf
    return _result("semigroup_defect", ratio >= 1.5, ratio - 1.5,
                   f"defects {defects[0]:.3e} -> {defects[1]:.3e}, ratio {ratio:.2f}")


# ---------------------------------------------------------------------------
# Registry


SUITES = {
    "ml": [check_ml_exp, check_ml_cosh, check_ml_erfc, check_ml_monotone],
    "solver": [check_solver_order, check_order_preservation,
               check_cauchy_refinement, check_absorbing_bound],
    "scalar": [check_attractor_cubic, check_envelope_cubic, check_rate_linear,
               check_classify_vs_solver],
    "triangular": [check_product_attractor, check_componentwise_limits],
    "bifurcation": [check_bifurcation_labels, check_divergence_cases],
    "semigroup": [check_state_space_defect, check_semigroup_defect],
}


def run_checks(suite=None, fault=None):
    """Run one suite or everything; fault injection flips named checks."""
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault '{fault}'; available: {', '.join(FAULTS)}")
    suites = [suite] if suite else list(SUITES)
    results = []
    for s in suites:
        if s not in SUITES:
            raise ValueError(f"unknown suite '{s}'; available: {', '.join(SUITES)}")
        for check in SUITES[s]:
            if check is check_envelope_cubic:
                results.append(check(fault=fault))
            else:
                results.append(check())
    return results
