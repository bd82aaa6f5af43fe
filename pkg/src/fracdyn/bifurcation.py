"""One-parameter sweeps of scalar families g(gamma, x): branch diagrams,
saddle-node/pitchfork classification and divergence detection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import scalar_analysis as sa
from .caputo_solver import CaputoProblem, solve_pece
from .field_expr import FieldDef, numeric_derivative

__all__ = [
    "BranchPoint",
    "BifurcationDiagram",
    "sweep",
    "classify",
    "divergence_check",
]

DEGENERATE_DERIVATIVE = 1e-6
FOLD_FIT_POINTS = 10


@dataclass(frozen=True)
class BranchPoint:
    gamma: float
    zero: float
    deriv: float

    @property
    def stable(self):
        return self.deriv < 0

    @property
    def degenerate(self):
        return abs(self.deriv) < DEGENERATE_DERIVATIVE


@dataclass(frozen=True)
class BifurcationDiagram:
    gammas: np.ndarray
    points: tuple  # tuple of tuples of BranchPoint, one inner tuple per gamma

    def counts(self):
        return [len(p) for p in self.points]


def sweep(family: FieldDef, gamma_range, n_gammas, scan_interval=(-5.0, 5.0),
          resolution=2000, base_params=(), gamma_param="gamma") -> BifurcationDiagram:
    """Per-parameter zero scan; empty and degenerate zero sets are tolerated."""
    if n_gammas < 3:
        raise ValueError(f"need at least 3 parameter values, got {n_gammas}")
    gi = family.params.index(gamma_param) if gamma_param in family.params else None
    gammas = np.linspace(gamma_range[0], gamma_range[1], n_gammas)
    per_gamma = []
    for gam in gammas:
        params = list(base_params) if base_params else [0.0] * len(family.params)
        if gi is not None:
            params[gi] = float(gam)
        params = tuple(params)
        zeros = sa.scan_zeros(family, scan_interval, resolution, params)
        pts = []
        for z in zeros:
            d = numeric_derivative(family, 0, [z], 0, params)
            pts.append(BranchPoint(float(gam), z, d))
        per_gamma.append(tuple(pts))
    return BifurcationDiagram(gammas, tuple(per_gamma))


def _fold_exponent(diag, i_trans, gamma_star, high_count):
    """Fitted exponent of the branch amplitude above the fold."""
    gs, amps = [], []
    for g, pts in zip(diag.gammas[i_trans:], diag.points[i_trans:]):
        if len(pts) != high_count or g <= gamma_star:
            continue
        zeros = [p.zero for p in pts]
        amps.append((max(zeros) - min(zeros)) / 2.0)
        gs.append(g - gamma_star)
        if len(gs) >= FOLD_FIT_POINTS:
            break
    if len(gs) < 3 or min(amps) <= 0:
        return math.nan
    slope = np.polyfit(np.log(gs), np.log(amps), 1)[0]
    return float(slope)


def classify(diag: BifurcationDiagram) -> str:
    """Label the diagram 'saddle-node', 'pitchfork' or 'none'."""
    counts = diag.counts()
    # Collapse degenerate folds (a single |g'|~0 zero) onto the transition.
    effective = []
    for pts in diag.points:
        if len(pts) == 1 and pts[0].degenerate:
            effective.append(None)  # fold point itself
        else:
            effective.append(len(pts))
    transitions = []
    prev = None
    prev_idx = None
    for i, c in enumerate(effective):
        if c is None:
            continue
        if prev is not None and c != prev:
            transitions.append((prev_idx, i, prev, c))
        prev, prev_idx = c, i
    if len(transitions) != 1:
        return "none"
    i_lo, i_hi, low, high = transitions[0]
    # Fold location: a flagged degenerate point if present, else the midpoint.
    fold_idx = None
    for i in range(i_lo, i_hi + 1):
        pts = diag.points[i]
        if any(p.degenerate for p in pts):
            fold_idx = i
            break
    if fold_idx is not None:
        gamma_star = float(diag.gammas[fold_idx])
    else:
        gamma_star = float(0.5 * (diag.gammas[i_lo] + diag.gammas[i_hi]))

    expo = _fold_exponent(diag, i_hi, gamma_star, high)
    sqrt_like = not math.isnan(expo) and abs(expo - 0.5) <= 0.1

    if low == 0 and high == 2 and sqrt_like:
        return "saddle-node"
    if low == 1 and high == 3 and sqrt_like and _middle_branch_persists(diag, i_lo, i_hi):
        return "pitchfork"
    return "none"


def _middle_branch_persists(diag, i_lo, i_hi, tol=0.05):
    pre = [p.zero for p in diag.points[i_lo]]
    if len(pre) != 1:
        return False
    post = sorted(p.zero for p in diag.points[i_hi])
    middle = post[len(post) // 2]
    return abs(middle - pre[0]) <= tol


def divergence_check(family: FieldDef, gamma, alpha, x0, t_end, dt=0.01,
                     base_params=(), gamma_param="gamma") -> bool:
    """True iff the trajectory escapes to -infinity before t_end."""
    gi = family.params.index(gamma_param)
    params = list(base_params) if base_params else [0.0] * len(family.params)
    params[gi] = float(gamma)
    p = CaputoProblem(alpha, family, tuple(params), (float(x0),), t_end, dt)
    traj = solve_pece(p)
    return traj.escape_index is not None and traj.escape_sign < 0


def apriori_upper_bound(eta, gamma, alpha, t):
    """Kernel-correct a-priori bound eta + gamma t^alpha / Gamma(alpha+1),
    valid while g(gamma, x) <= gamma along the trajectory (e.g. gamma - x^2)."""
    return eta + gamma * t**alpha / math.gamma(alpha + 1.0)
