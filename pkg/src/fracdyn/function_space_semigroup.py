"""Semigroup representation of Caputo dynamics on a function space.

The solution map of a Caputo FDE is not a semigroup on state space (memory
breaks concatenation), but the shift-plus-memory operators T_tau acting on
continuous functions f: R+ -> R^d through the forced Volterra equation do
compose: T_{t1+t2} = T_{t1} T_{t2}.  This module realizes the metric of
uniform convergence on compacts, the operators, and numerical defects
quantifying both facts.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .caputo_solver import solve_svie
from .mittag_leffler import ml

__all__ = [
    "SampledFunction",
    "RhoParams",
    "rho",
    "apply_T",
    "semigroup_defect",
    "state_space_defect",
]


@dataclass(frozen=True)
class SampledFunction:
    """A function R+ -> R^d sampled on a uniform grid [0, Theta]."""

    theta_grid: np.ndarray
    values: np.ndarray  # (n_points, d)

    def __post_init__(self):
        grid = np.asarray(self.theta_grid, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if grid.ndim != 1 or vals.shape[0] != grid.shape[0]:
            raise ValueError("grid and values shapes do not match")
        steps = np.diff(grid)
        if len(steps) and not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
            raise ValueError("grid must be uniform")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "theta_grid", grid)
        object.__setattr__(self, "values", vals)

    @property
    def dimension(self):
        return self.values.shape[1]

    @property
    def horizon(self):
        return float(self.theta_grid[-1])

    @classmethod
    def constant(cls, x0, theta_max, dt):
        n = int(round(theta_max / dt))
        grid = dt * np.arange(n + 1)
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        return cls(grid, np.tile(x0, (n + 1, 1)))

    @classmethod
    def from_callable(cls, fn, theta_max, dt, dimension=1):
        n = int(round(theta_max / dt))
        grid = dt * np.arange(n + 1)
        vals = np.array([np.atleast_1d(fn(t)) for t in grid], dtype=float)
        del dimension
        return cls(grid, vals)

    def at(self, t):
        """Linear interpolation, extended by the last value beyond the grid."""
        t = np.asarray(t, dtype=float)
        return np.column_stack(
            [np.interp(t, self.theta_grid, self.values[:, j])
             for j in range(self.dimension)]
        )


@dataclass(frozen=True)
class RhoParams:
    n_max: int = 20

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")


def rho(f: SampledFunction, h: SampledFunction, p: RhoParams = RhoParams()) -> float:
    """Truncated metric sum_{n<=n_max} 2^-n sup_[0,n]|f-h| / (1 + sup_[0,n]|f-h|).

    Truncation error is below 2^-n_max since each summand is below 1.
    """
    horizon = min(f.horizon, h.horizon)
    if horizon < p.n_max - 1e-12:
        raise ValueError(
            f"samples cover [0, {horizon}] but the metric needs [0, {p.n_max}]"
        )
    if f.theta_grid.shape == h.theta_grid.shape and np.allclose(
        f.theta_grid, h.theta_grid, atol=1e-12
    ):
        grid = f.theta_grid
        diff = np.linalg.norm(f.values - h.values, axis=1)
    else:
        n_pts = max(len(f.theta_grid), len(h.theta_grid))
        grid = np.linspace(0.0, horizon, n_pts)
        diff = np.linalg.norm(f.at(grid) - h.at(grid), axis=1)
    total = 0.0
    for n in range(1, p.n_max + 1):
        sup = float(np.max(diff[grid <= n + 1e-12]))
        total += 2.0**-n * sup / (1.0 + sup)
    return total


def apply_T(tau, f: SampledFunction, fld, params, alpha, dt, theta_max=None) -> SampledFunction:
    """The operator (T_tau f)(theta) = f(tau+theta) + memory integral.

    tau is snapped to the solver grid; f must cover [0, tau + theta_max]
    (it is extended by its last value with a warning otherwise).  At
    theta = 0 the Volterra solution's own endpoint is used.
    """
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    if theta_max is None:
        theta_max = RhoParams().n_max
    m = int(round(tau / dt))
    tau_snap = m * dt
    if abs(tau_snap - tau) > 1e-12:
        warnings.warn(
            f"tau={tau} snapped to the grid multiple {tau_snap}", stacklevel=2
        )
    n_out = int(round(theta_max / dt))
    out_grid = dt * np.arange(n_out + 1)
    if f.horizon < tau_snap + theta_max - 1e-9:
        warnings.warn(
            f"forcing covers [0, {f.horizon}] but [0, {tau_snap + theta_max}] is "
            "needed; extending by the final value",
            stacklevel=2,
        )
    shifted = f.at(tau_snap + out_grid)

    if m == 0:
        return SampledFunction(out_grid, shifted)

    traj = solve_svie(f, fld, params, alpha, tau_snap, dt)
    gvals = np.array(
        [[fn(tuple(s), tuple(params)) for fn in fld.compiled()] for s in traj.states]
    )

    # Product-trapezoidal memory integral int_0^tau (tau+theta-s)^(a-1) g ds,
    # exact for piecewise-linear g-values; kernel is smooth for theta > 0.
    s_left = traj.times[:-1]  # (m,)
    big_t = tau_snap + out_grid[1:, None]  # (n_out, 1)
    u_l = big_t - s_left[None, :]  # (n_out, m)
    u_r = u_l - dt
    ua_l = u_l**alpha
    ua_r = u_r**alpha
    i0 = (ua_l - ua_r) / alpha
    i1 = (u_l * i0 - (u_l * ua_l - u_r * ua_r) / (alpha + 1.0)) / dt
    w_left = i0 - i1  # weight of g at s_j
    w_right = i1  # weight of g at s_{j+1}
    integral = w_left @ gvals[:-1] + w_right @ gvals[1:]  # (n_out, d)

    out = shifted.copy()
    out[1:] += integral / math.gamma(alpha)
    out[0] = traj.states[-1]
    return SampledFunction(out_grid, out)


def semigroup_defect(tau1, tau2, f, fld, params, alpha, dt,
                     p: RhoParams = RhoParams()) -> float:
    """rho(T_{tau1+tau2} f, T_{tau1} T_{tau2} f); zero in exact arithmetic."""
    theta = float(p.n_max)
    one_shot = apply_T(tau1 + tau2, f, fld, params, alpha, dt, theta_max=theta)
    inner = apply_T(tau2, f, fld, params, alpha, dt, theta_max=theta + tau1)
    composed = apply_T(tau1, inner, fld, params, alpha, dt, theta_max=theta)
    return rho(one_shot, composed, p)


def state_space_defect(alpha, t, s, lam=1.0) -> float:
    """Concatenation failure of the state-space solution map on g(x) = -lam x:

        |E_a(-lam (t+s)^a) - E_a(-lam t^a) E_a(-lam s^a)|

    Positive for 0 < alpha < 1, zero for alpha = 1 (the exponential).
    """
    if t <= 0 or s <= 0:
        raise ValueError("t and s must be positive")
    if lam <= 0:
        raise ValueError("lam must be positive")
    joint = ml(alpha, 1.0, -lam * (t + s) ** alpha)
    split = ml(alpha, 1.0, -lam * t**alpha) * ml(alpha, 1.0, -lam * s**alpha)
    return abs(joint - split)
