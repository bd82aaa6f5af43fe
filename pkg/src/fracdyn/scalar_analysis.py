"""Scalar Caputo FDE asymptotics: steady states, attractor interval,
Mittag-Leffler decay envelopes, limit classification, convergence-rate
fitting, backward time extension and heteroclinic orbits.

Everything here works on one-dimensional fields g: R -> R satisfying the
dissipativity bound g(x)*x <= a - b*x^2 (H1) and hyperbolicity of every
zero, g'(x*) != 0 (H2).  Under those, the interval spanned by the zero set
attracts all bounded sets, pointwise convergence toward the nearest stable
zero is bounded above by E_alpha(-gamma t^alpha) with an explicitly
constructible gamma, and the long-time rate is t^(-alpha).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .caputo_solver import CaputoProblem, Trajectory, solve_pece
from .field_expr import FieldDef, eval_field, numeric_derivative
from .mittag_leffler import ml_decay

__all__ = [
    "DissipativityCertificate",
    "DissipativityError",
    "ZeroSet",
    "AttractorInterval",
    "HeteroclinicOrbit",
    "EnvelopeReport",
    "DegenerateZeroError",
    "DegenerateBasinError",
    "BracketFailureError",
    "InsufficientDataError",
    "check_h1",
    "find_zeros",
    "attractor_interval",
    "gamma_rate_constant",
    "envelope_check",
    "classify_limit",
    "rate_fit",
    "backward_extend",
    "heteroclinic_orbit",
    "lower_bound_check",
    "default_lipschitz_bound",
]

H2_DERIVATIVE_FLOOR = 1e-6
ZERO_BISECTION_WIDTH = 1e-12
ENVELOPE_SLACK = 1e-3


class DissipativityError(ValueError):
    """The sampled dissipativity bound failed; carries a witness point."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class DegenerateZeroError(ValueError):
    """A zero with |g'| below the hyperbolicity floor (H2 violation)."""

    def __init__(self, message, zero=None):
        super().__init__(message)
        self.zero = zero


class DegenerateBasinError(ValueError):
    """Seed at or beyond an adjacent zero; no one-sided decay constant exists."""


class BracketFailureError(RuntimeError):
    """Backward extension could not bracket a preimage at this horizon."""


class InsufficientDataError(ValueError):
    """Too few usable points for a rate fit."""


@dataclass(frozen=True)
class DissipativityCertificate:
    a: float
    b: float
    scan_interval: tuple
    worst_margin: float

    def radius(self):
        """Zeros are confined to +-sqrt(a/b); see the attractor bound."""
        return math.sqrt(self.a / self.b)


@dataclass(frozen=True)
class ZeroSet:
    zeros: tuple  # sorted ascending
    derivs: tuple  # g' at each zero

    def __len__(self):
        return len(self.zeros)

    def stable(self):
        return tuple(z for z, d in zip(self.zeros, self.derivs) if d < 0)

    def distance(self, x):
        """Euclidean distance from x to the (finite) zero set."""
        return min(abs(x - z) for z in self.zeros)


@dataclass(frozen=True)
class AttractorInterval:
    lo: float
    hi: float

    def distance(self, x):
        if x < self.lo:
            return self.lo - x
        if x > self.hi:
            return x - self.hi
        return 0.0


@dataclass(frozen=True)
class HeteroclinicOrbit:
    source: float
    target: float
    seed: float
    times: np.ndarray  # ascending, spanning [-T_back, T_fwd]
    values: np.ndarray


@dataclass(frozen=True)
class EnvelopeReport:
    holds: bool
    worst_ratio: float
    first_violation_index: int | None
    slack: float


def _scalar_fn(fld: FieldDef, params=()):
    if fld.dimension != 1:
        raise ValueError(f"scalar analysis needs d=1, got d={fld.dimension}")
    fn = fld.compiled()[0]
    p = tuple(params)
    return lambda x: fn((x,), p)


# ---------------------------------------------------------------------------
# Hypothesis checks


def check_h1(fld, a, b, scan_interval=(-10.0, 10.0), n_samples=2000, params=()):
    """Sample the bound g(x)*x <= a - b*x^2 on the scan interval.

    A failure outside the interval is not detectable here; a passing
    certificate is 'inconclusive beyond scan' by construction.
    """
    if a <= 0 or b <= 0:
        raise ValueError(f"need a, b > 0, got a={a}, b={b}")
    if n_samples < 1000:
        raise ValueError(f"need n_samples >= 1000, got {n_samples}")
    g = _scalar_fn(fld, params)
    xs = np.linspace(scan_interval[0], scan_interval[1], n_samples)
    worst = math.inf
    worst_x = xs[0]
    for x in xs:
        margin = a - b * x * x - g(x) * x
        if margin < worst:
            worst = margin
            worst_x = x
    if worst < 0.0:
        raise DissipativityError(
            f"dissipativity fails at x={worst_x:.6g} (margin {worst:.3g})",
            witness=float(worst_x),
        )
    return DissipativityCertificate(a, b, tuple(scan_interval), float(worst))


def _bisect(g, lo, hi):
    flo = g(lo)
    while hi - lo > ZERO_BISECTION_WIDTH:
        mid = 0.5 * (lo + hi)
        fmid = g(mid)
        if fmid == 0.0:
            return mid
        if (flo < 0.0) == (fmid < 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def scan_zeros(fld, scan_interval, resolution=2000, params=()):
    """Bracketing scan + bisection; returns sorted zeros without H2 checks."""
    if resolution < 1000:
        raise ValueError(f"need resolution >= 1000, got {resolution}")
    g = _scalar_fn(fld, params)
    xs = np.linspace(scan_interval[0], scan_interval[1], resolution + 1)
    vals = np.array([g(x) for x in xs])
    zeros = []
    for i in range(resolution):
        if vals[i] == 0.0:
            zeros.append(float(xs[i]))
        elif vals[i] * vals[i + 1] < 0.0:
            zeros.append(_bisect(g, float(xs[i]), float(xs[i + 1])))
    if vals[-1] == 0.0:
        zeros.append(float(xs[-1]))
    return sorted(zeros)


def find_zeros(fld, scan_interval, resolution=2000, params=()) -> ZeroSet:
    """Locate the zero set and the derivative at each zero.

    Raises DegenerateZeroError when |g'| at a zero is below 1e-6 (H2
    violation); warns when the count comes out even, which usually means
    the scan interval is too small.
    """
    zeros = scan_zeros(fld, scan_interval, resolution, params)
    derivs = []
    for z in zeros:
        d = numeric_derivative(fld, 0, [z], 0, params)
        if abs(d) < H2_DERIVATIVE_FLOOR:
            raise DegenerateZeroError(
                f"zero at x={z:.9g} has |g'|={abs(d):.3g} < {H2_DERIVATIVE_FLOOR} "
                "(non-degeneracy fails)",
                zero=z,
            )
        derivs.append(d)
    if zeros and len(zeros) % 2 == 0:
        warnings.warn(
            f"found an even number of zeros ({len(zeros)}); "
            "the scan interval may clip the zero set",
            stacklevel=2,
        )
    return ZeroSet(tuple(zeros), tuple(derivs))


def default_scan_interval(cert: DissipativityCertificate):
    r = cert.radius()
    return (-r - 1.0, r + 1.0)


def attractor_interval(zs: ZeroSet) -> AttractorInterval:
    """The global attractor [min zeros, max zeros]."""
    if not zs.zeros:
        raise ValueError("empty zero set has no attractor interval")
    return AttractorInterval(zs.zeros[0], zs.zeros[-1])


# ---------------------------------------------------------------------------
# Decay envelopes


def gamma_rate_constant(fld, x_star, eta, params=(), grid_points=1000):
    """Explicit positive decay constant for the envelope toward x_star.

    Shift coordinates so the stable zero sits at 0, find the largest radius
    eps where |f(x)| >= |f'(0)|/2 * |x| holds, then take the minimum of
    |f'(0)|/2 and the sampled slope of f between the shifted seed and -eps.
    """
    g = _scalar_fn(fld, params)
    fprime0 = numeric_derivative(fld, 0, [x_star], 0, params)
    if fprime0 >= 0.0:
        raise DegenerateBasinError(
            f"x_star={x_star} is not a stable zero (g'={fprime0:.3g})"
        )
    zeta = eta - x_star
    half_slope = abs(fprime0) / 2.0
    if zeta == 0.0:
        return half_slope

    # f in shifted coordinates, mirrored so the seed is always below zero.
    sign = 1.0 if zeta < 0.0 else -1.0
    f = lambda w: sign * g(x_star + sign * w)
    zshift = -abs(zeta)

    eps = abs(zeta) / 2.0
    while eps > 1e-12:
        ws = np.linspace(-eps, eps, grid_points)
        ok = all(abs(f(w)) >= half_slope * abs(w) for w in ws)
        if ok:
            break
        eps *= 0.5
    if zshift >= -eps:
        return half_slope

    ws = np.linspace(zshift, -eps, grid_points)
    ratios = []
    for w in ws:
        fw = f(w)
        if fw <= 0.0:
            raise DegenerateBasinError(
                f"field changes sign between eta={eta} and x_star={x_star}; "
                "seed lies at or beyond an adjacent zero"
            )
        ratios.append(fw / abs(w))
    return float(min(half_slope, min(ratios)))


def envelope_check(traj: Trajectory, x_star, gamma_rate, eta=None) -> EnvelopeReport:
    """Verify |x(t) - x_star| <= E_alpha(-gamma t^alpha) |eta - x_star| (1+slack)."""
    x = traj.scalar()
    if eta is None:
        eta = float(x[0])
    d0 = abs(eta - x_star)
    worst = 0.0
    first_bad = None
    for i, t in enumerate(traj.times):
        bound = ml_decay(traj.alpha, gamma_rate, float(t)) * d0 if t > 0 else d0
        lhs = abs(float(x[i]) - x_star)
        allowed = bound * (1.0 + ENVELOPE_SLACK)
        ratio = lhs / allowed if allowed > 0 else math.inf
        if ratio > worst:
            worst = ratio
        if lhs > allowed and first_bad is None:
            first_bad = i
    return EnvelopeReport(first_bad is None, worst, first_bad, ENVELOPE_SLACK)


def lower_bound_check(traj: Trajectory, zs: ZeroSet, L) -> EnvelopeReport:
    """Verify d(x(t), N(g)) >= E_alpha(-L t^alpha) d(eta, N(g)) (1 - slack)."""
    if L <= 0:
        raise ValueError(f"need L > 0, got {L}")
    x = traj.scalar()
    d0 = zs.distance(float(x[0]))
    worst = math.inf
    first_bad = None
    for i, t in enumerate(traj.times):
        bound = (ml_decay(traj.alpha, L, float(t)) if t > 0 else 1.0) * d0
        lhs = zs.distance(float(x[i]))
        allowed = bound * (1.0 - ENVELOPE_SLACK)
        ratio = lhs / allowed if allowed > 0 else math.inf
        if ratio < worst:
            worst = ratio
        if lhs < allowed and first_bad is None:
            first_bad = i
    return EnvelopeReport(first_bad is None, worst, first_bad, ENVELOPE_SLACK)


def default_lipschitz_bound(fld, eta, zs: ZeroSet, params=(), n_samples=2000):
    """max |g'| over the convex hull of {eta} and the attractor, inflated 10%."""
    lo = min(eta, zs.zeros[0])
    hi = max(eta, zs.zeros[-1])
    mid = 0.5 * (lo + hi)
    half = 0.55 * (hi - lo)  # 10% inflation
    if half == 0.0:
        half = 0.1
    xs = np.linspace(mid - half, mid + half, n_samples)
    return float(max(abs(numeric_derivative(fld, 0, [x], 0, params)) for x in xs))


# ---------------------------------------------------------------------------
# Limits and rates


def classify_limit(fld, zs: ZeroSet, eta, params=()):
    """Predicted limit of x(t, eta) by pure interval arithmetic on the zeros.

    Inside the attractor every seed converges to the stable zero bounding
    its interval; seeds outside converge to the nearest endpoint.
    """
    del fld, params  # signs are implied by the derivative pattern at the zeros
    zeros = zs.zeros
    if not zeros:
        raise ValueError("empty zero set")
    for z in zeros:
        if eta == z:
            return z
    if eta < zeros[0]:
        return zeros[0]
    if eta > zeros[-1]:
        return zeros[-1]
    for j in range(len(zeros) - 1):
        if zeros[j] < eta < zeros[j + 1]:
            # g' > 0 at the left zero means g > 0 on the interval, so the
            # flow runs toward the right zero; otherwise leftward.
            return zeros[j + 1] if zs.derivs[j] > 0 else zeros[j]
    raise AssertionError("unreachable: eta not located in the zero set")


def rate_fit(traj: Trajectory, x_star):
    """Least-squares slope of log|x(t) - x_star| vs log t on [t_end/100, t_end]."""
    t = np.asarray(traj.times, dtype=float)
    dist = np.abs(traj.scalar() - x_star)
    t_end = t[-1]
    mask = (t >= t_end / 100.0) & (dist > 1e-12)
    if int(mask.sum()) < 20:
        raise InsufficientDataError(
            f"only {int(mask.sum())} usable points in the fit window"
        )
    slope = np.polyfit(np.log(t[mask]), np.log(dist[mask]), 1)[0]
    return float(slope)


# ---------------------------------------------------------------------------
# Backward extension and heteroclinics


def _forward_endpoint(fld, params, alpha, zeta, t_fwd, dt):
    p = CaputoProblem(alpha, fld, tuple(params), (zeta,), t_fwd, dt)
    return float(solve_pece(p).scalar()[-1])


def backward_extend(fld, alpha, eta, t_back, dt, tol=1e-8, params=(), zs=None):
    """Value zeta with x(t_back, zeta) = eta, i.e. x(-t_back, eta).

    Bisection over the open interval of adjacent zeros containing eta is
    valid because the forward solution is strictly increasing in its
    initial value (non-intersection of trajectories).
    """
    if zs is None:
        zs = find_zeros(fld, (-abs(eta) - 10.0, abs(eta) + 10.0), params=params)
    zeros = zs.zeros
    for z in zeros:
        if eta == z:
            return eta
    bracket = None
    for j in range(len(zeros) - 1):
        if zeros[j] < eta < zeros[j + 1]:
            bracket = (zeros[j], zeros[j + 1])
            break
    if bracket is None:
        raise BracketFailureError(
            f"eta={eta} is not strictly between adjacent zeros; backward "
            "solutions leave every compact set there"
        )
    lo = np.nextafter(bracket[0], bracket[1])
    hi = np.nextafter(bracket[1], bracket[0])
    flo = _forward_endpoint(fld, params, alpha, lo, t_back, dt) - eta
    fhi = _forward_endpoint(fld, params, alpha, hi, t_back, dt) - eta
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if (flo < 0.0) == (fhi < 0.0):
        raise BracketFailureError(
            f"no sign change over ({lo}, {hi}) at horizon {t_back}; eta is "
            "too close to a zero for this horizon"
        )
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fmid = _forward_endpoint(fld, params, alpha, mid, t_back, dt) - eta
        if abs(fmid) <= tol:
            return float(mid)
        if (flo < 0.0) == (fmid < 0.0):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
    return float(0.5 * (lo + hi))


def heteroclinic_orbit(
    fld, alpha, zs: ZeroSet, interval_index, eta, t_back, t_fwd, dt, params=(), tol=1e-8
) -> HeteroclinicOrbit:
    """Numerical heteroclinic orbit through eta in the chosen open interval.

    interval_index i selects (zeros[i], zeros[i+1]); the orbit joins its
    endpoints, running from the unstable zero (t -> -inf) to the stable one.
    """
    zeros = zs.zeros
    if not 0 <= interval_index < len(zeros) - 1:
        raise ValueError(
            f"interval index {interval_index} does not select a pair of "
            f"adjacent zeros (have {len(zeros)})"
        )
    left, right = zeros[interval_index], zeros[interval_index + 1]
    if not left < eta < right:
        raise ValueError(f"eta={eta} outside the open interval ({left}, {right})")
    # Sign convention: in g>0 intervals flow runs left->right, else right->left.
    g_positive = zs.derivs[interval_index] > 0
    source, target = (left, right) if g_positive else (right, left)

    fwd = solve_pece(CaputoProblem(alpha, fld, tuple(params), (eta,), t_fwd, dt))
    horizons = []
    h = t_back
    while h >= max(dt, t_back / 64.0):
        horizons.append(h)
        h /= 2.0
    back_times = []
    back_values = []
    for h in sorted(horizons, reverse=True):
        zeta = backward_extend(fld, alpha, eta, h, dt, tol=tol, params=params, zs=zs)
        back_times.append(-h)
        back_values.append(zeta)
    times = np.concatenate([np.asarray(back_times), fwd.times])
    values = np.concatenate([np.asarray(back_values), fwd.scalar()])
    return HeteroclinicOrbit(source, target, eta, times, values)
