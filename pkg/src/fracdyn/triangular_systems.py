"""Product-form triangular vector fields g_i(x) = h_i(x_1..x_{i-1}) * f_i(x_i).

When every prefactor h_i is sign-constant, the sign structure of each
component is carried entirely by the scalar factor f_i, so the scalar
attractor theory applies coordinate by coordinate: the attractor is the
product of the per-coordinate zero-set intervals and limits classify
componentwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import scalar_analysis as sa
from .field_expr import BinOp, FieldDef, Neg, Num, Param, Var, Call

__all__ = [
    "TriangularField",
    "ProductAttractor",
    "TriangularValidationError",
    "validate_triangular",
    "product_attractor",
    "componentwise_limits",
]

H_VANISHING_FLOOR = 1e-9


class TriangularValidationError(ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


def _referenced_vars(node, acc):
    if isinstance(node, Var):
        acc.add(node.index)
    elif isinstance(node, Neg):
        _referenced_vars(node.arg, acc)
    elif isinstance(node, BinOp):
        _referenced_vars(node.lhs, acc)
        _referenced_vars(node.rhs, acc)
    elif isinstance(node, Call):
        _referenced_vars(node.arg, acc)
    return acc


def _remap_vars(node, mapping):
    if isinstance(node, Var):
        return Var(mapping[node.index])
    if isinstance(node, Neg):
        return Neg(_remap_vars(node.arg, mapping))
    if isinstance(node, BinOp):
        return BinOp(node.op, _remap_vars(node.lhs, mapping), _remap_vars(node.rhs, mapping))
    if isinstance(node, Call):
        return Call(node.fn, _remap_vars(node.arg, mapping))
    return node


@dataclass(frozen=True)
class TriangularField:
    """Per-coordinate factor pair (h_i, f_i); h_1 is the constant 1 by default."""

    dimension: int
    h_factors: tuple  # ExprAst over x_1..x_{i-1}
    f_factors: tuple  # ExprAst over x_i only
    params: tuple = ()

    def __post_init__(self):
        d = self.dimension
        if len(self.h_factors) != d or len(self.f_factors) != d:
            raise ValueError("need one (h_i, f_i) pair per coordinate")
        for i, (h, f) in enumerate(zip(self.h_factors, self.f_factors)):
            h_vars = _referenced_vars(h, set())
            if any(v >= i for v in h_vars):
                raise ValueError(
                    f"h_{i + 1} references coordinate index >= {i + 1}; "
                    "the field is not triangular"
                )
            f_vars = _referenced_vars(f, set())
            if f_vars - {i}:
                raise ValueError(f"f_{i + 1} must reference only coordinate {i + 1}")

    def assembled(self) -> FieldDef:
        """The full vector field with components h_i * f_i."""
        comps = tuple(
            BinOp("*", h, f) for h, f in zip(self.h_factors, self.f_factors)
        )
        return FieldDef(self.dimension, comps, self.params)

    def scalar_factor(self, i) -> FieldDef:
        """f_i as a one-dimensional field (its variable remapped to x1)."""
        ast = _remap_vars(self.f_factors[i], {i: 0})
        return FieldDef(1, (ast,), self.params)

    def signed_scalar_factor(self, i, sign) -> FieldDef:
        fld = self.scalar_factor(i)
        ast = fld.components[0] if sign > 0 else Neg(fld.components[0])
        return FieldDef(1, (ast,), self.params)


@dataclass(frozen=True)
class ProductAttractor:
    intervals: tuple  # one AttractorInterval per coordinate

    def contains(self, x, slack=0.0):
        return all(
            iv.lo - slack <= xi <= iv.hi + slack for iv, xi in zip(self.intervals, x)
        )


@dataclass(frozen=True)
class TriangularReport:
    h_signs: tuple
    h_min_abs: tuple
    certificate: object
    zero_sets: tuple


def _sample_h(tf, i, box, n_samples, params):
    """Sample h_i over the first i coordinates of the box."""
    if i == 0:
        fld = FieldDef(tf.dimension, (tf.h_factors[0],) * tf.dimension, tf.params)
        v = fld.compiled()[0]((0.0,) * tf.dimension, tuple(params))
        return np.array([v])
    rng = np.random.default_rng(20_240_801 + i)
    fld = FieldDef(tf.dimension, (tf.h_factors[i],) * tf.dimension, tf.params)
    fn = fld.compiled()[0]
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    pts = rng.uniform(lo, hi, size=(n_samples, tf.dimension))
    return np.array([fn(tuple(p), tuple(params)) for p in pts])


def validate_triangular(tf: TriangularField, box, n_samples=2000, params=None, a=None, b=None):
    """Check that every h_i is bounded away from zero with constant sign on
    the box, that the assembled field is dissipative there, and that every
    f_i is hyperbolic at its zeros."""
    params = tuple(params if params is not None else ())
    signs, min_abs = [], []
    for i in range(tf.dimension):
        vals = _sample_h(tf, i, box, n_samples, params)
        worst = float(np.min(np.abs(vals)))
        if worst <= H_VANISHING_FLOOR or np.min(vals) * np.max(vals) < 0:
            idx = int(np.argmin(np.abs(vals)))
            raise TriangularValidationError(
                f"h_{i + 1} vanishes or changes sign on the box "
                f"(|h| reaches {worst:.3g})",
                witness=idx,
            )
        signs.append(1 if float(vals[0]) > 0 else -1)
        min_abs.append(worst)

    cert = None
    if a is not None and b is not None:
        cert = _check_h1_vector(tf.assembled(), a, b, box, n_samples, params)

    zero_sets = []
    for i in range(tf.dimension):
        fld_i = tf.signed_scalar_factor(i, signs[i])
        zero_sets.append(sa.find_zeros(fld_i, box[i], params=params))
    return TriangularReport(tuple(signs), tuple(min_abs), cert, tuple(zero_sets))


def _check_h1_vector(fld, a, b, box, n_samples, params):
    """Sampled <x, g(x)> <= a - b |x|^2 over the box."""
    rng = np.random.default_rng(977)
    lo = np.array([bb[0] for bb in box])
    hi = np.array([bb[1] for bb in box])
    fns = fld.compiled()
    worst = math.inf
    worst_x = None
    for _ in range(n_samples):
        x = rng.uniform(lo, hi)
        xs = tuple(x)
        gx = sum(fn(xs, params) * xi for fn, xi in zip(fns, x))
        margin = a - b * float(np.dot(x, x)) - gx
        if margin < worst:
            worst, worst_x = margin, x
    if worst < 0.0:
        raise sa.DissipativityError(
            f"dissipativity fails on the box at {worst_x} (margin {worst:.3g})",
            witness=tuple(worst_x),
        )
    return sa.DissipativityCertificate(a, b, tuple(map(tuple, box)), float(worst))


def product_attractor(tf: TriangularField, box=None, params=None) -> ProductAttractor:
    """The product of the per-coordinate attractor intervals of the f_i."""
    params = tuple(params if params is not None else ())
    if box is None:
        box = [(-10.0, 10.0)] * tf.dimension
    report = validate_triangular(tf, box, params=params)
    intervals = tuple(sa.attractor_interval(zs) for zs in report.zero_sets)
    return ProductAttractor(intervals)


def componentwise_limits(tf: TriangularField, x0, box=None, params=None):
    """Predicted limit vector, one scalar classification per coordinate."""
    params = tuple(params if params is not None else ())
    if box is None:
        box = [(-10.0, 10.0)] * tf.dimension
    report = validate_triangular(tf, box, params=params)
    limits = []
    for i in range(tf.dimension):
        fld_i = tf.signed_scalar_factor(i, report.h_signs[i])
        limits.append(sa.classify_limit(fld_i, report.zero_sets[i], x0[i], params))
    return tuple(limits)
