"""Named example fields used throughout the test and verification suites."""

from __future__ import annotations

from dataclasses import dataclass

from .field_expr import FieldDef, parse_expr
from .triangular_systems import TriangularField

__all__ = ["CatalogEntry", "CATALOG", "get", "names"]


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    fld: object  # FieldDef or TriangularField
    default_params: tuple
    dissipativity: tuple | None  # (a, b) certificate suggestion, if one exists
    scan_interval: tuple

    @property
    def triangular(self):
        return isinstance(self.fld, TriangularField)


def _scalar(expr, params=(), defaults=(), ab=None, scan=(-5.0, 5.0)):
    return lambda name: CatalogEntry(
        name, FieldDef.parse([expr], params), tuple(defaults), ab, scan
    )


def _triangular(h_exprs, f_exprs, d, ab=None):
    def make(name):
        hs = tuple(parse_expr(h, d) for h in h_exprs)
        fs = tuple(parse_expr(f, d) for f in f_exprs)
        return CatalogEntry(name, TriangularField(d, hs, fs), (), ab, (-5.0, 5.0))

    return make


_BUILDERS = {
    "linear": _scalar("-x", ab=(1.0, 1.0)),
    "cubic": _scalar("x - x^3", ab=(1.0, 1.0)),
    "saddle": _scalar("gamma - x^2", params=("gamma",), defaults=(1.0,), ab=None),
    "pitchfork": _scalar(
        "gamma*x - x^3", params=("gamma",), defaults=(1.0,), ab=(1.0, 1.0)
    ),
    # Figure-2 variant: both coordinates carry the full cubic factor.
    "fig2": _triangular(["1", "1 + x^2"], ["x*(1 - x^2)", "y*(1 - y^2)"], 2, ab=(2.5, 1.0)),
    # The in-text variant differs in the first factor: logistic, not cubic
    # (so it is only dissipative on x >= 0 and ships without a certificate).
    "sec3text": _triangular(["1", "1 + x^2"], ["x*(1 - x)", "y*(1 - y^2)"], 2),
}

CATALOG = {name: build(name) for name, build in _BUILDERS.items()}


def names():
    return sorted(CATALOG)


def get(name: str) -> CatalogEntry:
    try:
        return CATALOG[name]
    except KeyError:
        raise KeyError(
            f"unknown catalog field '{name}'; available: {', '.join(names())}"
        ) from None
