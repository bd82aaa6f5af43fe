"""Mittag-Leffler evaluation against closed identities and frozen oracles."""

import math

import numpy as np
import pytest

from fracdyn.mittag_leffler import (
    MLConvergenceError,
    MLDomainError,
    MLOverflowError,
    MLQuery,
    gamma,
    ml,
    ml_decay,
    ml_eval,
)


def erfc_cf(x, n_terms=50):
    """erfc via the Laplace continued fraction, valid for x > 0:

    erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + 1/2/(x + 2/2/(x + 3/2/(x + ...))))
    """
    tail = 0.0
    for k in range(n_terms, 0, -1):
        tail = (k / 2.0) / (x + tail)
    return math.exp(-x * x) / math.sqrt(math.pi) / (x + tail)


def ml_series_200(alpha, beta, z):
    """Direct 200-term reference sum of the definition (small arguments)."""
    total = 0.0
    zk = 1.0
    for k in range(200):
        if alpha * k + beta > 170.0:
            break  # remaining terms are below double-precision resolution
        total += zk / math.gamma(alpha * k + beta)
        zk *= z
    return total


# Frozen high-precision sums of the defining series (adaptive-precision
# arithmetic, 40 significant digits, rounded to double).
ORACLE = [
    (0.5, 1.0, -1.0, 0.427583576155807),
    (0.5, 1.0, -4.0, 0.13699945762506138),
    (0.3, 1.0, -2.0, 0.29023222616787536),
    (0.3, 1.0, -8.0, 0.089493095818620721),
    (0.7, 1.5, -3.0, 0.26285663395082209),
    (0.6, 1.0, -12.0, 0.038643078839373575),
    (0.9, 1.0, -7.0, 0.020553253921495637),
    (0.4, 2.0, -6.0, 0.15990945773175255),
    (0.5, 0.5, -2.0, 0.053398230926744797),
    (1.5, 1.0, -2.0, 0.029430685602826471),
    (0.8, 1.0, -30.0, 0.0075758607992192084),
]


class TestClosedForms:
    def test_exp_identity(self):
        for z in np.linspace(-10.0, 10.0, 41):
            assert ml(1.0, 1.0, float(z)) == pytest.approx(math.exp(z), rel=1e-10)

    def test_cosh_identity(self):
        for z in np.linspace(0.0, 10.0, 21):
            expect = math.cosh(math.sqrt(z))
            assert ml(2.0, 1.0, float(z)) == pytest.approx(expect, rel=1e-10)

    def test_beta_two_identity(self):
        # E_{1,2}(z) = (e^z - 1)/z
        for z in (-6.0, -2.0, -0.5, 0.5, 3.0, 8.0):
            assert ml(1.0, 2.0, z) == pytest.approx(math.expm1(z) / z, rel=1e-10)

    def test_erfc_identity(self):
        # E_{1/2}(-x) = exp(x^2) erfc(x); continued-fraction oracle is itself
        # cross-checked against a direct series sum and the stdlib.
        cf = erfc_cf(1.0)
        # the 50-term fraction carries ~8 correct digits at x=1
        assert cf == pytest.approx(math.erfc(1.0), rel=1e-7)
        assert ml(0.5, 1.0, -1.0) == pytest.approx(math.e * cf, rel=1e-7)
        assert ml(0.5, 1.0, -1.0) == pytest.approx(math.e * math.erfc(1.0), rel=1e-8)

    def test_erfc_cf_vs_series(self):
        # the two independent oracles agree where the plain series is stable
        assert ml_series_200(0.5, 1.0, -1.0) == pytest.approx(
            math.e * erfc_cf(1.0), rel=1e-7
        )

    def test_zero_argument(self):
        assert ml(0.5, 1.0, 0.0) == 1.0
        assert ml(0.3, 2.0, 0.0) == pytest.approx(1.0 / math.gamma(2.0), rel=1e-14)

    def test_small_argument_series_reference(self):
        for alpha in (0.3, 0.6, 0.9):
            for z in (-0.8, -0.2, 0.4, 1.7):
                assert ml(alpha, 1.0, z) == pytest.approx(
                    ml_series_200(alpha, 1.0, z), rel=1e-12
                )


class TestFrozenOracles:
    @pytest.mark.parametrize("alpha,beta,z,expect", ORACLE)
    def test_oracle_values(self, alpha, beta, z, expect):
        assert ml(alpha, beta, z) == pytest.approx(expect, rel=1e-8)


class TestAsymptotics:
    def test_algebraic_plateau(self):
        # t^alpha E_alpha(-gamma t^alpha) -> 1/(gamma Gamma(1-alpha))
        alpha, rate = 0.4, 2.0
        limit = 0.3357524862210367  # 1/(2 Gamma(0.6))
        t = 1.0e8
        val = t**alpha * ml_decay(alpha, rate, t)
        assert val == pytest.approx(limit, rel=1e-3)

    def test_monotone_decay_profile(self):
        for alpha in (0.3, 0.5, 0.8):
            vals = [ml_decay(alpha, 1.0, t) for t in np.linspace(0.0, 80.0, 400)]
            assert vals[0] == 1.0
            assert all(v > 0.0 for v in vals)
            diffs = np.diff(vals)
            assert np.all(diffs <= 1e-14)

    def test_monotone_in_argument(self):
        for alpha in (0.25, 0.5, 0.75):
            zs = np.linspace(-60.0, 0.0, 240)
            vals = [ml(alpha, 1.0, float(z)) for z in zs]
            assert np.all(np.diff(vals) > 0.0)

    def test_regime_boundaries_are_continuous(self):
        # values on both sides of each internal dispatch switch must agree
        for alpha in (0.3, 0.5, 0.9):
            z_big = max(10.0, 10.0 * 5.0**alpha)
            for edge in (5.0, z_big):
                lo = ml(alpha, 1.0, -(edge * (1.0 + 1e-9)))
                hi = ml(alpha, 1.0, -(edge * (1.0 - 1e-9)))
                assert lo == pytest.approx(hi, rel=1e-7)


class TestValidation:
    def test_alpha_domain(self):
        with pytest.raises(MLDomainError):
            MLQuery(0.0, 1.0, 1.0)
        with pytest.raises(MLDomainError):
            MLQuery(2.5, 1.0, 1.0)
        with pytest.raises(MLDomainError):
            MLQuery(-0.5, 1.0, 1.0)

    def test_beta_domain(self):
        with pytest.raises(MLDomainError):
            MLQuery(0.5, 0.0, 1.0)
        with pytest.raises(MLDomainError):
            MLQuery(0.5, -1.0, 1.0)

    def test_nonfinite_argument(self):
        with pytest.raises(MLDomainError):
            MLQuery(0.5, 1.0, math.nan)
        with pytest.raises(MLDomainError):
            MLQuery(0.5, 1.0, math.inf)

    def test_gamma_domain_and_overflow(self):
        assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
        assert gamma(170.0) > 0.0
        with pytest.raises(MLDomainError):
            gamma(-1.0)
        with pytest.raises(MLOverflowError):
            gamma(171.0)

    def test_overflow_reported_for_huge_results(self):
        # E_0.1(5) ~ exp(5^10) does not fit in a double
        with pytest.raises(MLOverflowError):
            ml(0.1, 1.0, 5.0)

    def test_ml_decay_domains(self):
        with pytest.raises(MLDomainError):
            ml_decay(1.0, 1.0, 1.0)
        with pytest.raises(MLDomainError):
            ml_decay(0.5, 0.0, 1.0)
        with pytest.raises(MLDomainError):
            ml_decay(0.5, 1.0, -1.0)

    def test_query_object_evaluates(self):
        q = MLQuery(0.5, 1.0, -1.0)
        assert ml_eval(q) == ml(0.5, 1.0, -1.0)

    def test_convergence_error_is_exported(self):
        assert issubclass(MLConvergenceError, RuntimeError)
