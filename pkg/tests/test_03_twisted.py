"""
TC-003: Twisted Polynomials
Validates the twisted product, the opposite ring, Newton polygons of operators and the
Hensel slope factorization
"""

import pytest
import sys
import os
from fractions import Fraction

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def _t(p, domain):
    from padic_ode.series import TruncatedSeries
    return TruncatedSeries.monomial(p, domain, 1, 1)


class TestDerivationContext:
    """Test the derivations d and d_prime"""

    def test_names_and_negation(self):
        """Test context names"""
        from padic_ode.twisted import DerivationContext

        ctx = DerivationContext()
        assert ctx.name == "d"
        assert ctx.negated().name == "-d"
        assert ctx.negated().negated() == ctx

    def test_unknown_context(self):
        """Test unknown kinds are rejected"""
        from padic_ode.twisted import DerivationContext
        from padic_ode.errors import PreconditionError

        with pytest.raises(PreconditionError):
            DerivationContext("delta")

    def test_spectral_norm(self):
        """Test -log of the spectral norm of d at rho = 1 is 1/(p-1)"""
        from padic_ode.twisted import DerivationContext

        assert DerivationContext().spectral_log_norm(5, 0) == Fraction(1, 4)
        assert DerivationContext().log_norm(5, Fraction(1, 8)) == Fraction(-1, 8)

    def test_d_prime_on_t_to_the_p(self, p, annulus):
        """Test d/d(t^p) maps t^p to 1"""
        from padic_ode.series import TruncatedSeries
        from padic_ode.twisted import DerivationContext

        out = DerivationContext("d_prime").apply(TruncatedSeries.monomial(p, annulus, p, 1))
        assert out.coeffs.keys() == {0}
        assert out.coeff(0) == 1

    def test_d_prime_needs_annulus(self, p, disc):
        """Test d_prime is refused on the disc"""
        from padic_ode.series import TruncatedSeries
        from padic_ode.twisted import DerivationContext
        from padic_ode.errors import PreconditionError

        with pytest.raises(PreconditionError):
            DerivationContext("d_prime").apply(TruncatedSeries.monomial(p, disc, 2, 1))


class TestTwistedProduct:
    """Test multiplication in F{T}"""

    def test_commutation_rule(self, p, annulus):
        """Test T * t = t T + 1"""
        from padic_ode.twisted import TwistedPoly, tmul

        t = _t(p, annulus)
        T = TwistedPoly.T(p, annulus)
        product = tmul(T, TwistedPoly.constant(t))
        assert product.degree == 1
        assert (product.coeff(0) - 1).is_zero()
        assert (product.coeff(1) - t).is_zero()

    def test_square_of_T_times_t(self, p, annulus):
        """Test T^2 * t = t T^2 + 2 T"""
        from padic_ode.twisted import TwistedPoly, tmul

        t = _t(p, annulus)
        T = TwistedPoly.T(p, annulus)
        product = tmul(tmul(T, T), TwistedPoly.constant(t))
        assert product.coeff(0).is_zero()
        assert (product.coeff(1) - 2).is_zero()
        assert (product.coeff(2) - t).is_zero()

    def test_apply_operator(self, p, disc):
        """Test (T^2 + tT + 1) applied to t gives 2t"""
        from padic_ode.example_rank2 import example_operator

        out = example_operator(p, 60, disc).apply(_t(p, disc))
        assert out.coeffs.keys() == {1}
        assert out.coeff(1) == 2

    def test_opposite_is_an_involution(self, p, annulus):
        """Test opposite(opposite(R)) = R for R = t T"""
        from padic_ode.series import TruncatedSeries
        from padic_ode.twisted import TwistedPoly, opposite

        t = _t(p, annulus)
        R = TwistedPoly.from_series([TruncatedSeries.zero(p, annulus), t])
        once = opposite(R)
        assert once.ctx.name == "-d"
        assert (once.coeff(0) + 1).is_zero()
        twice = opposite(once)
        assert twice.ctx == R.ctx
        assert twice.coeff(0).is_zero()
        assert (twice.coeff(1) - t).is_zero()

    def test_context_mismatch(self, p, annulus):
        """Test products across different derivations are refused"""
        from padic_ode.twisted import DerivationContext, TwistedPoly
        from padic_ode.errors import PreconditionError

        T = TwistedPoly.T(p, annulus)
        S = TwistedPoly.T(p, annulus, ctx=DerivationContext("d_prime"))
        with pytest.raises(PreconditionError):
            T + S


class TestNewtonPolygon:
    """Test operator Newton polygons"""

    def test_synthetic_polygon(self, synthetic_operator):
        """Test slopes -2 and 0 at r = 0"""
        from padic_ode.twisted import newton_polygon_twisted

        polygon = newton_polygon_twisted(synthetic_operator, 0)
        assert polygon.slope_multiset() == {Fraction(-2): 1, Fraction(0): 1}

    def test_example_polygon_is_flat(self, p, annulus):
        """Test T^2 + tT + 1 has one slope 0 of width 2"""
        from padic_ode.example_rank2 import example_operator
        from padic_ode.twisted import newton_polygon_twisted

        polygon = newton_polygon_twisted(example_operator(p, 60, annulus), 0)
        assert polygon.slopes == [(Fraction(0), 2)]

    def test_admissible_interval(self, synthetic_operator):
        """Test the open interval of split radii for i = 1"""
        from padic_ode.twisted import admissible_interval, choose_r

        lower, upper = admissible_interval(synthetic_operator, 1, [Fraction(0)])
        assert (lower, upper) == (Fraction(-2), Fraction(0))
        assert lower < choose_r(lower, upper) < upper

    def test_choose_r_empty_interval(self):
        """Test an empty interval means the slopes are not separated"""
        from padic_ode.twisted import choose_r
        from padic_ode.errors import RadiiNotSeparatedError

        with pytest.raises(RadiiNotSeparatedError):
            choose_r(Fraction(0), Fraction(0))


class TestHensel:
    """Test the slope factorization"""

    def test_qp_factorization_of_synthetic_operator(self, synthetic_operator):
        """Test R = Q' P' with both factors of degree one"""
        from padic_ode.twisted import hensel_factor

        report = hensel_factor(synthetic_operator, 1, variant="QP", target=30)
        assert report.variant == "QP"
        assert report.r_used == -1
        assert report.iterations == 1
        assert report.P.degree == 1
        assert report.Q.degree == 1
        assert (synthetic_operator - report.product()).is_zero_on_window()

    def test_right_factor_is_one_minus_25tT(self, p, synthetic_operator):
        """Test P' = 1 - p^2 t T"""
        from padic_ode.twisted import hensel_factor

        P = hensel_factor(synthetic_operator, 1, variant="QP", target=30).P
        assert (P.coeff(0) - 1).is_zero()
        assert P.coeff(1).coeffs.keys() == {1}
        assert P.coeff(1).coeff(1) == -p ** 2

    def test_not_separated(self, p, annulus):
        """Test T^2 + tT + 1 cannot be split at i = 1"""
        from padic_ode.example_rank2 import example_operator
        from padic_ode.twisted import hensel_factor
        from padic_ode.errors import RadiiNotSeparatedError

        with pytest.raises(RadiiNotSeparatedError):
            hensel_factor(example_operator(p, 60, annulus), 1)

    def test_bad_index_and_variant(self, synthetic_operator):
        """Test invalid arguments"""
        from padic_ode.twisted import hensel_factor
        from padic_ode.errors import PreconditionError

        with pytest.raises(PreconditionError):
            hensel_factor(synthetic_operator, 3)
        with pytest.raises(PreconditionError):
            hensel_factor(synthetic_operator, 1, variant="XY")

    def test_report_as_dict(self, synthetic_operator):
        """Test the report form"""
        from padic_ode.twisted import hensel_factor

        data = hensel_factor(synthetic_operator, 1, variant="QP", target=30).as_dict()
        assert data["variant"] == "QP"
        assert data["r_used"] == "-1"
        assert data["degrees"] == [1, 1]

    def test_residual_vanishing_on_its_window(self, p, annulus):
        """Test a residual with no represented coefficients counts as fully converged"""
        from padic_ode.padic_core import INF
        from padic_ode.series import TruncatedSeries
        from padic_ode.twisted import DerivationContext, TwistedPoly, _relative_residual
        from padic_ode.example_rank2 import example_operator

        R = example_operator(p, 60, annulus)
        empty = TruncatedSeries(p, annulus, {}, -40, 40, 60)
        E = TwistedPoly(DerivationContext(), (empty, empty))
        residual = _relative_residual(R, E, 1, Fraction(-1, 2), [Fraction(0)])
        assert residual[Fraction(0)] == INF
