"""
TC-004: Differential Modules
Validates module construction, cyclic vectors, subsidiary radii, radius profiles and
formal horizontal solutions
"""

import pytest
import sys
import os
from fractions import Fraction

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


class TestModuleConstruction:
    """Test DiffModule builders"""

    def test_from_operator_companion(self, p, disc):
        """Test K{T}/K{T}(T^2 + tT + 1) has D(e1) = e2, D(e2) = -e1 - t e2"""
        from padic_ode.example_rank2 import example_module

        M = example_module(p, 60, disc)
        A = M.action
        assert M.rank == 2
        assert A[0][0].is_zero()
        assert (A[1][0] - 1).is_zero()
        assert (A[0][1] + 1).is_zero()
        assert A[1][1].coeffs.keys() == {1}
        assert A[1][1].coeff(1) == -1

    def test_from_operator_needs_unit_leading_coefficient(self, p, disc):
        """Test a leading coefficient with zeroes is refused"""
        from padic_ode.series import TruncatedSeries
        from padic_ode.twisted import TwistedPoly
        from padic_ode.diffmod import from_operator
        from padic_ode.errors import PreconditionError

        one = TruncatedSeries.one(p, disc)
        t = TruncatedSeries.monomial(p, disc, 1, 1)
        with pytest.raises(PreconditionError):
            from_operator(TwistedPoly.from_series([one, t]))

    def test_non_square_action(self, p, disc):
        """Test the action matrix must be square"""
        from padic_ode.series import TruncatedSeries
        from padic_ode.diffmod import DiffModule
        from padic_ode.errors import PreconditionError

        zero = TruncatedSeries.zero(p, disc)
        with pytest.raises(PreconditionError):
            DiffModule.from_matrix([[zero, zero]])

    def test_dual_and_direct_sum(self, p, disc):
        """Test the dual action is -A^T and direct sums are block diagonal"""
        from padic_ode.example_rank2 import example_module
        from padic_ode.diffmod import DiffModule
        from padic_ode.series import TruncatedSeries

        M = example_module(p, 60, disc)
        D = M.dual()
        assert (D.action[0][1] + 1).is_zero()
        assert (D.action[1][0] - 1).is_zero()
        assert D.action[1][1].coeff(1) == 1

        zero = DiffModule.rank_one(TruncatedSeries.zero(p, disc))
        S = M.direct_sum(zero)
        assert S.rank == 3
        assert S.action[2][0].is_zero()
        assert not S.is_diagonal()
        assert zero.direct_sum(zero).is_diagonal()

    def test_change_basis(self, p, annulus):
        """Test conjugating by t I on the annulus adds 1/t on the diagonal"""
        from padic_ode.series import TruncatedSeries
        from padic_ode.diffmod import DiffModule
        from padic_ode.utils import linalg

        M = DiffModule.rank_one(TruncatedSeries.zero(p, annulus))
        B = [[TruncatedSeries.monomial(p, annulus, 1, 1)]]
        N = M.change_basis(B)
        assert N.action[0][0].coeffs.keys() == {-1}
        assert N.action[0][0].coeff(-1) == 1
        assert linalg.det(B).is_unit()

    def test_with_derivation(self, p, annulus):
        """Test switching to d_prime divides the action by p t^(p-1)"""
        from padic_ode.series import TruncatedSeries
        from padic_ode.diffmod import DiffModule

        M = DiffModule.rank_one(TruncatedSeries.monomial(p, annulus, 4, p))
        N = M.with_derivation("d_prime")
        assert N.ctx.kind == "d_prime"
        assert N.action[0][0].coeffs.keys() == {0}
        assert N.action[0][0].coeff(0) == 1
        assert N.with_derivation("d").action[0][0].coeff(4) == p


class TestCyclicVector:
    """Test the cyclic vector search"""

    def test_first_basis_vector_is_cyclic(self, example_module_annulus):
        """Test e1 is cyclic and recovers T^2 + tT + 1"""
        from padic_ode.diffmod import cyclic_vector

        result = cyclic_vector(example_module_annulus)
        assert result.attempts == 1
        R = result.operator
        assert R.degree == 2
        assert (R.coeff(0) - 1).is_zero()
        assert R.coeff(1).coeffs.keys() == {1}
        assert (R.coeff(2) - 1).is_zero()

    def test_operator_is_monic(self, p, annulus):
        """Test det(e1, D e1) = 2 is divided out: D e1 = 2 e2, D e2 = -e1/2 gives T^2 + 1"""
        from padic_ode.series import TruncatedSeries
        from padic_ode.diffmod import DiffModule, cyclic_vector

        zero = TruncatedSeries.zero(p, annulus)
        M = DiffModule.from_matrix([[zero, TruncatedSeries.constant(p, annulus, Fraction(-1, 2))],
                                    [TruncatedSeries.constant(p, annulus, 2), zero]])
        result = cyclic_vector(M)
        assert result.attempts == 1
        R = result.operator
        assert (R.coeff(2) - 1).is_zero()
        assert (R.coeff(0) - 1).is_zero()
        assert R.coeff(1).is_zero()

    def test_search_exhausted(self, p, disc):
        """Test the basis vectors of the zero module are not cyclic"""
        from padic_ode.series import TruncatedSeries
        from padic_ode.diffmod import DiffModule, cyclic_vector
        from padic_ode.errors import CyclicVectorError

        zero = TruncatedSeries.zero(p, disc)
        M = DiffModule.from_matrix([[zero, zero], [zero, zero]])
        with pytest.raises(CyclicVectorError):
            cyclic_vector(M, attempts=2)


class TestRadii:
    """Test subsidiary radii at a point"""

    def test_rank_one_closed_form(self, p, annulus):
        """Test D(e) = (j/p) t^(-1) e has -log IR = 1/(p-1) + 1"""
        from padic_ode.series import TruncatedSeries
        from padic_ode.diffmod import DiffModule, subsidiary_radii_at

        g = TruncatedSeries.monomial(p, annulus, -1, Fraction(2, p))
        radii = subsidiary_radii_at(DiffModule.rank_one(g), 0)
        assert radii.values() == [Fraction(5, 4)]

    def test_rank_one_exp(self, p, annulus):
        """Test D(e) = -t e (solution exp(t^2/2)) has -log IR = 1/(p-1) at r = 0"""
        from padic_ode.series import TruncatedSeries
        from padic_ode.diffmod import DiffModule, subsidiary_radii_at

        g = TruncatedSeries.monomial(p, annulus, 1, -1)
        assert subsidiary_radii_at(DiffModule.rank_one(g), 0).values() == [Fraction(1, 4)]

    def test_trivial_module(self, p, annulus):
        """Test the trivial module has radius 1"""
        from padic_ode.series import TruncatedSeries
        from padic_ode.diffmod import DiffModule, subsidiary_radii_at

        M = DiffModule.rank_one(TruncatedSeries.zero(p, annulus))
        assert subsidiary_radii_at(M, 0).values() == [Fraction(0)]

    def test_example_radii(self, example_module_annulus):
        """Test the radii of T^2 + tT + 1 at the generic point are {1/(p-1), 0}"""
        from padic_ode.diffmod import subsidiary_radii_at

        radii = subsidiary_radii_at(example_module_annulus, 0)
        assert radii.is_exact
        assert radii.values() == [Fraction(1, 4), Fraction(0)]
        assert radii.multiset() == {Fraction(1, 4): 1, Fraction(0): 1}

    def test_dual_radii_match(self, example_module_annulus):
        """Test M and its dual have the same radii"""
        from padic_ode.diffmod import subsidiary_radii_at

        radii = subsidiary_radii_at(example_module_annulus.dual(), 0)
        assert radii.values() == [Fraction(1, 4), Fraction(0)]

    def test_synthetic_radii(self, synthetic_module):
        """Test a visible slope gives 1/(p-1) + 2"""
        from padic_ode.diffmod import subsidiary_radii_at

        assert subsidiary_radii_at(synthetic_module, 0).values() == [Fraction(9, 4), Fraction(0)]

    def test_diagonal_module(self, p, annulus):
        """Test diagonal modules are read entry by entry"""
        from padic_ode.series import TruncatedSeries
        from padic_ode.diffmod import DiffModule, subsidiary_radii_at

        g = TruncatedSeries.monomial(p, annulus, -1, Fraction(1, p))
        M = DiffModule.rank_one(g).direct_sum(DiffModule.rank_one(TruncatedSeries.zero(p, annulus)))
        assert subsidiary_radii_at(M, 0).values() == [Fraction(5, 4), Fraction(0)]

    def test_point_outside_annulus(self, example_module_annulus):
        """Test radii are only defined on [0, alpha]"""
        from padic_ode.diffmod import subsidiary_radii_at
        from padic_ode.errors import PreconditionError

        with pytest.raises(PreconditionError):
            subsidiary_radii_at(example_module_annulus, Fraction(1, 2))

    def test_radii_values_need_exact_entries(self):
        """Test interval entries cannot be read as values"""
        from padic_ode.diffmod import RadiiMultiset
        from padic_ode.errors import PreconditionError

        radii = RadiiMultiset(((Fraction(0), Fraction(1, 8)), (Fraction(1, 4), Fraction(1, 4))))
        assert not radii.is_exact
        assert radii.entries[0] == (Fraction(1, 4), Fraction(1, 4))
        with pytest.raises(PreconditionError):
            radii.values()


class TestProfile:
    """Test radii along [0, alpha]"""

    def test_example_profile_is_affine(self, example_module_annulus):
        """Test f_1 = 1/(p-1) - r and f_2 = r with no breakpoints"""
        from padic_ode.diffmod import radii_profile

        grid = [Fraction(0), Fraction(1, 32), Fraction(1, 16)]
        profile = radii_profile(example_module_annulus, grid)
        for r, row in zip(grid, profile.f_values()):
            assert row[0] == (Fraction(1, 4) - r, Fraction(1, 4) - r)
            assert row[1] == (r, r)
        assert profile.breakpoints(0) == []
        assert profile.breakpoints(1) == []
        assert profile.partial_heights()[0] == [Fraction(1, 4), Fraction(1, 4)]

    def test_profile_as_dict(self, example_module_annulus):
        """Test the report form"""
        from padic_ode.diffmod import radii_profile

        data = radii_profile(example_module_annulus, [Fraction(0)]).as_dict()
        assert data["grid"] == ["0"]
        assert data["f"] == [[["1/4", "1/4"], ["0", "0"]]]


class TestHorizontalSolutions:
    """Test formal solutions over the disc"""

    def test_example_solution(self, p, disc):
        """Test (t, 1) is a solution of M and the only convergent one"""
        from padic_ode.example_rank2 import example_module
        from padic_ode.diffmod import classify_solution_space, solve_horizontal

        M = example_module(p, 60, disc)
        solutions = solve_horizontal(M, 200)
        assert len(solutions) == 2
        v1, v2 = solutions[1]
        assert v1.coeffs.keys() == {1}
        assert v2.coeffs.keys() == {0}
        report = classify_solution_space(M, solutions)
        assert report.formal_dimension == 2
        assert report.convergent_dimension == 1
        assert report.solutions[1].convergent
        assert report.solutions[1].log_growth.delta_estimate == "bounded"

    @pytest.mark.slow
    def test_dual_has_no_convergent_solution(self, p, disc):
        """Test the dual solutions have radius p^(-1/(2(p-1)))"""
        from padic_ode.example_rank2 import dual_module
        from padic_ode.diffmod import classify_solution_space, solve_horizontal

        M = dual_module(p, 60, disc)
        report = classify_solution_space(M, solve_horizontal(M, 400))
        assert report.convergent_dimension == 0
        for solution in report.solutions:
            for lo, hi in solution.radius_brackets:
                assert lo <= Fraction(1, 8) <= hi

    def test_log_module(self, p):
        """Test both solutions converge, one of them with log-growth 1"""
        from padic_ode.example_rank2 import log_module
        from padic_ode.diffmod import classify_solution_space, solve_horizontal

        M = log_module(p, 200)
        report = classify_solution_space(M, solve_horizontal(M, 200))
        assert report.convergent_dimension == 2
        assert report.solutions[0].log_growth.order == 1
        assert report.solutions[0].log_growth.tested["0"] is False
        assert report.solutions[1].log_growth.order == 0

    def test_needs_disc(self, example_module_annulus):
        """Test solutions are only computed over the disc"""
        from padic_ode.diffmod import solve_horizontal
        from padic_ode.errors import PreconditionError

        with pytest.raises(PreconditionError):
            solve_horizontal(example_module_annulus, 50)

    def test_window_too_short(self, p):
        """Test an action known on a short window is refused"""
        from padic_ode.example_rank2 import log_module
        from padic_ode.diffmod import solve_horizontal
        from padic_ode.errors import WindowInsufficientError

        with pytest.raises(WindowInsufficientError):
            solve_horizontal(log_module(p, 20), 200)

    def test_polynomial_solutions(self, p, disc):
        """Test polynomial solutions (1, t), (0, 1) converge and report an infinite radius"""
        from padic_ode.series import TruncatedSeries
        from padic_ode.diffmod import DiffModule, classify_solution_space, solve_horizontal

        zero = TruncatedSeries.zero(p, disc)
        minus_one = TruncatedSeries.constant(p, disc, -1)
        M = DiffModule.from_matrix([[zero, zero], [minus_one, zero]])
        report = classify_solution_space(M, solve_horizontal(M, 200))
        assert report.convergent_dimension == 2
        assert all(s.log_growth.order == 0 for s in report.solutions)
        data = report.as_dict()
        assert data["solutions"][0]["radius_brackets"][0] == ["-inf", "-inf"]

    def test_convergent_combination_of_divergent_solutions(self, p, disc):
        """Test y1' = 0, y2' = y1 + y2: (1, e^t - 1) and (0, e^t) diverge, their difference does not"""
        from padic_ode.series import TruncatedSeries
        from padic_ode.diffmod import DiffModule, classify_solution_space, solve_horizontal

        zero = TruncatedSeries.zero(p, disc)
        minus_one = TruncatedSeries.constant(p, disc, -1)
        M = DiffModule.from_matrix([[zero, zero], [minus_one, minus_one]])
        report = classify_solution_space(M, solve_horizontal(M, 200))
        assert report.formal_dimension == 2
        assert report.basis_convergent == 0
        assert report.convergent_dimension == 1
        assert len(report.convergent_vectors) == 1
        y1, y2 = report.convergent_vectors[0]
        assert y1.coeffs.keys() == {0}
        assert y2.coeffs.keys() == {0}
        assert (y1 + y2).is_zero_on_window()
        assert report.combinations[0].log_growth.order == 0
        assert report.as_dict()["basis_convergent"] == 0
