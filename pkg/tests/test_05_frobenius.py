"""
TC-005: Frobenius Pushforward
Validates residue splitting, the pushed module, the psi maps and the radius transfer rule
"""

import pytest
import sys
import os
from fractions import Fraction

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


class TestPhiMultiset:
    """Test the radius transfer under pushforward"""

    def test_small_radius(self):
        """Test v < 1/(p-1) gives p*v and p-1 copies of p/(p-1)"""
        from padic_ode.frobenius import phi_multiset

        assert phi_multiset([0], 5) == [Fraction(5, 4)] * 4 + [Fraction(0)]
        assert phi_multiset([Fraction(1, 8)], 5) == [Fraction(5, 4)] * 4 + [Fraction(5, 8)]

    def test_large_radius(self):
        """Test v >= 1/(p-1) gives p copies of v + 1"""
        from padic_ode.frobenius import phi_multiset

        assert phi_multiset([Fraction(1, 2)], 5) == [Fraction(3, 2)] * 5
        assert phi_multiset([Fraction(1, 4)], 5) == [Fraction(5, 4)] * 5

    def test_sorted_decreasing(self):
        """Test the pushed multiset is sorted decreasing"""
        from padic_ode.frobenius import phi_multiset

        out = phi_multiset([Fraction(1, 2), 0], 3)
        assert out == sorted(out, reverse=True)
        assert len(out) == 6


class TestResidueSplitting:
    """Test f(t) = sum_j t^j f_j(t^p)"""

    def test_u_domain(self, p, annulus):
        """Test the u-annulus has log-radius p*alpha"""
        from padic_ode.frobenius import u_domain
        from padic_ode.series import RingDomain

        assert u_domain(annulus, p) == RingDomain.annulus(Fraction(5, 16))
        assert u_domain(RingDomain.disc(), p) == RingDomain.disc()

    def test_decompose_by_residue(self, series_factory, annulus):
        """Test exponents are sorted by residue mod p"""
        from padic_ode.frobenius import decompose_by_residue

        f = series_factory({-3: 1, 0: 2, 5: 3, 7: 4}, domain=annulus)
        parts = decompose_by_residue(f)
        assert len(parts) == 5
        assert parts[0].coeffs.keys() == {0, 1}
        assert parts[0].coeff(1) == 3
        assert parts[2].coeffs.keys() == {-1, 1}
        assert parts[1].is_zero()

    def test_recombine_inverts(self, series_factory, annulus):
        """Test recombine(decompose_by_residue(f)) = f"""
        from padic_ode.frobenius import decompose_by_residue, recombine

        f = series_factory({e: e + 1 for e in range(-3, 8)}, domain=annulus)
        assert (recombine(decompose_by_residue(f), annulus) - f).is_zero()


class TestPushforward:
    """Test the pushed module"""

    @pytest.fixture
    def pushed_trivial(self, p, annulus):
        from padic_ode.series import TruncatedSeries
        from padic_ode.diffmod import DiffModule
        from padic_ode.frobenius import pushforward

        return pushforward(DiffModule.rank_one(TruncatedSeries.zero(p, annulus)))

    def test_rank_and_diagonal(self, pushed_trivial):
        """Test the pushed trivial module is diag(j/p u^(-1))"""
        M = pushed_trivial.module
        assert M.rank == 5
        assert M.is_diagonal()
        assert M.action[0][0].is_zero()
        assert M.action[3][3].coeffs.keys() == {-1}
        assert M.action[3][3].coeff(-1).to_fraction() == Fraction(3, 5)

    def test_psi(self, pushed_trivial):
        """Test multiplication by t moves t^4 to u"""
        psi = pushed_trivial.psi(1)
        assert psi[0][4].coeffs.keys() == {1}
        assert (psi[1][0] - 1).is_zero()
        identity = pushed_trivial.psi(0)
        assert all((identity[k][k] - 1).is_zero() for k in range(5))

    def test_base_round_trip(self, pushed_trivial, series_factory, annulus):
        """Test to_base(from_base(v)) = v"""
        v = [series_factory({0: 1, 2: 3, 6: -1}, domain=annulus)]
        back = pushed_trivial.to_base(pushed_trivial.from_base(v))
        assert (back[0] - v[0]).is_zero()

    def test_pushed_radii(self, pushed_trivial):
        """Test the pushed trivial module has radii phi_multiset({0})"""
        from padic_ode.diffmod import subsidiary_radii_at
        from padic_ode.frobenius import phi_multiset

        radii = subsidiary_radii_at(pushed_trivial.module, 0)
        assert radii.values() == phi_multiset([0], 5)

    def test_needs_annulus(self, p, disc):
        """Test the pushforward is refused on the disc"""
        from padic_ode.series import TruncatedSeries
        from padic_ode.diffmod import DiffModule
        from padic_ode.frobenius import pushforward
        from padic_ode.errors import PreconditionError

        with pytest.raises(PreconditionError):
            pushforward(DiffModule.rank_one(TruncatedSeries.zero(p, disc)))


class TestClosureAndDescent:
    """Test psi-closure and descent of pushed vectors"""

    def test_closure_of_first_basis_vector(self, p, annulus):
        """Test the closure of E_(0,0) is a single line up to proportionality"""
        from padic_ode.series import TruncatedSeries
        from padic_ode.diffmod import DiffModule
        from padic_ode.frobenius import descend, gphi_closure, is_psi_stable, pushforward

        pushed = pushforward(DiffModule.rank_one(TruncatedSeries.zero(p, annulus)))
        e0 = pushed.module.basis_vector(0)
        closure = gphi_closure(pushed, [e0])
        assert len(closure) == 5
        base = descend(pushed, closure)
        assert len(base) == 1
        assert (base[0][0] - 1).is_zero()
        assert not is_psi_stable(pushed, [e0])

    def test_closure_is_idempotent(self, p, annulus):
        """Test closing a psi-stable family adds nothing"""
        from padic_ode.series import TruncatedSeries
        from padic_ode.diffmod import DiffModule
        from padic_ode.frobenius import gphi_closure, is_psi_stable, pushforward

        pushed = pushforward(DiffModule.rank_one(TruncatedSeries.zero(p, annulus)))
        closure = gphi_closure(pushed, [pushed.module.basis_vector(0)])
        assert is_psi_stable(pushed, closure)
        assert len(gphi_closure(pushed, closure)) == len(closure)

    def test_descent_of_rank_two_module(self, p, annulus):
        """Test the whole pushed V_0 (+) V_0 descends to a rank-two base submodule"""
        from padic_ode.series import TruncatedSeries
        from padic_ode.diffmod import DiffModule
        from padic_ode.frobenius import descend, pushforward

        V = DiffModule.rank_one(TruncatedSeries.zero(p, annulus))
        pushed = pushforward(V.direct_sum(V))
        vectors = [pushed.module.basis_vector(k) for k in range(2 * p)]
        base = descend(pushed, vectors)
        assert len(base) == 2
        assert (base[0][0] - 1).is_zero()
        assert base[0][1].is_zero_on_window()
        assert (base[1][1] - 1).is_zero()

    def test_descent_needs_psi_stable_family(self, p, annulus):
        """Test a single pushed basis vector cannot be descended"""
        from padic_ode.series import TruncatedSeries
        from padic_ode.diffmod import DiffModule
        from padic_ode.frobenius import descend, pushforward
        from padic_ode.errors import PreconditionError

        pushed = pushforward(DiffModule.rank_one(TruncatedSeries.zero(p, annulus)))
        with pytest.raises(PreconditionError):
            descend(pushed, [pushed.module.basis_vector(0)])


class TestSeriesEchelon:
    """Test the echelon bases behind closure and descent"""

    def test_span_membership(self, series_factory, annulus):
        """Test (1, t) spans t^2 (1, t) and (1 + t, t + t^2) but not (0, 1)"""
        from padic_ode.utils.linalg import SeriesEchelon

        one = series_factory({0: 1}, domain=annulus)
        t = series_factory({1: 1}, domain=annulus)
        echelon = SeriesEchelon(tol=30)
        assert echelon.add([one, t])
        assert echelon.contains([t * t, t * t * t])
        assert echelon.contains([one + t, t + t * t])
        assert not echelon.contains([series_factory({}, domain=annulus), one])
        assert echelon.rank == 1

    def test_rows_are_normalized(self, series_factory, annulus):
        """Test the dominant monomial 3 t^-1 of the pivot is divided out"""
        from padic_ode.utils.linalg import SeriesEchelon

        echelon = SeriesEchelon()
        echelon.add([series_factory({-1: 3}, domain=annulus), series_factory({0: 6}, domain=annulus)])
        row = echelon.rows[0]
        assert (row[0] - 1).is_zero()
        assert (row[1] - series_factory({1: 2}, domain=annulus)).is_zero()

    def test_monomial_multiples(self, series_factory):
        """Test c t^k v is recognized in both directions on the disc"""
        from padic_ode.utils.linalg import monomial_multiple

        v = [series_factory({1: 1}), series_factory({2: 3})]
        w = [series_factory({3: 5}), series_factory({4: 15})]
        assert monomial_multiple(w, v)
        assert monomial_multiple(v, w)
        assert not monomial_multiple([series_factory({3: 5}), series_factory({4: 1})], v)
