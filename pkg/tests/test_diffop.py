from fractions import Fraction
from math import factorial

import pytest
from conftest import small_rationals, theta_ops
from hypothesis import given
from hypothesis import strategies as st

from resurgence.borelnum import borel_series
from resurgence.diffop import (
    ThetaOperator,
    apply_op,
    borel_transform_op,
    conjugate_power,
    derivative_form,
    format_operator,
    identity,
    inverse_variable,
    parse_operator,
    ramify,
    touchard,
    twist_op,
)
from resurgence.errors import (
    DomainError,
    ParseError,
    UnsupportedError,
    UnsupportedLevelError,
)
from resurgence.exactnum import PowerSeries, UPoly, format_laurent
from resurgence.formal import series_solution
from resurgence.models import airy_operator, ek_operator

T = ThetaOperator.theta()
H2 = parse_operator("16*theta^2 + 16*theta + x^-1*theta + 3")
EULER = parse_operator("x*theta^2 + theta - 1")


def op(text):
    return parse_operator(text)


def dform(H):
    return [format_laurent(c, "zeta") for c in derivative_form(borel_transform_op(H))]


class TestParse:
    def test_round_trip_through_terms(self):
        assert H2 == ThetaOperator.from_terms({(2, 0): 16, (1, 0): 16, (1, -1): 1, (0, 0): 3})

    def test_whitespace_and_unicode(self):
        assert op(" x * θ^2+θ -1 ") == EULER

    def test_parenthesised_negative_exponent(self):
        assert op("x^(-1)*theta") == op("x^-1*theta")

    @pytest.mark.parametrize("bad", ["", "x*theta^", "2^3*theta", "theta + (", "y*theta"])
    def test_rejects(self, bad):
        with pytest.raises(ParseError):
            op(bad)


class TestApply:
    def test_theta_on_x(self):
        assert apply_op(T, PowerSeries(1, 1, (1,))) == PowerSeries(1, 1, (1,))

    def test_euler_series_is_annihilated(self):
        f = PowerSeries(1, 1, tuple(Fraction((-1) ** n * factorial(n)) for n in range(25)))
        assert apply_op(EULER, f).is_zero()

    def test_h2_on_three_terms(self):
        # as a truncated series the image vanishes wherever it is determined
        r = apply_op(H2, PowerSeries(0, 1, (1, -3, Fraction(105, 2))))
        assert r.is_zero() and r.known_through == 1
        # as a polynomial the remainder starts at lambda^2: (64 + 32 + 3) * 105/2
        r = apply_op(H2, PowerSeries(0, 1, (1, -3, Fraction(105, 2), 0, 0)))
        assert r.beta == 2 and r.coeffs[0] == Fraction(99 * 105, 2)

    def test_incompatible_ramification(self):
        H = ThetaOperator.from_terms({(0, Fraction(1, 2)): 1, (1, 0): 1})
        with pytest.raises(DomainError):
            apply_op(H, PowerSeries(0, 1, (1, 1)))


class TestTwist:
    def test_theta(self):
        assert twist_op(T, 1) == ThetaOperator.from_terms({(1, 0): UPoly((1,)), (0, -1): UPoly((0, -1))})

    def test_euler(self):
        u = UPoly.u()
        expected = ThetaOperator.from_terms(
            {(2, 1): UPoly((1,)), (1, 0): 1 - 2 * u, (0, 0): u - 1, (0, -1): u * u - u}
        )
        assert twist_op(EULER, 1) == expected

    def test_h2(self):
        u = UPoly.u()
        expected = ThetaOperator.from_terms(
            {(2, 0): UPoly((16,)), (1, 0): UPoly((16,)), (1, -1): 1 - 32 * u, (0, 0): UPoly((3,)), (0, -2): u * (16 * u - 1)}
        )
        assert twist_op(H2, 1) == expected

    def test_irrational_slope_rejected(self):
        with pytest.raises(UnsupportedError):
            twist_op(T, 0.5)

    @given(theta_ops(), st.sampled_from([Fraction(1), Fraction(1, 2), Fraction(2)]))
    def test_zero_twist_is_identity(self, H, q):
        assert twist_op(H, q).specialize(Fraction(0)) == H
        assert twist_op(H, q, Fraction(0)) == H

    @given(theta_ops(max_order=2), small_rationals, small_rationals)
    def test_twists_compose(self, H, a, b):
        assert twist_op(twist_op(H, 1, a), 1, b) == twist_op(H, 1, a + b)

    @pytest.mark.parametrize("n", range(9))
    def test_touchard_identity(self, n):
        # theta^0 part of e^{-u/x} theta^n e^{u/x} is (-1)^n T_n(u/x)
        power = identity()
        for _ in range(n):
            power = power * T
        h0 = twist_op(power, 1).coeffs[0]
        s = touchard(n).coefficients
        for j in range(n + 1):
            assert h0.coeff(-j) == UPoly((0,) * j + ((-1) ** n * s[j],))


class TestTouchard:
    def test_small(self):
        assert touchard(0).coefficients == (1,)
        assert touchard(2).coefficients == (0, 1, 1)
        assert touchard(3).coefficients == (0, 1, 3, 1)

    @pytest.mark.parametrize("n", range(2, 12))
    def test_stirling_invariants(self, n):
        s = touchard(n).coefficients
        assert s[n] == 1 and s[n - 1] == n * (n - 1) // 2


class TestConjugateAndRamify:
    def test_theta_shift(self):
        assert conjugate_power(T, Fraction(3, 2)) == op("theta + 3/2")

    def test_euler_indicial_at_one(self):
        G = conjugate_power(EULER, 1)
        low = min(G.exponents())
        assert G.coeffs[0].coeff(low) == 0

    def test_trivial_conjugation(self):
        assert conjugate_power(H2, 0) == H2

    @given(theta_ops(), small_rationals)
    def test_conjugation_inverts(self, H, b):
        assert conjugate_power(conjugate_power(H, b), -b) == H

    @given(theta_ops(), st.integers(1, 4), st.integers(1, 4))
    def test_ramify_composes(self, H, a, b):
        assert ramify(ramify(H, a), b) == ramify(H, a * b)

    def test_ramify_identity(self):
        assert ramify(H2, 1) == H2

    @pytest.mark.parametrize("k", [2, 3, 4, 5])
    def test_ek_ramified_form(self, k):
        m = Fraction(1, k - 1)
        th = ThetaOperator.theta()
        expected = identity()
        for j in range(k):
            expected = expected * (th.scale(2 * k * m) + identity().scale(2 * j + 1))
        expected = expected + ThetaOperator.from_terms({(1, 1 - k): m})
        assert ramify(ek_operator(k), k - 1) == expected

    def test_airy_ramified_form(self):
        q = Fraction(5, 3)
        got = ramify(airy_operator(q), 2).scale(4)
        expected = op("9*theta^2 + 18*theta + 8") - ThetaOperator.from_terms({(0, -2): 4 * q**3})
        assert got == expected

    def test_inverse_variable_involution(self):
        assert inverse_variable(inverse_variable(H2)) == H2


class TestBorel:
    def test_euler(self):
        assert borel_transform_op(EULER) == op("theta + x*theta + x").renamed("zeta")

    def test_e2_matches_second_order_form(self):
        assert dform(H2) == ["35", "2 + 64*zeta", "zeta + 16*zeta^2"]

    def test_twisted_e2(self):
        assert dform(twist_op(H2, 1, Fraction(1, 16))) == ["35", "-2 + 64*zeta", "-zeta + 16*zeta^2"]

    def test_premultiplier_recorded(self):
        B = borel_transform_op(H2)
        assert "premultiplier_power" in B.meta

    def test_other_levels_rejected(self):
        with pytest.raises(UnsupportedLevelError):
            borel_transform_op(ek_operator(3))

    @pytest.mark.parametrize("H,beta", [(EULER, 1), (H2, 0), (twist_op(H2, 1, Fraction(1, 16)), 0)])
    def test_annihilates_borel_of_solutions(self, H, beta):
        f = series_solution(H, beta, 40)
        b = borel_series(f)
        cs = []  # exact coefficients of the minor
        for n, a in enumerate(f.coeffs):
            j = beta + n
            if j >= 1:
                cs.append(Fraction(a) / factorial(j - 1))
        minor = PowerSeries(0, 1, tuple(cs))
        assert len(cs) == len(b.coeffs)
        assert apply_op(borel_transform_op(H), minor).is_zero()


@given(theta_ops())
def test_format_parse_round_trip(H):
    if not H.support():
        return
    assert parse_operator(format_operator(H)) == H
