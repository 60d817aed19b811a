from fractions import Fraction
from math import factorial

import mpmath
import pytest

from resurgence.diffop import apply_op, parse_operator, ramify, twist_op
from resurgence.errors import (
    DomainError,
    InsufficientDataError,
    ResonanceError,
    ShapeError,
)
from resurgence.exactnum import PowerSeries, to_mp
from resurgence.formal import (
    formal_basis,
    free_energy_series,
    gevrey_estimate,
    series_solution,
)
from resurgence.models import ek_operator

EULER = parse_operator("x*theta^2 + theta - 1")
H2 = parse_operator("16*theta^2 + 16*theta + x^-1*theta + 3")


def closed_form(k, n):
    return Fraction((-1) ** n * factorial(2 * k * n), factorial(n) * 2 ** (k * n) * factorial(k * n))


class TestSeriesSolution:
    def test_h2_recurrence(self):
        a = series_solution(H2, 0, 20).coeffs
        assert a[:3] == (1, -3, Fraction(105, 2))
        for n in range(20):
            assert a[n + 1] == -Fraction((4 * n + 1) * (4 * n + 3), n + 1) * a[n]

    def test_twisted_h2_recurrence(self):
        b = series_solution(twist_op(H2, 1, Fraction(1, 16)), 0, 20).coeffs
        for n in range(20):
            assert b[n + 1] == Fraction((4 * n + 1) * (4 * n + 3), n + 1) * b[n]

    def test_euler(self):
        f = series_solution(EULER, 1, 15)
        assert f.beta == 1
        assert f.coeffs == tuple(Fraction((-1) ** n * factorial(n)) for n in range(16))

    def test_non_root_rejected(self):
        with pytest.raises(DomainError):
            series_solution(H2, 1, 5)

    def test_resonance_reported_with_index(self):
        # indicial roots 0 and 2 differ by an integer
        H = parse_operator("theta^2 - 2*theta + x")
        with pytest.raises(ResonanceError) as exc:
            series_solution(H, 0, 5)
        assert exc.value.detail["index"] == 2

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_closed_form(self, k):
        a = series_solution(ek_operator(k), 0, 30).coeffs
        assert all(a[n] == closed_form(k, n) for n in range(31))

    @pytest.mark.parametrize(
        "H,beta",
        [(EULER, 1), (H2, 0), (ramify(ek_operator(3), 2), 0), (twist_op(H2, 1, Fraction(1, 16)), 0)],
    )
    def test_solutions_are_annihilated(self, H, beta):
        assert apply_op(H, series_solution(H, beta, 25)).is_zero()


class TestBasis:
    def test_euler(self):
        f0, f1 = formal_basis(EULER, 10)
        assert (f0.u, f0.beta) == (0, 1)
        assert (f1.u, f1.beta) == (1, 0)
        assert f1.series.coeffs == (1,) + (0,) * 10

    def test_e2(self):
        z0, z1 = formal_basis(H2, 10)
        assert z1.u == Fraction(1, 16) and z0.beta == z1.beta == 0
        assert z1.series.coeffs[1] == 3

    @pytest.mark.parametrize("k", range(3, 7))
    def test_nonzero_u_sum_to_zero(self, k):
        basis = formal_basis(ramify(ek_operator(k), k - 1), 10)
        assert len(basis) == k
        assert abs(mpmath.fsum(to_mp(b.u) for b in basis[1:])) < mpmath.mpf(10) ** -60

    @pytest.mark.parametrize("k", [3, 4])
    def test_numeric_twists_annihilate(self, k):
        for b in formal_basis(ramify(ek_operator(k), k - 1), 15)[1:]:
            r = apply_op(b.operator, b.series)
            assert max(abs(to_mp(c)) for c in r.coeffs) < mpmath.mpf(10) ** -50

    @pytest.mark.parametrize("text", ["theta^2 + x^-1", "theta + x^-1*theta^2 + x^-3*theta^3"])
    def test_shape_rejected(self, text):
        with pytest.raises(ShapeError):
            formal_basis(parse_operator(text), 5)


class TestGevrey:
    def test_e2(self):
        g = gevrey_estimate(series_solution(H2, 0, 80))
        assert abs(g.s - 1) < 0.05 and abs(g.A - 16) / 16 < 0.05

    def test_geometric(self):
        g = gevrey_estimate(PowerSeries(0, 1, tuple(Fraction(2**n) for n in range(40))))
        assert g.s < 0.05 and abs(g.A - 2) < 0.1

    def test_e3(self):
        g = gevrey_estimate(series_solution(ek_operator(3), 0, 80))
        assert abs(g.s - 2) < 0.1

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_critical_time_is_gevrey_one(self, k):
        f = series_solution(ramify(ek_operator(k), k - 1), 0, 120)
        assert abs(gevrey_estimate(f).s - 1) < 0.05

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            gevrey_estimate(PowerSeries(0, 1, (1, 2, 3)))


class TestFreeEnergy:
    def test_unit(self):
        assert free_energy_series(PowerSeries(0, 1, (1, 0, 0)), 2).is_zero()

    def test_mercator(self):
        assert free_energy_series(PowerSeries(0, 1, (1, 1)), 3).coeffs[:2] == (0, 1)

    def test_e2_brute_force(self):
        a = series_solution(H2, 0, 6).coeffs
        w = free_energy_series(PowerSeries(0, 1, a), 4).coeffs
        # log(1 + y) with y = Z - 1, expanded by hand to order 4
        y = [Fraction(0)] + list(a[1:5])

        def mul(p, q):
            out = [Fraction(0)] * 5
            for i, x in enumerate(p):
                for j, z in enumerate(q):
                    if i + j < 5:
                        out[i + j] += x * z
            return out

        acc, power = [Fraction(0)] * 5, [Fraction(1)] + [Fraction(0)] * 4
        for n in range(1, 5):
            power = mul(power, y)
            acc = [s + Fraction((-1) ** (n + 1), n) * p for s, p in zip(acc, power)]
        assert list(w) == acc
        assert w[1:3] == (-3, 48)
