from fractions import Fraction

import mpmath
import pytest
from conftest import theta_ops
from hypothesis import given

from resurgence.diffop import (
    ThetaOperator,
    inverse_variable,
    parse_operator,
    ramify,
    twist_op,
)
from resurgence.errors import MultipleRootError, NoFormalSolutionError
from resurgence.exactnum import UPoly, poly_gcd, to_mp
from resurgence.models import airy_operator, ek_operator
from resurgence.newton import (
    determining_polynomial,
    indicial_polynomial,
    newton_polygon,
)

EULER = parse_operator("x*theta^2 + theta - 1")
H2 = parse_operator("16*theta^2 + 16*theta + x^-1*theta + 3")
u = UPoly.u()


class TestPolygon:
    def test_euler(self):
        p = newton_polygon(EULER)
        assert p.vertices == ((0, 0), (1, 0), (2, 1))
        assert p.slopes == ((0, 1), (1, 1))

    def test_h2(self):
        assert [q for q, _ in newton_polygon(H2).slopes] == [0, 1]

    @pytest.mark.parametrize("k", range(2, 7))
    def test_ek_slope(self, k):
        assert newton_polygon(ek_operator(k)).positive_slopes == (Fraction(1, k - 1),)

    def test_json(self):
        assert newton_polygon(EULER).to_json() == {
            "vertices": [[0, 0], [1, 0], [2, 1]],
            "slopes": [{"q": "0", "length": 1}, {"q": "1", "length": 1}],
        }

    @given(theta_ops())
    def test_mirror(self, H):
        inf = newton_polygon(H, "infinity")
        zero = newton_polygon(inverse_variable(H), "zero")
        assert inf.vertices == tuple((a, -b) for a, b in zero.vertices)

    @given(theta_ops())
    def test_slopes_strictly_increase(self, H):
        qs = [q for q, _ in newton_polygon(H).slopes]
        assert all(a < b for a, b in zip(qs, qs[1:]))
        assert newton_polygon(H).vertices[0][0] == 0


class TestIndicial:
    def test_h2(self):
        assert indicial_polynomial(H2).roots == (0,)

    def test_euler(self):
        data = indicial_polynomial(EULER)
        assert data.polynomial == UPoly((-1, 1)) and data.roots == (1,)

    def test_twisted_airy(self):
        Hx = ramify(airy_operator(Fraction(1)), 2).scale(4)
        assert indicial_polynomial(twist_op(Hx, 1, Fraction(2, 3))).roots == (Fraction(-1, 2),)

    def test_no_horizontal_slope(self):
        with pytest.raises(NoFormalSolutionError):
            indicial_polynomial(parse_operator("x^-1 + theta"))


class TestDetermining:
    def test_euler(self):
        d = determining_polynomial(EULER, 1)
        assert d.polynomial == u * u - u and d.nonzero_roots == (1,)

    def test_h2(self):
        d = determining_polynomial(H2, 1)
        assert d.polynomial == u * (16 * u - 1) and d.nonzero_roots == (Fraction(1, 16),)

    @pytest.mark.parametrize("k", range(2, 8))
    def test_pk(self, k):
        m = Fraction(1, k - 1)
        d = determining_polynomial(ramify(ek_operator(k), k - 1), 1)
        assert d.polynomial == -m * u + (-2 * k * m * u) ** k
        c = to_mp((-1) ** k * m / (2 * k * m) ** k)
        assert len(d.nonzero_roots) == k - 1
        for r in d.nonzero_roots:
            assert abs(to_mp(r) ** (k - 1) - c) < mpmath.mpf(10) ** -60

    @pytest.mark.parametrize("k", range(2, 9))
    def test_qk_never_vanishes_with_pk(self, k):
        m = Fraction(1, k - 1)
        T = twist_op(ramify(ek_operator(k), k - 1), 1)
        h1 = T.coeffs[1]
        Q = h1.terms[min(h1.terms)]
        assert Q == m + 2 * k * k * m * (-2 * k * m * u) ** (k - 1)
        P = determining_polynomial(ramify(ek_operator(k), k - 1), 1).polynomial
        cof = UPoly(P.coeffs[1:])
        assert poly_gcd(cof, Q).degree == 0

    @pytest.mark.parametrize("k", range(2, 9))
    def test_second_row_of_theta0_vanishes(self, k):
        T = twist_op(ramify(ek_operator(k), k - 1), 1)
        assert T.coeffs[0].coeff(1 - k) == 0

    @pytest.mark.parametrize("k", range(3, 8))
    def test_twisted_polygons_keep_shape(self, k):
        Hx = ramify(ek_operator(k), k - 1)
        base = [q for q, _ in newton_polygon(Hx).slopes]
        for r in determining_polynomial(Hx, 1).nonzero_roots:
            Hu = twist_op(Hx, 1).specialize(r).chop()
            assert [q for q, _ in newton_polygon(Hu).slopes] == base
            assert newton_polygon(Hu).slopes[0] == (0, 1)

    def test_multiple_root_rejected(self):
        # theta^0 lowest part u^2 (u - 1)^2 after twisting
        H = ThetaOperator.from_terms({(4, 0): 1, (3, -1): 2, (2, -2): 1})
        with pytest.raises(MultipleRootError) as exc:
            determining_polynomial(H, 1)
        assert exc.value.kind == "multiple-root-unsupported"
