"""Newton polygons at 0 and infinity, indicial and determining polynomials."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mp

from .diffop import ThetaOperator, twist_op
from .errors import MultipleRootError, NoFormalSolutionError
from .exactnum import (
    UPoly,
    is_exact,
    poly_gcd,
    polynomial_roots,
    to_mp,
    working_precision,
)


@dataclass(frozen=True)
class NewtonPolygon:
    vertices: tuple  # ((u, v), ...) left to right
    slopes: tuple  # ((q, horizontal length), ...)
    at: str = "zero"

    @property
    def positive_slopes(self):
        return tuple(q for q, _ in self.slopes if q > 0)

    def to_json(self) -> dict:
        def num(v):
            v = Fraction(v)
            return int(v) if v.denominator == 1 else str(v)

        return {
            "vertices": [[u, num(v)] for u, v in self.vertices],
            "slopes": [{"q": str(Fraction(q)), "length": length} for q, length in self.slopes],
        }


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _hull(points, lower=True):
    """Monotone-chain lower (or upper) hull, collinear points dropped."""
    hull = []
    for p in points:
        while len(hull) >= 2:
            c = _cross(hull[-2], hull[-1], p)
            if (lower and c <= 0) or (not lower and c >= 0):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def newton_polygon(H: ThetaOperator, at: str = "zero") -> NewtonPolygon:
    """Lower boundary at 0 (upper boundary at infinity) of the region spanned by
    ``{(u, v): 0 <= u <= i, v >= e}`` (``v <= e`` at infinity) over the support ``(i, e)``."""
    if at not in ("zero", "infinity"):
        raise ValueError("at must be 'zero' or 'infinity'")
    n = H.order
    col = {}
    for i, e in H.support():
        col.setdefault(i, []).append(e)
    pts = []
    best = None
    for u in range(n, -1, -1):
        if u in col:
            cand = min(col[u]) if at == "zero" else max(col[u])
            if best is None or (cand < best if at == "zero" else cand > best):
                best = cand
        pts.append((u, Fraction(best)))
    pts.reverse()
    hull = _hull(pts, lower=(at == "zero"))
    slopes = tuple(
        (Fraction(b[1] - a[1]) / (b[0] - a[0]), b[0] - a[0]) for a, b in zip(hull, hull[1:])
    )
    return NewtonPolygon(tuple((u, v) for u, v in hull), slopes, at)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IndicialData:
    polynomial: UPoly  # in beta
    roots: tuple


def indicial_polynomial(H: ThetaOperator) -> IndicialData:
    """``Q(beta)``: lowest-x-degree coefficient of ``x^{-beta} H x^{beta}``."""
    low = min(H.exponents())
    poly = UPoly(tuple(h.coeff(low) for h in H.coeffs))
    if poly.degree < 1:
        raise NoFormalSolutionError(
            "Newton polygon at 0 has no horizontal slope", lowest_exponent=str(low)
        )
    return IndicialData(poly, tuple(polynomial_roots(poly)))


@dataclass(frozen=True)
class DeterminingData:
    polynomial: UPoly
    nonzero_roots: tuple
    slope: Fraction
    residuals: tuple
    binomial: bool = False


def determining_polynomial(H: ThetaOperator, q, prec=None) -> DeterminingData:
    """``P(u)``: lowest-x-degree part of the theta^0 coefficient of the symbolic twist."""
    q = Fraction(q)
    Hu = twist_op(H, q)
    h0 = Hu.coeffs[0]
    low = min(h0.terms)
    P = h0.terms[low]
    if not isinstance(P, UPoly):
        P = UPoly((P,))
    with working_precision(prec):
        roots, binomial = _nonzero_roots(P)
        residuals = tuple(abs(to_mp(P(r))) if not is_exact(r) else mpmath.mpf(0) for r in roots)
    return DeterminingData(P, tuple(roots), q, residuals, binomial)


def _nonzero_roots(P: UPoly):
    v = P.valuation()
    cof = UPoly(P.coeffs[v:])
    if v > 1:
        raise MultipleRootError("u = 0 is a multiple root of P(u)", multiplicity=v)
    if cof.degree < 1:
        return [], False
    if cof.is_exact:
        g = poly_gcd(cof, cof.derivative())
        if g.degree >= 1:
            raise MultipleRootError("P(u) has multiple nonzero roots", P=repr(P))
    middle = cof.coeffs[1:-1]
    if cof.degree >= 2 and all(c == 0 for c in middle):
        return _binomial_roots(cof), True
    roots = polynomial_roots(cof)
    if not cof.is_exact:
        _check_separated(roots)
    return roots, False


def _binomial_roots(cof: UPoly):
    """Roots of ``c_d u^d + c_0``: principal d-th root times d-th roots of unity."""
    d = cof.degree
    c = -cof.coeffs[0] / cof.coeffs[-1]
    out = []
    exact_real = _exact_root(c, d) if is_exact(c) else None
    base = mpmath.root(to_mp(c), d)
    for j in range(d):
        z = base * mpmath.expjpi(mpmath.mpf(2 * j) / d)
        if exact_real is not None:
            for cand in (exact_real, -exact_real):
                if abs(to_mp(cand) - z) < mpmath.mpf(10) ** (-mp.dps // 2) and cof(cand) == 0:
                    z = cand
                    break
        out.append(z if is_exact(z) else mpmath.mpc(z))
    if not cof.is_exact:
        _check_separated(out)
    return out


def _exact_root(c: Fraction, d: int):
    """Real rational d-th root of ``c`` if one exists."""
    sign = 1
    if c < 0:
        if d % 2 == 0:
            return None
        sign = -1
    num, den = _int_root(abs(c.numerator), d), _int_root(c.denominator, d)
    if num is None or den is None:
        return None
    return sign * Fraction(num, den)


def _int_root(n: int, d: int):
    if n == 0:
        return 0
    r = round(n ** (1.0 / d)) if n < 2 ** 1000 else int(mpmath.root(n, d))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand ** d == n:
            return cand
    return None


def _check_separated(roots):
    tol = mpmath.ldexp(1, -mp.prec // 4)
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            a, b = to_mp(roots[i]), to_mp(roots[j])
            if abs(a - b) <= tol * max(abs(a), abs(b), 1):
                raise MultipleRootError("P(u) has numerically coincident roots", i=i, j=j)
