"""Exact and high-precision arithmetic shared by the rest of the package.

Scalars live in one of four rings, identified by a string tag:

* ``"Q"``    -- :class:`fractions.Fraction`
* ``"C"``    -- :class:`mpmath.mpc` at (at least) :data:`DEFAULT_PRECISION` bits
* ``"Q[u]"`` -- :class:`UPoly` with rational coefficients (formal twist symbol ``u``)
* ``"C[u]"`` -- :class:`UPoly` with complex coefficients

Mixing rings inside :class:`LaurentPolynomial` arithmetic is an error; callers
promote explicitly with :func:`join_ring` / :meth:`LaurentPolynomial.to_ring`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import mpmath
from mpmath import mp

from .errors import DomainError, NormalizationError, RingMismatchError

DEFAULT_PRECISION = 256

if mp.prec < DEFAULT_PRECISION:
    mp.prec = DEFAULT_PRECISION

Q, C, QU, CU = "Q", "C", "Q[u]", "C[u]"

_JOIN = {
    frozenset([Q]): Q,
    frozenset([C]): C,
    frozenset([QU]): QU,
    frozenset([CU]): CU,
    frozenset([Q, C]): C,
    frozenset([Q, QU]): QU,
    frozenset([Q, CU]): CU,
    frozenset([C, QU]): CU,
    frozenset([C, CU]): CU,
    frozenset([QU, CU]): CU,
}


def join_ring(*rings):
    out = Q
    for r in rings:
        out = _JOIN[frozenset([out, r])]
    return out


def working_precision(prec=None):
    """Context manager raising mpmath's precision to ``prec`` bits (never lowering it)."""
    prec = DEFAULT_PRECISION if prec is None else prec
    if prec < 64:
        raise DomainError("precision must be at least 64 bits", prec=prec)
    return mp.workprec(max(prec, mp.prec))


# ---------------------------------------------------------------------------
# scalars


def as_rational(value) -> Fraction:
    """Parse ints, Fractions and ``"p/q"`` strings.  Floats are refused."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def is_exact(c) -> bool:
    return isinstance(c, (int, Fraction))


def to_mp(c):
    """Convert an exact or mpmath scalar to ``mpc`` at the current precision."""
    if isinstance(c, Fraction):
        return mpmath.mpc(mpmath.mpf(c.numerator) / c.denominator)
    if isinstance(c, int):
        return mpmath.mpc(c)
    if isinstance(c, (mpmath.mpc, mpmath.mpf, float, complex)):
        return mpmath.mpc(c)
    raise TypeError(f"not a scalar: {c!r}")


def scalar_ring(c) -> str:
    if isinstance(c, UPoly):
        return QU if c.is_exact else CU
    if is_exact(c):
        return Q
    if isinstance(c, (mpmath.mpc, mpmath.mpf)):
        return C
    raise TypeError(f"unsupported scalar type {type(c).__name__}")


def convert_scalar(c, ring):
    """Embed a scalar into ``ring``; raises if that would lose information."""
    src = scalar_ring(c)
    if src == ring:
        return c
    if join_ring(src, ring) != ring:
        raise RingMismatchError(f"cannot convert {src} scalar into {ring}")
    if ring == C:
        return to_mp(c)
    if ring == QU:
        return UPoly((c,))
    # ring == CU
    if isinstance(c, UPoly):
        return UPoly(tuple(to_mp(a) for a in c.coeffs))
    return UPoly((to_mp(c),))


def is_zero_scalar(c) -> bool:
    if isinstance(c, UPoly):
        return c.is_zero
    return c == 0


def chop_scalar(c, rel=None):
    """Zero out an inexact scalar whose size is at the rounding floor."""
    if is_exact(c):
        return c
    rel = mpmath.ldexp(1, -(mp.prec * 3) // 4) if rel is None else rel
    if isinstance(c, UPoly):
        return UPoly(tuple(chop_scalar(a, rel) for a in c.coeffs))
    return mpmath.mpc(0) if abs(c) <= rel else c


# ---------------------------------------------------------------------------
# polynomials in the twist symbol u (also reused for polynomials in beta, zeta)


class UPoly:
    """Dense univariate polynomial, coefficients in increasing degree order."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [Fraction(c) if isinstance(c, int) else c for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def u(cls):
        return cls((Fraction(0), Fraction(1)))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def is_exact(self) -> bool:
        return all(is_exact(c) for c in self.coeffs)

    def __bool__(self):
        return bool(self.coeffs)

    def _lift(self, other):
        if isinstance(other, UPoly):
            return other
        if isinstance(other, (int, Fraction, mpmath.mpc, mpmath.mpf)):
            return UPoly((other,))
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return UPoly(tuple(x + y for x, y in zip(a, b)))

    __radd__ = __add__

    def __neg__(self):
        return UPoly(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        if self.is_zero or other.is_zero:
            return UPoly()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return UPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = UPoly((1,))
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return False
        return self.coeffs == other.coeffs

    def __hash__(self):
        if len(self.coeffs) <= 1:
            return hash(self.coeffs[0] if self.coeffs else 0)
        return hash(self.coeffs)

    def __call__(self, u):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * u + c
        return acc

    def evaluate_chopped(self, u):
        """Evaluate at an inexact ``u``; results at the rounding floor become 0."""
        if is_exact(u) and self.is_exact:
            return self(u)
        value = self(u)
        scale = sum(abs(c) * abs(u) ** i for i, c in enumerate(self.coeffs))
        if scale == 0 or abs(value) <= scale * mpmath.ldexp(1, -(mp.prec * 3) // 4):
            return mpmath.mpc(0)
        return value

    def derivative(self):
        return UPoly(tuple(i * c for i, c in enumerate(self.coeffs))[1:])

    def divmod(self, other: "UPoly"):
        """Exact Euclidean division (rational coefficients only)."""
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        quot = [Fraction(0)] * max(0, len(rem) - len(other.coeffs) + 1)
        lead = other.coeffs[-1]
        for shift in range(len(quot) - 1, -1, -1):
            c = rem[shift + other.degree] / lead
            quot[shift] = c
            for i, b in enumerate(other.coeffs):
                rem[shift + i] -= c * b
        return UPoly(quot), UPoly(rem[: other.degree] if other.degree > 0 else ())

    def valuation(self) -> int:
        for i, c in enumerate(self.coeffs):
            if c != 0:
                return i
        raise ValueError("valuation of the zero polynomial")

    def __repr__(self):
        return f"UPoly({format_poly(self, 'u')})"


def format_scalar(c) -> str:
    if isinstance(c, Fraction):
        return str(c)
    if isinstance(c, int):
        return str(c)
    if isinstance(c, UPoly):
        return "(" + format_poly(c, "u") + ")"
    c = mpmath.mpc(c)
    if c.imag == 0:
        return mpmath.nstr(c.real, 20)
    return "(" + mpmath.nstr(c, 20) + ")"


def format_poly(p: UPoly, var: str) -> str:
    if p.is_zero:
        return "0"
    parts = []
    for i, c in enumerate(p.coeffs):
        if c == 0:
            continue
        mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
        cs = format_scalar(c)
        if mono and cs == "1":
            parts.append(mono)
        elif mono and cs == "-1":
            parts.append("-" + mono)
        else:
            parts.append(cs + ("*" + mono if mono else ""))
    return " + ".join(parts).replace("+ -", "- ")


def poly_gcd(a: UPoly, b: UPoly) -> UPoly:
    """Monic gcd of two exact rational polynomials."""
    while not b.is_zero:
        _, r = a.divmod(b)
        a, b = b, r
    if a.is_zero:
        return a
    lead = a.coeffs[-1]
    return UPoly(tuple(c / lead for c in a.coeffs))


def _rational_from_mp(x, max_den: int) -> Fraction:
    x = mpmath.mpf(x)
    man, exp = abs(x).man_exp if x != 0 else (0, 0)
    f = Fraction(int(man)) * (Fraction(2) ** int(exp)) * (-1 if x < 0 else 1)
    return f.limit_denominator(max(1, max_den))


def polish_root(p: UPoly, z, steps: int = 8):
    dp = p.derivative()
    for _ in range(steps):
        d = dp(z)
        if d == 0:
            break
        step = p(z) / d
        z = z - step
        if abs(step) <= abs(z) * mpmath.ldexp(1, -mp.prec + 4):
            break
    return z


def numeric_roots(p: UPoly):
    """All complex roots of ``p`` (with multiplicity) at the working precision."""
    if p.degree < 1:
        return []
    cs = [to_mp(c) for c in reversed(p.coeffs)]
    if p.degree == 1:
        return [-cs[1] / cs[0]]
    try:
        roots = mpmath.polyroots(cs, maxsteps=400, extraprec=mp.prec)
    except mpmath.libmp.libhyper.NoConvergence:
        n = p.degree
        comp = mpmath.zeros(n, n)
        for i in range(1, n):
            comp[i, i - 1] = 1
        for i in range(n):
            comp[i, n - 1] = -cs[n - i] / cs[0]
        roots = list(mpmath.eig(comp, left=False, right=False))
    return [polish_root(p, mpmath.mpc(r)) for r in roots]


def polynomial_roots(p: UPoly):
    """Roots of ``p``: exact :class:`Fraction` where rational, else ``mpc``.

    Rational candidates come from the numeric roots and are confirmed by exact
    evaluation; their denominators divide the (integer-normalised) leading
    coefficient.
    """
    if not p.is_exact:
        return sorted(numeric_roots(p), key=_root_key)
    den = lcm(*[Fraction(c).denominator for c in p.coeffs])
    ints = UPoly(tuple(Fraction(c) * den for c in p.coeffs))
    lead = abs(int(ints.coeffs[-1]))
    exact, rest = [], UPoly(ints.coeffs)
    while rest.degree >= 1 and rest.coeffs[0] == 0:
        exact.append(Fraction(0))
        rest = UPoly(rest.coeffs[1:])
    found = True
    while found and rest.degree >= 1:
        found = False
        for r in numeric_roots(rest):
            if abs(mpmath.im(r)) > mpmath.mpf(10) ** (-mp.dps // 3):
                continue
            cand = _rational_from_mp(mpmath.re(r), lead)
            if rest(cand) == 0:
                exact.append(cand)
                rest, _ = rest.divmod(UPoly((-cand, Fraction(1))))
                found = True
                break
    roots = sorted(exact) + sorted(numeric_roots(rest), key=_root_key)
    return roots


def _root_key(r):
    r = mpmath.mpc(r)
    return (float(mpmath.arg(r)) % (2 * mpmath.pi), float(abs(r)))


# ---------------------------------------------------------------------------
# Laurent polynomials


def _as_exponent(e) -> Fraction:
    return e if isinstance(e, Fraction) else Fraction(e)


class LaurentPolynomial:
    """Finite sum ``sum_e c_e x^e`` with rational exponents ``e`` (usually integers).

    Zero coefficients are never stored.  All coefficients share one ring.
    """

    __slots__ = ("terms", "ring")

    def __init__(self, terms=None, ring=None):
        terms = dict(terms or {})
        rings = {scalar_ring(c) for c in terms.values()}
        target = join_ring(*rings) if rings else Q
        if ring is not None:
            if join_ring(target, ring) != ring:
                raise RingMismatchError(f"coefficients in {target} do not fit ring {ring}")
            target = ring
        clean = {}
        for e, c in terms.items():
            c = convert_scalar(c, target)
            if not is_zero_scalar(c):
                clean[_as_exponent(e)] = c
        self.terms = clean
        self.ring = target

    # constructors
    @classmethod
    def monomial(cls, c, e=0, ring=None):
        return cls({e: c}, ring=ring)

    @classmethod
    def zero(cls, ring=Q):
        return cls({}, ring=ring)

    @classmethod
    def one(cls, ring=Q):
        return cls({0: 1}, ring=ring)

    # structure
    @property
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self):
        if not self.terms:
            raise ValueError("degree of the zero Laurent polynomial")
        return max(self.terms)

    def valuation(self):
        if not self.terms:
            raise ValueError("valuation of the zero Laurent polynomial")
        return min(self.terms)

    def exponents(self):
        return sorted(self.terms)

    def coeff(self, e):
        return self.terms.get(_as_exponent(e), 0)

    def to_ring(self, ring):
        return LaurentPolynomial(self.terms, ring=ring)

    def map_coeffs(self, fn, ring=None):
        return LaurentPolynomial({e: fn(c) for e, c in self.terms.items()}, ring=ring)

    def _check(self, other):
        if not isinstance(other, LaurentPolynomial):
            return NotImplemented
        if other.ring != self.ring:
            raise RingMismatchError(f"{self.ring} vs {other.ring}")
        return other

    # arithmetic
    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out[e] + c if e in out else c
        return LaurentPolynomial(out, ring=self.ring)

    def __neg__(self):
        return LaurentPolynomial({e: -c for e, c in self.terms.items()}, ring=self.ring)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = e1 + e2
                out[e] = out[e] + c1 * c2 if e in out else c1 * c2
        return LaurentPolynomial(out, ring=self.ring)

    def scale(self, c):
        ring = join_ring(self.ring, scalar_ring(c))
        c = convert_scalar(c, ring)
        return LaurentPolynomial({e: c * v for e, v in self.to_ring(ring).terms.items()}, ring=ring)

    def shift(self, e):
        """Multiply by ``x^e``."""
        e = _as_exponent(e)
        return LaurentPolynomial({k + e: c for k, c in self.terms.items()}, ring=self.ring)

    def substitute_power(self, r):
        """``x -> x^r``."""
        r = _as_exponent(r)
        return LaurentPolynomial({k * r: c for k, c in self.terms.items()}, ring=self.ring)

    def __eq__(self, other):
        if not isinstance(other, LaurentPolynomial):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __call__(self, x):
        return sum((c * x ** e for e, c in self.terms.items()), 0)

    def __repr__(self):
        return f"LaurentPolynomial({format_laurent(self, 'x')})"


def format_laurent(p: LaurentPolynomial, var: str = "x") -> str:
    if p.is_zero:
        return "0"
    parts = []
    for e in sorted(p.terms):
        c = p.terms[e]
        mono = "" if e == 0 else (var if e == 1 else f"{var}^({e})" if e.denominator != 1 or e < 0 else f"{var}^{e}")
        cs = format_scalar(c)
        if mono and cs == "1":
            parts.append(mono)
        elif mono and cs == "-1":
            parts.append("-" + mono)
        else:
            parts.append(cs + ("*" + mono if mono else ""))
    return " + ".join(parts).replace("+ -", "- ")


def lp_mul(a: LaurentPolynomial, b: LaurentPolynomial) -> LaurentPolynomial:
    if a.ring != b.ring:
        raise RingMismatchError(f"cannot multiply {a.ring} by {b.ring} Laurent polynomials")
    return a * b


# ---------------------------------------------------------------------------
# ramified power series


@dataclass(frozen=True)
class PowerSeries:
    """Truncated ramified series ``x^beta * sum_{n=0}^{order} a_n x^(n/r)``."""

    beta: Fraction
    ramification: int
    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "beta", as_rational(self.beta))
        object.__setattr__(self, "coeffs", tuple(Fraction(c) if isinstance(c, int) else c for c in self.coeffs))
        if self.ramification < 1:
            raise DomainError("ramification must be a positive integer")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_exact(self) -> bool:
        return all(is_exact(c) for c in self.coeffs)

    def exponent(self, n) -> Fraction:
        return self.beta + Fraction(n, self.ramification)

    @property
    def known_through(self) -> Fraction:
        """Largest exponent whose coefficient is determined."""
        return self.exponent(self.order)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def normalized(self) -> "PowerSeries":
        """Strip leading zeros (shifting beta) so that ``a_0 != 0``, unless all vanish."""
        for s, c in enumerate(self.coeffs):
            if c != 0:
                if s == 0:
                    return self
                return PowerSeries(self.exponent(s), self.ramification, self.coeffs[s:])
        return self

    def truncate(self, n: int) -> "PowerSeries":
        return PowerSeries(self.beta, self.ramification, self.coeffs[: n + 1])

    def scale(self, c) -> "PowerSeries":
        return PowerSeries(self.beta, self.ramification, tuple(c * a for a in self.coeffs))

    def mul_power(self, e) -> "PowerSeries":
        """Multiply by ``x^e``."""
        return PowerSeries(self.beta + as_rational(e), self.ramification, self.coeffs)

    def ramify(self, r: int) -> "PowerSeries":
        """Rewrite in ``t`` with ``x = t^r`` (integer exponents scale by ``r``)."""
        out = []
        for i, c in enumerate(self.coeffs):
            out.append(c)
            if i < len(self.coeffs) - 1:
                out.extend([Fraction(0)] * (r - 1))
        return PowerSeries(self.beta * r, self.ramification, tuple(out))

    def evaluate(self, x):
        x = to_mp(x)
        terms = (to_mp(c) * x ** (self.exponent(n)) for n, c in enumerate(self.coeffs) if c != 0)
        return mpmath.fsum(terms)

    def __repr__(self):
        head = ", ".join(format_scalar(c) for c in self.coeffs[:6])
        more = ", ..." if len(self.coeffs) > 6 else ""
        return f"PowerSeries(x^{self.beta} * [{head}{more}] step 1/{self.ramification}, order {self.order})"

    def to_json(self) -> dict:
        def enc(c):
            if is_exact(c):
                return str(Fraction(c))
            c = mpmath.mpc(c)
            return [mpmath.nstr(c.real, 40), mpmath.nstr(c.imag, 40)]

        return {"beta": str(self.beta), "ramification": self.ramification, "coeffs": [enc(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, data: dict) -> "PowerSeries":
        def dec(c):
            if isinstance(c, str):
                return Fraction(c)
            return mpmath.mpc(mpmath.mpf(c[0]), mpmath.mpf(c[1]))

        return cls(Fraction(data["beta"]), int(data["ramification"]), tuple(dec(c) for c in data["coeffs"]))


def _check_unit_series(f: PowerSeries, name: str):
    if f.beta != 0:
        raise DomainError(f"{name} needs a series with beta = 0", beta=str(f.beta))
    if not f.coeffs or f.coeffs[0] != 1:
        raise NormalizationError(f"{name} needs a_0 = 1")


def series_log(f: PowerSeries) -> PowerSeries:
    """Formal logarithm of ``1 + ...`` to the same truncation order.

    Uses ``n w_n = n a_n - sum_{j=1}^{n-1} j w_j a_{n-j}`` (from ``f w' = f'``).
    """
    _check_unit_series(f, "series_log")
    a = f.coeffs
    w = [Fraction(0)]
    for n in range(1, len(a)):
        acc = n * a[n]
        for j in range(1, n):
            acc -= j * w[j] * a[n - j]
        w.append(acc / n)
    return PowerSeries(Fraction(0), f.ramification, tuple(w))


def series_exp(w: PowerSeries) -> PowerSeries:
    """Formal exponential of a series with zero constant term."""
    if w.beta != 0:
        raise DomainError("series_exp needs beta = 0")
    if w.coeffs and w.coeffs[0] != 0:
        raise NormalizationError("series_exp needs a vanishing constant term")
    e = [Fraction(1)]
    for n in range(1, len(w.coeffs)):
        acc = 0
        for j in range(1, n + 1):
            acc += j * w.coeffs[j] * e[n - j]
        e.append(acc / n)
    return PowerSeries(Fraction(0), w.ramification, tuple(e))
