"""Linear differential operators in theta-form, ``H = sum_i H_i(x) theta^i`` with
``theta = x d/dx`` and Laurent-polynomial coefficients ``H_i``.

Composition uses ``theta^i . b = sum_l C(i, l) theta^l(b) theta^(i-l)`` where
``theta^l(x^e) = e^l x^e``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb

from .errors import DomainError, ParseError, UnsupportedError, UnsupportedLevelError
from .exactnum import (
    CU,
    QU,
    LaurentPolynomial,
    PowerSeries,
    Q,
    UPoly,
    as_rational,
    chop_scalar,
    convert_scalar,
    format_scalar,
    is_exact,
    join_ring,
    scalar_ring,
)


@dataclass(frozen=True)
class ThetaOperator:
    coeffs: tuple
    variable: str = "x"
    meta: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        cs = list(self.coeffs)
        while cs and cs[-1].is_zero:
            cs.pop()
        if not cs:
            raise DomainError("the zero operator is not allowed")
        ring = join_ring(*(c.ring for c in cs))
        object.__setattr__(self, "coeffs", tuple(c.to_ring(ring) for c in cs))

    @classmethod
    def from_terms(cls, terms, variable="x", ring=None):
        """Build from ``{(i, e): c}`` meaning ``c * x^e * theta^i``."""
        n = max(i for i, _ in terms)
        rows = [dict() for _ in range(n + 1)]
        for (i, e), c in terms.items():
            e = Fraction(e)
            rows[i][e] = rows[i].get(e, 0) + c
        if ring is None:
            ring = join_ring(*(scalar_ring(c) for c in terms.values()))
        return cls(tuple(LaurentPolynomial(r, ring=ring) for r in rows), variable)

    @classmethod
    def multiplication(cls, p: LaurentPolynomial, variable="x"):
        return cls((p,), variable)

    @classmethod
    def theta(cls, variable="x", ring=Q):
        return cls((LaurentPolynomial.zero(ring), LaurentPolynomial.one(ring)), variable)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def ring(self) -> str:
        return self.coeffs[0].ring

    def to_ring(self, ring):
        return ThetaOperator(tuple(c.to_ring(ring) for c in self.coeffs), self.variable, self.meta)

    def support(self):
        """Pairs ``(i, e)`` with ``x^e`` present in ``H_i``."""
        return sorted((i, e) for i, c in enumerate(self.coeffs) for e in c.terms)

    def exponents(self):
        return sorted({e for c in self.coeffs for e in c.terms})

    def coefficient(self, i, e):
        if i >= len(self.coeffs):
            return 0
        return self.coeffs[i].coeff(e)

    def _aligned(self, other):
        ring = join_ring(self.ring, other.ring)
        return self.to_ring(ring), other.to_ring(ring), ring

    def __add__(self, other):
        a, b, ring = self._aligned(other)
        n = max(len(a.coeffs), len(b.coeffs))
        zero = LaurentPolynomial.zero(ring)
        out = []
        for i in range(n):
            x = a.coeffs[i] if i < len(a.coeffs) else zero
            y = b.coeffs[i] if i < len(b.coeffs) else zero
            out.append(x + y)
        return _make(out, self.variable, ring)

    def __neg__(self):
        return ThetaOperator(tuple(-c for c in self.coeffs), self.variable)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        """Operator composition ``self o other``."""
        if not isinstance(other, ThetaOperator):
            return self.scale(other)
        a, b, ring = self._aligned(other)
        n = a.order + b.order
        out = [LaurentPolynomial.zero(ring) for _ in range(n + 1)]
        for i, ai in enumerate(a.coeffs):
            if ai.is_zero:
                continue
            for j, bj in enumerate(b.coeffs):
                if bj.is_zero:
                    continue
                for l in range(i + 1):
                    tb = theta_power_apply(bj, l)
                    if tb.is_zero:
                        continue
                    out[i - l + j] = out[i - l + j] + (ai * tb).scale(comb(i, l))
        return _make(out, self.variable, ring)

    def __pow__(self, n: int):
        out = identity(self.variable, self.ring)
        for _ in range(n):
            out = out * self
        return out

    def scale(self, c):
        return ThetaOperator(tuple(h.scale(c) for h in self.coeffs), self.variable)

    def left_multiply(self, p: LaurentPolynomial):
        ring = join_ring(self.ring, p.ring)
        p = p.to_ring(ring)
        return _make([p * h.to_ring(ring) for h in self.coeffs], self.variable, ring)

    def map_coeffs(self, fn, ring=None):
        return _make([h.map_coeffs(fn, ring=ring) for h in self.coeffs], self.variable, ring)

    def specialize(self, u):
        """Substitute a value for the twist symbol ``u``."""
        if self.ring not in (QU, CU):
            return self
        exact = is_exact(u) and self.ring == QU

        def ev(c):
            return c(u) if exact else chop_scalar(c.evaluate_chopped(u))

        return _make([h.map_coeffs(ev) for h in self.coeffs], self.variable, None)

    def chop(self):
        return _make([h.map_coeffs(chop_scalar) for h in self.coeffs], self.variable, self.ring)

    def renamed(self, variable):
        return ThetaOperator(self.coeffs, variable, self.meta)

    def __str__(self):
        return format_operator(self)


def _make(rows, variable, ring):
    rows = list(rows)
    while rows and rows[-1].is_zero:
        rows.pop()
    if not rows:
        raise DomainError("operator became identically zero")
    if ring is not None:
        rows = [r.to_ring(ring) for r in rows]
    return ThetaOperator(tuple(rows), variable)


def identity(variable="x", ring=Q):
    return ThetaOperator((LaurentPolynomial.one(ring),), variable)


def theta_power_apply(p: LaurentPolynomial, l: int) -> LaurentPolynomial:
    """``theta^l`` applied to the function ``p(x)``."""
    if l == 0:
        return p
    return LaurentPolynomial({e: c * (e ** l) for e, c in p.terms.items() if e != 0}, ring=p.ring)


def format_operator(H: ThetaOperator) -> str:
    """Flat ``c*x^e*theta^i`` sum; exact operators read back unchanged through ``parse_operator``."""
    var = H.variable
    parts = []
    for i in range(H.order, -1, -1):
        c = H.coeffs[i]
        for e in sorted(c.terms):
            factors = []
            if e != 0:
                factors.append(var if e == 1 else f"{var}^{e}" if e.denominator == 1 else f"{var}^({e})")
            if i:
                factors.append("theta" if i == 1 else f"theta^{i}")
            cs = format_scalar(c.terms[e])
            if not factors:
                parts.append(cs)
            elif cs in ("1", "-1"):
                parts.append(cs[:-1] + "*".join(factors))
            else:
                parts.append("*".join([cs] + factors))
    return " + ".join(parts).replace("+ -", "- ") if parts else "0"


# ---------------------------------------------------------------------------
# operator action on series


def apply_op(H: ThetaOperator, f: PowerSeries) -> PowerSeries:
    """Image ``H(f)``, truncated where unknown tail terms of ``f`` start to contribute.

    The result is normalized (leading zeros stripped); an all-zero result means
    ``H(f)`` vanishes through ``result.known_through``.
    """
    r = f.ramification
    exps = H.exponents()
    for e in exps:
        if (e * r).denominator != 1:
            raise DomainError("operator exponents incompatible with series ramification", exponent=str(e), r=r)
    if H.ring in (QU, CU):
        raise DomainError("specialize the twist symbol before applying an operator")
    d = exps[0]
    n_out = f.order + 1  # valid indices 0..f.order (same step 1/r)
    out = [0] * n_out
    for e in exps:
        off = int((e - d) * r)
        for i, h in enumerate(H.coeffs):
            c = h.coeff(e)
            if c == 0:
                continue
            for m, a in enumerate(f.coeffs):
                idx = m + off
                if idx >= n_out:
                    break
                if a == 0:
                    continue
                s = f.exponent(m)
                out[idx] = out[idx] + c * a * (s ** i)
    res = PowerSeries(f.beta + d, r, tuple(Fraction(0) if (isinstance(x, int) and x == 0) else x for x in out))
    return res.normalized()


# ---------------------------------------------------------------------------
# structural transformations


def twist_op(H: ThetaOperator, q, u=None) -> ThetaOperator:
    """``e^{-u/x^q} H e^{u/x^q}``: substitute ``theta -> theta - q u x^{-q}``.

    With ``u=None`` the result carries ``u`` as a formal symbol (ring ``Q[u]`` or
    ``C[u]``); otherwise ``u`` is substituted directly.
    """
    if not isinstance(q, (int, Fraction, str)):
        raise UnsupportedError("twist slope must be an exact rational", q=repr(q))
    q = as_rational(q)
    if q <= 0:
        raise UnsupportedError("twist slope must be positive", q=str(q))
    sym = UPoly.u() if u is None else u
    ring = join_ring(H.ring, scalar_ring(sym))
    shift = LaurentPolynomial({-q: -q * convert_scalar(sym, ring)}, ring=ring)
    step = ThetaOperator((shift, LaurentPolynomial.one(ring)), H.variable)
    out = None
    power = identity(H.variable, ring)
    for i, h in enumerate(H.coeffs):
        if i > 0:
            power = power * step
        if h.is_zero:
            continue
        term = power.left_multiply(h.to_ring(ring))
        out = term if out is None else out + term
    return out.to_ring(ring)


def conjugate_power(H: ThetaOperator, beta) -> ThetaOperator:
    """``x^{-beta} H x^{beta}``: ``theta -> theta + beta`` in every position."""
    beta = as_rational(beta) if not isinstance(beta, (Fraction, int)) else Fraction(beta)
    ring = H.ring
    n = H.order
    rows = [LaurentPolynomial.zero(ring) for _ in range(n + 1)]
    for i, h in enumerate(H.coeffs):
        for j in range(i + 1):
            c = comb(i, j) * beta ** (i - j)
            if c:
                rows[j] = rows[j] + h.scale(c).to_ring(ring)
    return _make(rows, H.variable, ring)


def ramify(H: ThetaOperator, r: int, variable="x") -> ThetaOperator:
    """Rewrite ``H`` (in ``v``) in ``t`` with ``v = t^r``: ``theta_v = theta_t / r``."""
    if r < 1:
        raise DomainError("ramification index must be >= 1")
    if r == 1:
        return H.renamed(variable) if variable != H.variable else H
    rows = [h.substitute_power(r).scale(Fraction(1, r ** i)).to_ring(H.ring) for i, h in enumerate(H.coeffs)]
    return _make(rows, variable, H.ring)


def inverse_variable(H: ThetaOperator) -> ThetaOperator:
    """``x -> 1/x``: ``theta -> -theta`` and ``x^e -> x^{-e}``."""
    rows = [h.substitute_power(-1).scale((-1) ** i).to_ring(H.ring) for i, h in enumerate(H.coeffs)]
    return _make(rows, H.variable, H.ring)


# ---------------------------------------------------------------------------
# Touchard / Stirling


@dataclass(frozen=True)
class TouchardPolynomial:
    degree: int
    coefficients: tuple  # s_{n,k}, k = 0..n

    def __call__(self, X):
        return sum(c * X ** k for k, c in enumerate(self.coefficients))


@lru_cache(maxsize=None)
def touchard(n: int) -> TouchardPolynomial:
    """``T_0 = 1``, ``T_n = (X + X d/dX) T_{n-1}``; coefficients are Stirling numbers of the 2nd kind."""
    if n < 0:
        raise DomainError("Touchard index must be >= 0")
    if n == 0:
        return TouchardPolynomial(0, (Fraction(1),))
    prev = touchard(n - 1).coefficients
    out = [Fraction(0)] * (n + 1)
    for k, c in enumerate(prev):
        out[k + 1] += c  # X * T
        out[k] += k * c  # X * T'
    return TouchardPolynomial(n, tuple(out))


def _rising_basis(poly):
    """Rewrite ``sum_i p_i t^i`` as ``sum_b c_b t(t+1)...(t+b-1)``.

    Uses ``t^n = sum_b (-1)^{n-b} S(n,b) t^(rising b)``.
    """
    out = [0] * len(poly)
    for n, p in enumerate(poly):
        if p == 0:
            continue
        s = touchard(n).coefficients
        for b in range(n + 1):
            if s[b]:
                out[b] = out[b] + p * ((-1) ** (n - b)) * s[b]
    return out


def borel_transform_op(H: ThetaOperator, variable="zeta") -> ThetaOperator:
    """Operator annihilating the Borel transform (critical time ``1/x``) of solutions of ``H``.

    ``H`` is rewritten over ``y = 1/x`` and ``D = x^2 d/dx`` using
    ``x^e theta(theta+1)...(theta+b-1) = y^{b-e} D^b``, after left multiplication
    by ``x^{-p}`` with the least ``p >= 0`` making every ``y`` exponent
    non-negative; then ``y -> d/dzeta`` and ``D -> zeta``.  The result is returned
    in theta_zeta form, normalised so its lowest zeta power is ``zeta^0``.
    ``meta`` records ``premultiplied_by = x^{-p}`` and the normalising power.
    """
    from .newton import newton_polygon

    if H.ring in (QU, CU):
        raise DomainError("specialize the twist symbol before Borel transforming")
    for e in H.exponents():
        if e.denominator != 1:
            raise UnsupportedLevelError("ramify the operator to integer exponents first", exponent=str(e))
    levels = [q for q, _ in newton_polygon(H, "zero").slopes if q > 0]
    if any(q != 1 for q in levels):
        raise UnsupportedLevelError("only the single level q = 1 is supported", slopes=[str(q) for q in levels])

    ring = H.ring
    words = {}  # (a, b) -> coefficient of y^a D^b before premultiplication, keyed with e
    for e in H.exponents():
        poly = [h.coeff(e) for h in H.coeffs]
        for b, c in enumerate(_rising_basis(poly)):
            if c != 0:
                words[(e, b)] = c
    p = max(0, max(int(e) - b for e, b in words))

    zero = LaurentPolynomial.zero(ring)
    d_op = ThetaOperator((zero, LaurentPolynomial.monomial(1, -1, ring=ring)), variable)
    one = identity(variable, ring)
    out = None
    d_powers = {0: one}
    for (e, b), c in sorted(words.items()):
        a = b - int(e) + p
        if a not in d_powers:
            d_powers[a] = d_op ** a
        term = (d_powers[a] * ThetaOperator.multiplication(LaurentPolynomial.monomial(1, b, ring=ring), variable)).scale(c)
        out = term if out is None else out + term
    out = out.to_ring(ring)
    low = min(e for h in out.coeffs for e in h.terms)
    out = ThetaOperator(tuple(h.shift(-low) for h in out.coeffs), variable)
    out.meta.update({"premultiplied_by": f"x^{-p}", "premultiplier_power": -p, "normalized_by": f"{variable}^{-low}"})
    return out


def derivative_form(H: ThetaOperator):
    """Coefficients ``[a_0, ..., a_n]`` (as :class:`LaurentPolynomial`) of ``sum_j a_j d^j/dvar^j``.

    Uses ``theta^i = sum_j S(i, j) var^j d^j``; a common power of the variable is
    divided out so that the lowest power present is ``var^0``.
    """
    ring = H.ring
    rows = [LaurentPolynomial.zero(ring) for _ in range(H.order + 1)]
    for i, h in enumerate(H.coeffs):
        s = touchard(i).coefficients
        for j in range(i + 1):
            if s[j]:
                rows[j] = rows[j] + h.shift(j).scale(s[j]).to_ring(ring)
    low = min(e for r in rows for e in r.terms)
    return [r.shift(-low) for r in rows]


# ---------------------------------------------------------------------------
# text syntax:  sum of  c * x^p * theta^i  terms


_TERM_SPLIT = re.compile(r"(?<![\^(*/])([+-])")
_VARS = ("x", "lambda", "lam", "zeta", "t")


def parse_operator(text: str, variable: str = "x") -> ThetaOperator:
    """Parse e.g. ``"x*theta^2 + theta - 1"`` or ``"16*theta^2 + 16*theta + x^-1*theta + 3"``."""
    src = text.replace(" ", "").replace("\t", "").replace("θ", "theta")
    if not src:
        raise ParseError("empty operator expression")
    if src[0] not in "+-":
        src = "+" + src
    pieces = _TERM_SPLIT.split(src)
    if pieces[0] != "":
        raise ParseError("unexpected leading text", text=text)
    terms = {}
    var_seen = None
    for k in range(1, len(pieces), 2):
        sign = -1 if pieces[k] == "-" else 1
        body = pieces[k + 1]
        if not body:
            raise ParseError("dangling sign", text=text)
        coeff, e, i = Fraction(sign), Fraction(0), 0
        for factor in body.split("*"):
            if not factor:
                raise ParseError("empty factor", term=body)
            base, caret, power = factor.partition("^")
            power = power.strip("()")
            if caret and not power:
                raise ParseError("missing exponent", term=body)
            if base == "theta":
                try:
                    p = int(power) if power else 1
                except ValueError as exc:
                    raise ParseError("theta powers must be integers", term=body) from exc
                if p < 0:
                    raise ParseError("negative theta power", term=body)
                i += p
            elif base in _VARS:
                if var_seen and base != var_seen:
                    raise ParseError("mixed variable names", term=body)
                var_seen = base
                try:
                    e += Fraction(power) if power else 1
                except ValueError as exc:
                    raise ParseError("bad exponent", term=body) from exc
            else:
                try:
                    coeff *= Fraction(base.strip("()"))
                except ValueError as exc:
                    raise ParseError(f"cannot parse factor {factor!r}", term=body) from exc
                if power:
                    raise ParseError("powers of numeric constants are not supported", term=body)
        key = (i, e)
        terms[key] = terms.get(key, 0) + coeff
    terms = {k: v for k, v in terms.items() if v != 0}
    if not terms:
        raise ParseError("operator is identically zero", text=text)
    return ThetaOperator.from_terms(terms, variable=variable, ring=Q)
