"""Zero-dimensional partition functions, the E_k and Airy governing operators,
governing-relation checks and the free-energy singularity lattice."""
from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, gcd

import mpmath
import numpy as np
from mpmath import mp

from .borelnum import LaplaceSum, auto_pade, borel_series, laplace_sum, stokes_jump
from .diffop import (
    ThetaOperator,
    borel_transform_op,
    conjugate_power,
    derivative_form,
    identity,
    ramify,
    twist_op,
)
from .errors import DivergentDomainError, DomainError, UnsupportedError
from .exactnum import (
    PowerSeries,
    UPoly,
    as_rational,
    is_exact,
    polynomial_roots,
    to_mp,
    working_precision,
)
from .formal import FormalBasisElement, _single_beta, formal_basis, series_solution
from .newton import (
    DeterminingData,
    NewtonPolygon,
    _exact_root,
    determining_polynomial,
    newton_polygon,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Potential:
    """``V(phi) = sum v_i phi^i`` with rational coefficients, even degree, positive top term."""

    coeffs: tuple

    def __post_init__(self):
        cs = [as_rational(c) for c in self.coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))
        deg = len(cs) - 1
        if deg < 2 or deg % 2:
            raise DomainError("potential must have even degree >= 2", degree=deg)
        if cs[-1] <= 0:
            raise DomainError("leading coefficient must be positive")

    @classmethod
    def monomial(cls, degree: int) -> "Potential":
        return cls(tuple([0] * degree + [1]))

    @classmethod
    def from_json(cls, text) -> "Potential":
        data = json.loads(text) if isinstance(text, str) else text
        return cls(tuple(Fraction(str(c)) for c in data))

    def to_json(self) -> list:
        return [str(c) for c in self.coeffs]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_even(self) -> bool:
        return all(c == 0 for c in self.coeffs[1::2])

    def __call__(self, phi):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * phi + (to_mp(c) if c else 0)
        return acc


@dataclass(frozen=True)
class MomentValue:
    j: int
    lam: object
    value: object
    error: object


def _moment(V: Potential, power: int, lam, tol, weight=None):
    """``int phi^power w(phi) e^{-phi^2/2 - lam V} dphi / sqrt(2 pi)`` and an error estimate."""
    lam = to_mp(lam)
    if mpmath.re(lam) < 0:
        raise DivergentDomainError("Re(lambda) < 0: the integral diverges", lam=str(lam))
    even = V.is_even and (weight is None or weight[1])
    if even and power % 2:
        return mpmath.mpf(0), mpmath.mpf(0)
    w = weight[0] if weight else None

    def f(phi):
        v = phi ** power * mpmath.exp(-phi * phi / 2 - lam * V(phi))
        return v * w(phi) if w else v

    # breakpoints near where the Gaussian and the potential take over
    pts = [mpmath.mpf(0), mpmath.mpf(1), mpmath.mpf(2), mpmath.mpf(4), mpmath.mpf(8), mpmath.inf]
    if even:
        val, err = mpmath.quad(f, pts, error=True)
        val, err = 2 * val, 2 * err
    else:
        neg = [-p for p in reversed(pts)]
        val, err = mpmath.quad(f, neg[:-1] + pts, error=True)
    if err > tol:
        val2, err2 = mpmath.quad(f, pts if even else neg[:-1] + pts, error=True, maxdegree=12)
        val, err = (2 * val2 if even else val2), min(err, abs((2 * val2 if even else val2) - val))
    return val / mpmath.sqrt(2 * mpmath.pi), err


def quad_moment(V: Potential, j: int, lam, tol=1e-10, prec=None) -> MomentValue:
    """Normalized moment ``Z_{2j}(lam) = <phi^{2j} e^{-lam V}>`` by double-exponential quadrature."""
    if j < 0:
        raise DomainError("moment index must be >= 0")
    with working_precision(prec):
        val, err = _moment(V, 2 * j, lam, mpmath.mpf(tol))
        if mpmath.im(to_mp(lam)) == 0 and isinstance(val, mpmath.mpc):
            val = val.real
        return MomentValue(j, to_mp(lam), +val, +err)


def gaussian_moment(m: int) -> int:
    """``<phi^m>`` for the unit Gaussian: ``(m - 1)!!`` for even ``m``, else 0."""
    if m % 2:
        return 0
    return factorial(m) // (2 ** (m // 2) * factorial(m // 2))


def asymptotic_coeffs(V: Potential, j: int, N: int):
    """Exact ``alpha_n`` of ``Z_{2j}(lam) ~ sum alpha_n lam^n``: ``<phi^{2j} (-V)^n> / n!``."""
    if N < 0:
        raise DomainError("N must be >= 0")
    out = []
    power = [Fraction(1)]  # coefficients of V^n
    for n in range(N + 1):
        s = sum(c * gaussian_moment(2 * j + i) for i, c in enumerate(power) if c)
        out.append(Fraction((-1) ** n * s, factorial(n)))
        nxt = [Fraction(0)] * (len(power) + V.degree)
        for a, ca in enumerate(power):
            if ca:
                for b, cb in enumerate(V.coeffs):
                    if cb:
                        nxt[a + b] += ca * cb
        power = nxt
    return out


# ---------------------------------------------------------------------------
# E_k


def ek_operator(k: int, variable: str = "lambda") -> ThetaOperator:
    """``prod_{j<k} (2k theta + 2j + 1) + lam^{-1} theta``."""
    if k < 1:
        raise DomainError("k must be >= 1")
    th = ThetaOperator.theta(variable)
    one = identity(variable)
    H = one
    for j in range(k):
        H = H * (th.scale(2 * k) + one.scale(2 * j + 1))
    return H + ThetaOperator.from_terms({(1, -1): 1}, variable=variable)


@dataclass(frozen=True)
class EkModel:
    k: int
    operator_lambda: ThetaOperator
    operator_x: ThetaOperator
    m: Fraction
    polygon_lambda: NewtonPolygon
    polygon_x: NewtonPolygon
    determining: DeterminingData = None
    roots: tuple = ()
    basis: tuple = ()
    order: int = 60

    @property
    def ramification(self) -> int:
        return max(self.k - 1, 1)

    def lambda_series(self, N=None) -> PowerSeries:
        """``Z_0`` as a series in ``lam``."""
        return series_solution(self.operator_lambda, 0, self.order if N is None else N)


def build_Ek(k: int, order: int = 60, prec=None) -> EkModel:
    """Operator ``(E_k)`` in ``lam``, its ramified form in ``x = lam^{1/(k-1)}`` and the formal basis."""
    H = ek_operator(k)
    poly_l = newton_polygon(H, "zero")
    if k == 1:
        basis = (FormalBasisElement(Fraction(0), Fraction(0), Fraction(0), series_solution(H, 0, order), 0, H),)
        return EkModel(k, H, H.renamed("x"), Fraction(0), poly_l, newton_polygon(H), None, (Fraction(0),), basis, order)
    Hx = ramify(H, k - 1, "x")
    with working_precision(prec):
        det = determining_polynomial(Hx, 1, prec)
        basis = tuple(formal_basis(Hx, order, prec))
    return EkModel(
        k,
        H,
        Hx,
        Fraction(1, k - 1),
        poly_l,
        newton_polygon(Hx, "zero"),
        det,
        (Fraction(0),) + tuple(det.nonzero_roots),
        basis,
        order,
    )


def critical_series(model: EkModel, N=None) -> PowerSeries:
    """``Z_0`` in the critical variable ``x = lam^{1/(k-1)}`` (ramification one)."""
    N = model.order if N is None else N
    if model.k == 2:
        return series_solution(model.operator_x, 0, N)
    return model.lambda_series(N).ramify(model.k - 1).truncate(N + 1)


def moment_pade(k: int, j: int = 0, N: int = 60, orders=None, prec=None):
    """Pade table entry for the Borel minor of ``Z_{2j}`` (``V = phi^{2k}``) in the
    critical variable ``x = lam^{1/(k-1)}``."""
    if k < 2:
        raise UnsupportedError("k = 1 gives a convergent series; nothing to resum")
    with working_precision(prec):
        f = PowerSeries(Fraction(0), 1, tuple(asymptotic_coeffs(Potential.monomial(2 * k), j, N)))
        if k > 2:
            f = f.ramify(k - 1).truncate(N + 1)
        return auto_pade(borel_series(f), orders)


def laplace_at_lambda(pade, k: int, lam, prec=None) -> LaplaceSum:
    """Directional (angle 0) Laplace sum evaluated at ``z = lam^{-1/(k-1)}``."""
    with working_precision(prec):
        return laplace_sum(pade, 1 / mpmath.root(to_mp(lam), k - 1), 0)


def resum_partition(model: EkModel, lam, N=None, orders=None, prec=None) -> LaplaceSum:
    """Borel-Pade-Laplace sum of ``Z_0`` at ``lam`` (direction 0 in the critical plane)."""
    if model.k < 2:
        raise UnsupportedError("k = 1 gives a convergent series; nothing to resum")
    with working_precision(prec):
        pade = auto_pade(borel_series(critical_series(model, N)), orders)
        return laplace_at_lambda(pade, model.k, lam)


def e2_stokes_constant(model: EkModel, radii=(8, 16, 32), N=None, orders=None, prec=None):
    """Lateral jump of ``Z_0`` across the negative axis in the Borel plane of ``z = 1/lam``,
    normalized by ``e^{u_1 z}`` times the resummed second basis series."""
    if model.k != 2:
        raise UnsupportedError("Stokes normalization implemented for k = 2")
    N = model.order if N is None else N
    with working_precision(prec):
        b0 = borel_series(model.basis[0].series.truncate(N + 1))
        b1 = borel_series(model.basis[1].series.truncate(N + 1))
        pade1 = auto_pade(b1, orders)
        u1 = to_mp(model.basis[1].u)

        def prefactor(z):
            return laplace_sum(pade1, z, mpmath.pi).value

        return stokes_jump(b0, mpmath.pi, radii, omega=-u1, prefactor=prefactor, orders=orders)


# ---------------------------------------------------------------------------
# governing relations


@dataclass(frozen=True)
class GoverningReport:
    lam: object
    rec1: tuple  # (j, weighted-quadrature residual, finite-difference residual)
    rec2: tuple  # (j, residual)

    @property
    def max_residual(self):
        vals = [r for _, a, b in self.rec1 for r in (a, b)] + [r for _, r in self.rec2]
        return max(vals, default=0.0)


def verify_governing(V: Potential, jmax: int, lam, tol=1e-10, prec=None) -> GoverningReport:
    """Residuals of ``Z'_j = -sum v_i Z_{j+i}`` and
    ``(j+1) Z_j = Z_{j+2} + lam sum i v_i Z_{i+j}`` with ``Z_j = <phi^j e^{-lam V}>``."""
    with working_precision(prec):
        lam = to_mp(lam)
        tol = mpmath.mpf(tol)
        cache = {}

        def Z(p, at=lam):
            key = (p, at)
            if key not in cache:
                cache[key] = _moment(V, p, at, tol)[0]
            return cache[key]

        h = mpmath.mpf(10) ** (-(mp.dps // 4))
        rec1, rec2 = [], []
        for j in range(jmax + 1):
            rhs = -mpmath.fsum(v * Z(j + i) for i, v in enumerate(V.coeffs) if v)
            weighted = _moment(V, j, lam, tol, weight=(lambda phi: -V(phi), True))[0]
            if mpmath.re(lam) >= h:
                fd = (_moment(V, j, lam + h, tol)[0] - _moment(V, j, lam - h, tol)[0]) / (2 * h)
            else:  # one-sided second-order stencil at the edge of the domain
                f0, f1, f2 = (_moment(V, j, lam + i * h, tol)[0] for i in range(3))
                fd = (-3 * f0 + 4 * f1 - f2) / (2 * h)
            rec1.append((j, float(abs(weighted - rhs)), float(abs(fd - rhs))))
            lhs = (j + 1) * Z(j)
            r = Z(j + 2) + lam * mpmath.fsum(i * v * Z(i + j) for i, v in enumerate(V.coeffs) if v and i)
            rec2.append((j, float(abs(lhs - r))))
        return GoverningReport(lam, tuple(rec1), tuple(rec2))


# ---------------------------------------------------------------------------
# free-energy singularity lattice


def _phi(n: int) -> int:
    return sum(1 for i in range(1, n + 1) if gcd(i, n) == 1)


@dataclass(frozen=True)
class LatticeVerdict:
    k: int
    generators: tuple
    discrete: bool
    rotation_order: int
    witness_ratio: float  # smallest nonzero |word| / |u_1| found by the bounded search
    witness_found: bool  # ratio < 1e-3, i.e. numerical evidence of density


def singularity_discreteness(k: int, depth: int = 12, max_rank: int = 4, prec=None) -> LatticeVerdict:
    """Is the additive group generated by the nonzero roots of ``P_k`` a lattice?

    The roots are ``u_1`` times the ``(k-1)``-th roots of unity, so the group is
    ``u_1 Z[zeta_{k-1}]``; it is discrete iff that ring has rank <= 2, i.e. the
    rotation order ``k-1`` is 1, 2, 3, 4 or 6.
    """
    if k <= 2:
        raise DomainError("k must be > 2")
    n = k - 1
    m = Fraction(1, n)
    with working_precision(prec):
        c = (-1) ** k * m / (2 * k * m) ** k
        base = mpmath.root(to_mp(c), n)
        gens = tuple(base * mpmath.expjpi(mpmath.mpf(2 * j) / n) for j in range(n))
    discrete = n in (1, 2, 3, 4, 6)
    # Z-basis of Z[zeta_n]: first phi(n) powers; enumerate words with |coeffs|_1 <= depth
    rank = min(_phi(n), max_rank)
    vecs = np.array([complex(g / gens[0]) for g in gens[:rank]])
    best = np.inf
    rng = range(-depth, depth + 1)
    for coeffs in itertools.product(rng, repeat=rank):
        if 0 < sum(abs(a) for a in coeffs) <= depth:
            val = abs(np.dot(coeffs, vecs))
            if 1e-12 < val < best:
                best = val
    return LatticeVerdict(k, gens, discrete, n, float(best), bool(best < 1e-3))


# ---------------------------------------------------------------------------
# Airy


def airy_operator(q, variable: str = "lambda") -> ThetaOperator:
    """``(3 theta + 2)(3 theta + 1) - q^3 lam^{-1}``."""
    th = ThetaOperator.theta(variable)
    one = identity(variable)
    q3 = q ** 3
    ring = "Q" if is_exact(q) else "C"
    H = (th.scale(3) + one.scale(2)) * (th.scale(3) + one)
    return H.to_ring(ring) - ThetaOperator.from_terms({(0, -1): q3}, variable=variable, ring=ring)


def _exact_three_halves(q):
    """``q^{3/2}`` when ``q`` is the square of a positive rational, else ``None``."""
    if not is_exact(q) or q <= 0:
        return None
    s = _exact_root(Fraction(q), 2)
    return None if s is None else s ** 3


@dataclass(frozen=True)
class AiryBranch:
    u: object
    beta: Fraction
    twisted: ThetaOperator
    series: PowerSeries
    borel_operator: ThetaOperator
    leading_zeros: tuple  # zeros of the top d/dzeta coefficient


@dataclass(frozen=True)
class AiryModel:
    q: object
    operator_lambda: ThetaOperator
    operator_x: ThetaOperator
    u_plus: object
    u_minus: object
    beta: Fraction
    branches: tuple = field(default=())


def build_airy(q, order: int = 30, prec=None) -> AiryModel:
    """Governing operator of the Airy partition function and its two twisted branches.

    ``u_+ = (2/3) q^{3/2}`` on the principal branch; exact when ``q`` is a rational square.
    """
    q = as_rational(q) if is_exact(q) or isinstance(q, (int, str)) else to_mp(q)
    if q == 0:
        raise UnsupportedError("q = 0 changes the Newton polygon shape")
    with working_precision(prec):
        H = airy_operator(q)
        Hx = ramify(H, 2, "x").scale(4)
        t = _exact_three_halves(q)
        up = Fraction(2, 3) * t if t is not None else mpmath.mpc(2) / 3 * mpmath.power(to_mp(q), mpmath.mpf(3) / 2)
        branches = []
        for u in (up, -up):
            Hu = twist_op(Hx, 1, u) if is_exact(u) else twist_op(Hx, 1).specialize(u)
            Hu = Hu.chop()
            beta = _single_beta(Hu)
            series = series_solution(Hu, beta, order)
            G = conjugate_power(Hu, beta).chop()
            B = borel_transform_op(G)
            lead = derivative_form(B)[-1]
            lp = UPoly(tuple(lead.coeff(e) for e in range(0, int(lead.degree()) + 1)))
            zeros = tuple(sorted(polynomial_roots(lp), key=lambda z: abs(to_mp(z))))
            branches.append(AiryBranch(u, beta, Hu, series, B, zeros))
    betas = {b.beta for b in branches}
    return AiryModel(q, H, Hx, up, -up, branches[0].beta if len(betas) == 1 else None, tuple(branches))
