"""Formal series solutions, exponential-series bases and Gevrey growth fits."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import mpmath
import numpy as np

from .diffop import ThetaOperator, conjugate_power, twist_op
from .errors import DomainError, InsufficientDataError, ResonanceError, ShapeError
from .exactnum import (
    CU,
    QU,
    PowerSeries,
    _rational_from_mp,
    chop_scalar,
    is_exact,
    series_log,
    to_mp,
    working_precision,
)
from .newton import determining_polynomial, indicial_polynomial, newton_polygon


def _is_null(c) -> bool:
    if is_exact(c):
        return c == 0
    return chop_scalar(c) == 0


def series_solution(H: ThetaOperator, beta, N: int) -> PowerSeries:
    """Solution ``x^beta (1 + a_1 x^{1/r} + ...)`` of ``H f = 0`` through index ``N``.

    Collecting the coefficient of ``x^{d + n/r}`` (``d`` the lowest exponent of
    the conjugated operator) gives the triangular recurrence
    ``c_d(n/r) a_n = -sum_{e > d} c_e((n - k_e)/r) a_{n - k_e}`` with
    ``c_e(s) = sum_i H_{i,e} s^i`` and ``k_e = (e - d) r``.
    """
    if H.ring in (QU, CU):
        raise DomainError("specialize the twist symbol before solving")
    beta = Fraction(beta)
    G = conjugate_power(H, beta)
    exps = G.exponents()
    d = exps[0]
    r = lcm(*[(e - d).denominator for e in exps])
    polys = {e: [h.coeff(e) for h in G.coeffs] for e in exps}

    def c(e, s):
        acc = 0
        for p in reversed(polys[e]):
            acc = acc * s + p
        return acc

    if not _is_null(c(d, Fraction(0))):
        raise DomainError("beta is not a root of the indicial polynomial", beta=str(beta))
    offsets = [(e, int((e - d) * r)) for e in exps[1:]]
    exact = H.ring == "Q"
    one = Fraction(1) if exact else mpmath.mpc(1)
    a = [one]
    for n in range(1, N + 1):
        pivot = c(d, Fraction(n, r))
        if _is_null(pivot):
            raise ResonanceError("recurrence pivot vanishes", index=n, beta=str(beta))
        acc = 0
        for e, k in offsets:
            if k > n:
                continue
            prev = a[n - k]
            if prev == 0:
                continue
            acc = acc + c(e, Fraction(n - k, r)) * prev
        a.append(-acc / pivot if acc != 0 else (Fraction(0) if exact else mpmath.mpc(0)))
    return PowerSeries(beta, r, tuple(a))


@dataclass(frozen=True)
class FormalBasisElement:
    """``x^beta e^{u / x^q} series``; ``operator`` annihilates ``x^beta * series``."""

    u: object
    q: Fraction
    beta: Fraction
    series: PowerSeries
    label: int
    operator: ThetaOperator

    def summary(self) -> dict:
        def enc(v):
            if is_exact(v):
                return str(Fraction(v))
            v = mpmath.mpc(v)
            return [mpmath.nstr(v.real, 25), mpmath.nstr(v.imag, 25)]

        return {
            "label": self.label,
            "u": enc(self.u),
            "q": str(self.q),
            "beta": str(self.beta),
            "leading": [enc(c) for c in self.series.coeffs[:4]],
        }


def _single_level_shape(H: ThetaOperator):
    poly = newton_polygon(H, "zero")
    if not poly.slopes or poly.slopes[0] != (0, 1):
        raise ShapeError("expected a horizontal slope of length one", slopes=[(str(q), l) for q, l in poly.slopes])
    positive = poly.slopes[1:]
    if len(positive) != 1:
        raise ShapeError("expected exactly one positive slope", slopes=[(str(q), l) for q, l in poly.slopes])
    return poly, positive[0][0]


def _single_beta(H: ThetaOperator) -> Fraction:
    """The unique indicial root, recognized as a small-denominator rational when numeric."""
    roots = indicial_polynomial(H).roots
    beta = None
    if len(roots) == 1:
        beta = roots[0] if is_exact(roots[0]) else _recognize_rational(roots[0])
    if beta is None:
        raise ShapeError("indicial equation must have a single rational root", roots=[str(r) for r in roots])
    return Fraction(beta)


def _recognize_rational(z, max_den=1000):
    z = to_mp(z)
    if chop_scalar(mpmath.im(z)) != 0:
        return None
    guess = _rational_from_mp(mpmath.re(z), max_den)
    return guess if chop_scalar(mpmath.re(z) - to_mp(guess)) == 0 else None


def formal_basis(H: ThetaOperator, N: int, prec=None):
    """Basis ``y_0, e^{u_1/x^q} y_1, ...`` from the three-step Newton polygon procedure."""
    with working_precision(prec):
        _, q = _single_level_shape(H)
        beta0 = _single_beta(H)
        basis = [FormalBasisElement(Fraction(0), q, beta0, series_solution(H, beta0, N), 0, H)]
        det = determining_polynomial(H, q, prec)
        for i, u in enumerate(det.nonzero_roots, start=1):
            Hu = twist_op(H, q, u) if is_exact(u) else twist_op(H, q).specialize(u)
            Hu = Hu.chop()
            try:
                _single_level_shape(Hu)
            except ShapeError as exc:
                raise ShapeError(f"twisted operator at u = {u}: {exc}", u=str(u), **exc.detail) from exc
            beta = _single_beta(Hu)
            basis.append(FormalBasisElement(u, q, beta, series_solution(Hu, beta, N), i, Hu))
    return basis


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GevreyEstimate:
    s: float
    A: float
    fit_window: tuple
    residual: float


def gevrey_estimate(f: PowerSeries, window=0.6, min_terms=20) -> GevreyEstimate:
    """Fit ``log|a_n| = s log(n!) + n log A + b log n + c`` over the last ``window`` fraction of nonzero terms.

    The ``b log n`` column absorbs the power-law prefactor ``n^b`` that is generic
    for resurgent series; without it the fitted ``A`` drifts by several percent.
    """
    idx = [n for n, c in enumerate(f.coeffs) if c != 0]
    if len(idx) < min_terms:
        raise InsufficientDataError("too few nonzero coefficients for a Gevrey fit", available=len(idx), needed=min_terms)
    start = int(round(len(idx) * (1 - window)))
    use = idx[start:]
    with working_precision(64):
        logs = np.array([float(mpmath.log(abs(to_mp(f.coeffs[n])))) for n in use])
        lg = np.array([float(mpmath.loggamma(n + 1)) for n in use])
    ns = np.array(use, dtype=float)
    design = np.column_stack([lg, ns, np.log(ns), np.ones(len(use))])
    sol, *_ = np.linalg.lstsq(design, logs, rcond=None)
    resid = float(np.sqrt(np.mean((design @ sol - logs) ** 2)))
    s = max(float(sol[0]), 0.0)
    return GevreyEstimate(s, float(np.exp(sol[1])), (use[0], use[-1]), resid)


def free_energy_series(Z: PowerSeries, N: int) -> PowerSeries:
    """``log Z`` to order ``N`` for ``Z = 1 + ...``."""
    return series_log(Z.truncate(N))
