"""Numerical Borel plane: Borel coefficients, Pade continuation, directional
Laplace sums and lateral Stokes jumps, all at >= 256-bit precision."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import factorial

import mpmath
import numpy as np
from mpmath import mp

from .errors import (
    DegeneratePadeError,
    DomainError,
    NonconvergentLaplaceError,
    RayHitsPoleError,
)
from .exactnum import PowerSeries, to_mp, working_precision

log = logging.getLogger(__name__)

STABILITY_RTOL = mpmath.mpf("1e-3")
FROISSART_TOL = mpmath.mpf("1e-6")
UNSTABLE_SPREAD = 1e-3


@dataclass(frozen=True)
class BorelSeries:
    """Minor ``sum c_n zeta^n`` of ``f(z) = sum b_j z^{-j}``, ``c_n = b_{n+1} / n!``.

    ``removed`` holds the terms ``(j, b_j)`` with ``j <= 0`` (a polynomial in
    ``z``) stripped before the transform; they are restored by Laplace sums.
    """

    coeffs: tuple
    shift: int
    source_ramification: int = 1
    removed: tuple = ()

    def __len__(self):
        return len(self.coeffs)

    def truncate(self, n: int) -> "BorelSeries":
        return BorelSeries(self.coeffs[:n], self.shift, self.source_ramification, self.removed)

    def polynomial_part(self, z):
        z = to_mp(z)
        return mpmath.fsum(to_mp(b) * z ** (-j) for j, b in self.removed)


def borel_series(f: PowerSeries, prec=None) -> BorelSeries:
    """Borel transform with respect to ``z = 1/x`` of ``f = x^beta sum a_n x^n``."""
    if f.ramification != 1:
        raise DomainError("rewrite the series in its critical variable (ramification 1) first")
    if f.beta.denominator != 1:
        raise DomainError("Borel transform needs an integer leading exponent", beta=str(f.beta))
    beta = int(f.beta)
    removed, coeffs = [], []
    with working_precision(prec):
        for n, a in enumerate(f.coeffs):
            j = beta + n  # exponent of x
            if j <= 0:
                if a != 0:
                    removed.append((j, a))
                continue
            coeffs.append(to_mp(a) / factorial(j - 1))
        # leading zeros when beta >= 2
        coeffs = [mpmath.mpc(0)] * max(0, beta - 1) + coeffs
    shift = max(0, min(1 - beta, len(f.coeffs)))
    return BorelSeries(tuple(coeffs), shift, 1, tuple(removed))


# ---------------------------------------------------------------------------
# Pade


@dataclass(frozen=True)
class Pole:
    location: mpmath.mpc
    stable: bool
    residue: mpmath.mpc = None


@dataclass(frozen=True)
class PadeApproximant:
    numerator: tuple  # increasing powers of zeta
    denominator: tuple  # denominator[0] == 1
    orders: tuple
    poles: tuple
    source: BorelSeries = field(repr=False, default=None)

    def __call__(self, zeta):
        zeta = to_mp(zeta)
        return _horner(self.numerator, zeta) / _horner(self.denominator, zeta)

    @property
    def stable_poles(self):
        return tuple(p for p in self.poles if p.stable)

    def to_json(self) -> list:
        return [
            [mpmath.nstr(p.location.real, 20), mpmath.nstr(p.location.imag, 20), p.stable]
            for p in self.poles
        ]


def _horner(cs, z):
    acc = mpmath.mpc(0)
    for c in reversed(cs):
        acc = acc * z + c
    return acc


def _trim(cs, eps):
    cs = list(cs)
    scale = max((abs(c) for c in cs), default=mpmath.mpf(0))
    while len(cs) > 1 and abs(cs[-1]) <= eps * scale:
        cs.pop()
    return cs


def _seeds(hi):
    """Double-precision starting points; a circle when the dynamic range overflows."""
    n = len(hi) - 1
    try:
        with np.errstate(all="raise"):
            z = np.roots(np.array([complex(c / hi[0]) for c in hi]))
        if len(z) == n and np.all(np.isfinite(z)):
            return [mpmath.mpc(complex(w)) for w in z]
    except (FloatingPointError, OverflowError, np.linalg.LinAlgError):
        pass
    rad = abs(hi[-1] / hi[0]) ** (mpmath.mpf(1) / n)
    return [rad * mpmath.expj(2 * mpmath.pi * (i + 0.25) / n) for i in range(n)]


def _aberth(hi, maxiter=60):
    """Simultaneous Aberth-Ehrlich refinement; ``None`` when it stalls."""
    n = len(hi) - 1
    z = _seeds(hi)
    tol = mpmath.ldexp(1, -(mp.prec * 3) // 4)
    for _ in range(maxiter):
        moved = False
        for i in range(n):
            pv, dv = mpmath.polyval(hi, z[i], derivative=True)
            if pv == 0:
                continue
            w = pv / dv
            s = mpmath.fsum(1 / (z[i] - z[j]) for j in range(n) if j != i)
            step = w / (1 - w * s)
            z[i] -= step
            if abs(step) > tol * max(1, abs(z[i])):
                moved = True
        if not moved:
            return z
    return None


def _roots(cs):
    """Roots of ``sum cs[i] zeta^i``."""
    cs = _trim(cs, mpmath.ldexp(1, -(mp.prec * 3) // 4))
    if len(cs) <= 1:
        return []
    hi = list(reversed(cs))
    if len(hi) == 2:
        return [mpmath.mpc(-hi[1] / hi[0])]
    rs = _aberth(hi)
    if rs is None:
        try:
            rs = mpmath.polyroots(hi, maxsteps=600, extraprec=2 * mp.prec)
        except mpmath.libmp.libhyper.NoConvergence:
            n = len(hi) - 1
            comp = mpmath.zeros(n, n)
            for i in range(1, n):
                comp[i, i - 1] = 1
            for i in range(n):
                comp[i, n - 1] = -hi[n - i] / hi[0]
            rs = mpmath.eig(comp, left=False, right=False)
    return [mpmath.mpc(r) for r in rs]


def _pade_coeffs(c, L, M):
    """Solve for ``q`` (``q_0 = 1``) and ``p`` with ``q * c - p = O(zeta^{L+M+1})``."""
    if M == 0:
        return list(c[: L + 1]), [mpmath.mpc(1)]
    A = mpmath.matrix(M, M)
    rhs = mpmath.matrix(M, 1)
    for i in range(M):
        row = L + 1 + i
        for j in range(1, M + 1):
            k = row - j
            A[i, j - 1] = c[k] if k >= 0 else 0
        rhs[i] = -c[row]
    try:
        sol = mpmath.lu_solve(A, rhs)
    except ZeroDivisionError as exc:
        raise DegeneratePadeError("singular Pade system; try different (L, M)", L=L, M=M) from exc
    q = [mpmath.mpc(1)] + [sol[i] for i in range(M)]
    if any(mpmath.isnan(x) or mpmath.isinf(x) for x in q):
        raise DegeneratePadeError("singular Pade system; try different (L, M)", L=L, M=M)
    p = []
    for i in range(L + 1):
        p.append(mpmath.fsum(q[j] * c[i - j] for j in range(0, min(i, M) + 1)))
    return p, q


def _pade_reduced(c, L, M):
    """Step down the diagonal from ``(L, M)`` until the system is regular."""
    while True:
        try:
            return _pade_coeffs(c, L, M), (L, M)
        except DegeneratePadeError:
            if L == 0 or M == 0:
                raise
            L, M = L - 1, M - 1


def _raw_poles(p, q):
    poles = _roots(q)
    zeros = _roots(p)
    out = []
    for z in poles:
        if any(abs(z - w) <= FROISSART_TOL * max(1, abs(z)) for w in zeros):
            continue  # Froissart doublet
        out.append(z)
    return out


def pade_approximant(b: BorelSeries, L: int, M: int, prec=None, check_stability=True) -> PadeApproximant:
    """``[L/M]`` Pade approximant of the minor; poles flagged stable when matched
    (relative distance < 1e-3) at every neighbouring order ``(L+-2, M+-2)`` that the
    available coefficients allow."""
    n = len(b.coeffs)
    if L < 0 or M < 0 or L + M + 1 > n:
        raise DomainError("Pade orders need L + M + 1 <= available coefficients", L=L, M=M, available=n)
    with working_precision(prec):
        c = [to_mp(x) for x in b.coeffs]
        if all(x == 0 for x in c[: L + M + 1]):
            return PadeApproximant((mpmath.mpc(0),), (mpmath.mpc(1),), (L, M), (), b)
        p, q = _pade_coeffs(c, L, M)
        locs = _raw_poles(p, q)
        neighbours = []
        if check_stability:
            for dl in (-2, 2):
                L2, M2 = L + dl, M + dl
                if L2 < 0 or M2 < 1 or L2 + M2 + 1 > n:
                    continue  # a pole-free neighbour cannot confirm anything
                try:
                    (p2, q2), _ = _pade_reduced(c, L2, M2)
                except DegeneratePadeError:
                    continue
                neighbours.append(_raw_poles(p2, q2))
        poles = []
        for z in sorted(locs, key=lambda z: (float(abs(z)), float(mpmath.arg(z)))):
            stable = bool(neighbours) and all(
                any(abs(z - w) < STABILITY_RTOL * abs(z) for w in ws) for ws in neighbours
            )
            dq = _horner([i * qi for i, qi in enumerate(q)][1:], z)
            res = _horner(p, z) / dq if dq != 0 else None
            poles.append(Pole(z, stable, res))
    return PadeApproximant(tuple(p), tuple(q), (L, M), tuple(poles), b)


def auto_pade(b: BorelSeries, orders=None, prec=None) -> PadeApproximant:
    """Pade at ``orders`` (default: near-diagonal using every coefficient), stepping
    down the diagonal when the table is degenerate (exactly rational minors)."""
    L, M = orders or default_orders(len(b))
    while True:
        try:
            return pade_approximant(b, L, M, prec=prec)
        except DegeneratePadeError:
            if L == 0 or M == 0:
                raise
            L, M = L - 1, M - 1


def default_orders(n: int):
    """Diagonal-ish ``(L, M)`` with ``L + M + 1 = n``, ``M = L + 1`` when possible."""
    M = n // 2
    L = n - 1 - M
    return L, M


# ---------------------------------------------------------------------------
# Laplace


@dataclass(frozen=True)
class LaplaceSum:
    z: mpmath.mpc
    theta: mpmath.mpf
    value: mpmath.mpc
    error: mpmath.mpf

    def to_json(self) -> dict:
        return {
            "z": [mpmath.nstr(self.z.real, 20), mpmath.nstr(self.z.imag, 20)],
            "theta": mpmath.nstr(self.theta, 20),
            "value": [mpmath.nstr(self.value.real, 30), mpmath.nstr(self.value.imag, 30)],
            "err": mpmath.nstr(self.error, 5),
        }


def _ray_distance(w, theta):
    """Distance from ``w`` to the ray ``t e^{i theta}``, ``t >= 0``; and projection ``t``."""
    rot = w * mpmath.expj(-theta)
    t = mpmath.re(rot)
    if t <= 0:
        return abs(w), mpmath.mpf(0)
    return abs(mpmath.im(rot)), t


def laplace_sum(p: PadeApproximant, z, theta=0, tol=None, delta=mpmath.mpf("1e-3"), prec=None) -> LaplaceSum:
    """``int_0^{e^{i theta} inf} e^{-z zeta} p(zeta) d zeta`` plus the removed polynomial part."""
    with working_precision(prec):
        z = to_mp(z)
        theta = mpmath.mpf(theta)
        tol = mpmath.mpf(10) ** (-(mp.dps * 2) // 3) if tol is None else mpmath.mpf(tol)
        direction = mpmath.expj(theta)
        kappa = mpmath.re(z * direction)
        if kappa <= 0:
            raise NonconvergentLaplaceError("Re(z e^{i theta}) must be positive", z=str(z), theta=str(theta))
        breaks = []
        for pole in p.poles:
            dist, t = _ray_distance(pole.location, theta)
            if pole.stable and dist < delta:
                raise RayHitsPoleError("integration ray passes through a stable pole", pole=str(pole.location))
            if t > 0 and dist < mpmath.mpf("0.25") * t:
                breaks.append(t)

        def integrand(t):
            zeta = t * direction
            return mpmath.exp(-z * zeta) * p(zeta) * direction

        # tail: |p| grows at most like t^(deg p - deg q) beyond the poles
        growth = max(0, len(p.numerator) - len(p.denominator))
        T = max([mpmath.mpf(1) / kappa] + [2 * t for t in breaks])
        while True:
            bound = abs(p(T * direction)) * mpmath.exp(-kappa * T) / kappa * (1 + growth)
            if bound < tol / 10 and T > max(breaks, default=0):
                break
            T *= 2
        pts = [mpmath.mpf(0)] + sorted(b for b in set(breaks) if b < T) + [T]
        # split long stretches so the DE rule resolves the exponential decay
        fine = [pts[0]]
        for a, b_ in zip(pts, pts[1:]):
            k = max(1, int(mpmath.ceil((b_ - a) * kappa / 8)))
            fine.extend(a + (b_ - a) * i / k for i in range(1, k + 1))
        val, err = mpmath.quad(integrand, fine, error=True)
        value = val + (p.source.polynomial_part(z) if p.source is not None else 0)
        return LaplaceSum(z, theta, mpmath.mpc(value), mpmath.mpf(err) + bound)


# ---------------------------------------------------------------------------
# Stokes


@dataclass(frozen=True)
class StokesEstimate:
    direction: mpmath.mpf
    omega: object
    jump_samples: tuple  # ((z, jump), ...)
    constant: mpmath.mpc
    spread: float
    epsilon: mpmath.mpf
    status: str = "ok"

    def to_json(self) -> dict:
        om = None if self.omega is None else [mpmath.nstr(mpmath.re(self.omega), 20), mpmath.nstr(mpmath.im(self.omega), 20)]
        return {
            "omega": om,
            "A": [mpmath.nstr(self.constant.real, 20), mpmath.nstr(self.constant.imag, 20)],
            "spread": self.spread,
            "status": self.status,
            "theta": mpmath.nstr(self.direction, 20),
        }


def _clusters(roots):
    """Group numerically coincident roots (multiple poles resolve only to ~sqrt(eps))."""
    tol = mpmath.ldexp(1, -mp.prec // 3)
    groups = []
    for w in roots:
        for g in groups:
            if abs(w - g[0]) <= tol * max(1, abs(w)):
                g.append(w)
                break
        else:
            groups.append([w])
    return groups


def _wedge_residues(pade, z, lo, hi, nodes=128):
    """``2 pi i sum Res e^{-z zeta} p(zeta)`` over poles with ``lo < arg < hi`` (mod 2 pi).

    Simple poles use ``P / Q'``; clusters use the trapezoidal rule on a small circle.
    """
    q = pade.denominator
    dq = [i * c for i, c in enumerate(q)][1:]
    mid, half = (lo + hi) / 2, (hi - lo) / 2
    groups = _clusters(_roots(q))
    centers = [mpmath.fsum(g) / len(g) for g in groups]
    acc = mpmath.mpc(0)
    for g, c in zip(groups, centers):
        if c == 0 or _angle_diff(mpmath.arg(c), mid) >= half:
            continue
        if len(g) == 1:
            acc += mpmath.exp(-z * c) * _horner(pade.numerator, c) / _horner(dq, c)
            continue
        gap = min([abs(c - d) for d in centers if d is not c] + [abs(c)])
        r = gap / 4
        tot = mpmath.mpc(0)
        for k in range(nodes):
            e = mpmath.expjpi(mpmath.mpf(2 * k) / nodes)
            zeta = c + r * e
            tot += mpmath.exp(-z * zeta) * pade(zeta) * r * e
        acc += tot / nodes
    return 2j * mpmath.pi * acc


def _angle_diff(a, b):
    d = (a - b + mpmath.pi) % (2 * mpmath.pi) - mpmath.pi
    return abs(d)


def stokes_jump(
    source,
    theta_sing,
    z_samples,
    omega=None,
    prefactor=None,
    orders=None,
    prec=None,
    method="residue",
) -> StokesEstimate:
    """Lateral difference ``L_{theta-eps} - L_{theta+eps}`` at ``z = rho e^{-i theta}``.

    ``z_samples`` are radii ``rho`` along the bisector of the common half-plane.
    The constant is ``jump / (e^{-omega z} prefactor(z))``, with ``omega`` the
    nearest stable pole on the singular ray unless given; ``prefactor`` is the sum
    of the series attached to ``omega`` (default 1).  Without a singularity on the
    ray the raw jump is reported.

    ``method="residue"`` evaluates the difference of the two ray integrals by
    closing the wedge between them: for the rational continuation this equals
    ``2 pi i`` times the residues of ``e^{-z zeta} p(zeta)`` inside it.
    ``method="quadrature"`` integrates both rays numerically instead.
    """
    if method not in ("residue", "quadrature"):
        raise ValueError("method must be 'residue' or 'quadrature'")
    with working_precision(prec):
        theta = mpmath.mpf(theta_sing)
        if isinstance(source, BorelSeries):
            pade = auto_pade(source, orders)
        else:
            pade = source
        on_ray = [pl for pl in pade.stable_poles if _angle_diff(mpmath.arg(pl.location), theta) < mpmath.mpf("1e-6")]
        if omega is None and on_ray:
            omega = min(on_ray, key=lambda pl: abs(pl.location)).location
        others = [
            _angle_diff(mpmath.arg(pl.location), theta)
            for pl in pade.poles
            if _angle_diff(mpmath.arg(pl.location), theta) >= mpmath.mpf("1e-6")
        ]
        eps = min([mpmath.mpf("1e-2")] + [a / 2 for a in others])
        samples, constants = [], []
        for rho in z_samples:
            z = mpmath.re(to_mp(rho)) * mpmath.expj(-theta)
            if method == "residue":
                jump = _wedge_residues(pade, z, theta - eps, theta + eps)
            else:
                above = laplace_sum(pade, z, theta - eps, delta=mpmath.mpf(0))
                below = laplace_sum(pade, z, theta + eps, delta=mpmath.mpf(0))
                jump = above.value - below.value
            samples.append((z, jump))
            if omega is None:
                constants.append(jump)
            else:
                norm = mpmath.exp(-to_mp(omega) * z) * (to_mp(prefactor(z)) if prefactor else 1)
                constants.append(jump / norm)
        spread = 0.0
        for i in range(len(constants)):
            for j in range(i + 1, len(constants)):
                scale = max(abs(constants[i]), abs(constants[j]))
                if scale > 0:
                    spread = max(spread, float(abs(constants[i] - constants[j]) / scale))
        constant = mpmath.fsum(constants) / len(constants)
        status = "ok"
        if omega is not None and spread > UNSTABLE_SPREAD:
            status = "unstable"
            log.warning("Stokes constant spread %.3g exceeds %.0e", spread, UNSTABLE_SPREAD)
        return StokesEstimate(theta, omega, tuple(samples), mpmath.mpc(constant), spread, eps, status)
