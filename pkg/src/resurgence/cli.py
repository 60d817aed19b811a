"""``resurgence`` command line: analyze, partition, resum, airy.  Reports are JSON."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import mpmath
from mpmath import mp

from .borelnum import auto_pade, borel_series, laplace_sum, stokes_jump
from .config import PartitionGrid, RunConfig
from .diffop import borel_transform_op, derivative_form, format_operator, parse_operator
from .errors import ResurgenceError
from .exactnum import (
    PowerSeries,
    format_laurent,
    format_poly,
    is_exact,
    to_mp,
    working_precision,
)
from .formal import formal_basis, gevrey_estimate
from .models import (
    Potential,
    asymptotic_coeffs,
    build_airy,
    build_Ek,
    critical_series,
    e2_stokes_constant,
    laplace_at_lambda,
    moment_pade,
    quad_moment,
)
from .newton import determining_polynomial, indicial_polynomial, newton_polygon

log = logging.getLogger("resurgence")


# ---------------------------------------------------------------------------
# encoding: exact values are "p/q" strings, inexact ones [re, im] digit strings


def num(v, digits=25):
    if is_exact(v):
        return str(Fraction(v))
    v = mpmath.mpc(v)
    return [mpmath.nstr(v.real, digits), mpmath.nstr(v.imag, digits)]


def err(v):
    return mpmath.nstr(mpmath.mpf(v), 5)


class Report:
    """Collects sections, warnings and timings; ``dumps`` is canonical."""

    def __init__(self, command, config: RunConfig, inputs: dict):
        self.data = {"command": command, "config": config.to_json(), "input": inputs}
        self.warnings = []
        self.timings = {}

    def timed(self, name, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        finally:
            self.timings[name] = round(time.perf_counter() - t0, 4)

    def warn(self, msg):
        log.warning(msg)
        self.warnings.append(msg)

    def finish(self) -> dict:
        out = dict(self.data)
        out["warnings"] = list(self.warnings)
        out["timings"] = dict(self.timings)
        return out


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# commands


def _polygon_section(H):
    out = {"zero": newton_polygon(H, "zero").to_json(), "infinity": newton_polygon(H, "infinity").to_json()}
    return out


def _basis_section(basis):
    return [b.summary() for b in basis]


def _gevrey_section(basis, rep):
    out = []
    for b in basis:
        try:
            g = gevrey_estimate(b.series)
            out.append({"label": b.label, "s": round(g.s, 6), "A": round(g.A, 6), "residual": round(g.residual, 6)})
        except ResurgenceError as e:
            rep.warn(f"gevrey fit skipped for basis element {b.label}: {e}")
    return out


def _stokes_json(st):
    out = st.to_json()
    out["samples"] = [{"z": num(z, 15), "jump": num(j, 20)} for z, j in st.jump_samples]
    return out


def analyze_ek(k, cfg: RunConfig, rep: Report, stokes=False):
    model = rep.timed("build", build_Ek, k, cfg.order)
    rep.data["operator_lambda"] = format_operator(model.operator_lambda)
    rep.data["operator_x"] = format_operator(model.operator_x)
    rep.data["ramification"] = model.ramification
    rep.data["m"] = str(model.m)
    rep.data["polygon_lambda"] = _polygon_section(model.operator_lambda)
    rep.data["polygon_x"] = _polygon_section(model.operator_x)
    rep.data["indicial_roots"] = [num(r) for r in indicial_polynomial(model.operator_x).roots]
    if model.determining is None:
        rep.data["determining"] = None
        rep.warn("no positive slope: the series converges")
        rep.data["basis"] = _basis_section(model.basis)
        return
    rep.data["determining"] = {
        "polynomial": format_poly(model.determining.polynomial, "u"),
        "roots": [num(r) for r in model.roots],
        "residuals": [err(r) for r in model.determining.residuals],
    }
    rep.data["basis"] = _basis_section(model.basis)
    g = gevrey_estimate(model.lambda_series())
    rep.data["gevrey_lambda"] = {"s": round(g.s, 6), "A": round(g.A, 6), "residual": round(g.residual, 6)}
    B = borel_transform_op(model.operator_x)
    rep.data["borel_operator"] = format_operator(B)
    rep.data["borel_derivative_form"] = [format_laurent(c, "zeta") for c in derivative_form(B)]
    pade = rep.timed("pade", auto_pade, borel_series(critical_series(model)))
    rep.data["borel"] = {"orders": list(pade.orders), "poles": pade.to_json()}
    if stokes:
        if k != 2:
            rep.warn("Stokes normalization only implemented for k = 2")
        else:
            st = rep.timed("stokes", e2_stokes_constant, model)
            if st.status != "ok":
                rep.warn(f"Stokes estimate unstable (spread {st.spread:.3g})")
            rep.data["stokes"] = _stokes_json(st)


def analyze_op(expr, cfg: RunConfig, rep: Report, stokes=True):
    H = parse_operator(expr)
    rep.data["operator"] = format_operator(H)
    rep.data["polygon"] = _polygon_section(H)
    rep.data["indicial_roots"] = [num(r) for r in indicial_polynomial(H).roots]
    slopes = newton_polygon(H).positive_slopes
    if not slopes:
        rep.warn("no positive slope at 0: regular singular point")
        return
    q = slopes[0]
    det = determining_polynomial(H, q)
    rep.data["determining"] = {
        "slope": str(q),
        "polynomial": format_poly(det.polynomial, "u"),
        "roots": [num(r) for r in det.nonzero_roots],
    }
    basis = rep.timed("basis", formal_basis, H, cfg.order)
    rep.data["basis"] = _basis_section(basis)
    rep.data["gevrey"] = _gevrey_section(basis, rep)
    if q != 1:
        rep.warn(f"level {q} != 1: rewrite in the critical variable before Borel summation")
        return
    B = borel_transform_op(H)
    rep.data["borel_operator"] = format_operator(B)
    f0 = basis[0].series
    if f0.ramification != 1 or f0.beta.denominator != 1:
        rep.warn("formal solution has a non-integer exponent; numeric Borel stage skipped")
        return
    b = borel_series(f0)
    pade = rep.timed("pade", auto_pade, b)
    rep.data["borel"] = {"orders": list(pade.orders), "poles": pade.to_json()}
    stable = pade.stable_poles
    if stokes and stable:
        w = min(stable, key=lambda p: abs(p.location)).location
        theta = mpmath.arg(w)
        st = rep.timed("stokes", stokes_jump, pade, theta, (2, 4, 8))
        if st.status != "ok":
            rep.warn(f"Stokes estimate unstable (spread {st.spread:.3g})")
        rep.data["stokes"] = _stokes_json(st)


def _partition_row(args):
    k, j, lam, order, tol, prec = args
    with working_precision(prec):
        lam = mpmath.mpf(lam)
        V = Potential.monomial(2 * k)
        q = quad_moment(V, j, lam, tol)
        alphas = asymptotic_coeffs(V, j, order)
        # optimal truncation: sum through the smallest term
        terms = [to_mp(a) * lam ** n for n, a in enumerate(alphas)]
        n_opt = min(range(len(terms)), key=lambda n: abs(terms[n]))
        trunc = mpmath.fsum(terms[: n_opt + 1])
        return q, trunc, n_opt


def run_partition(k, lambdas, j, cfg: RunConfig, rep: Report, jobs=1):
    rows = []
    lambdas = [repr(float(lam)) for lam in lambdas]
    args = [(k, j, lam, cfg.order, cfg.tol, cfg.precision) for lam in lambdas]
    t0 = time.perf_counter()
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            quads = list(ex.map(_partition_row, args))
    else:
        quads = [_partition_row(a) for a in args]
    rep.timings["quadrature"] = round(time.perf_counter() - t0, 4)
    pade = rep.timed("pade", moment_pade, k, j, cfg.order) if k >= 2 else None
    t0 = time.perf_counter()
    for lam, (q, trunc, n_opt) in zip(lambdas, quads):
        row = {
            "lambda": lam,
            "quad": num(q.value, 30),
            "quad_err": err(q.error),
            "truncated": num(trunc, 30),
            "truncation_index": n_opt,
        }
        if pade is not None:
            L = laplace_at_lambda(pade, k, mpmath.mpf(lam))
            row["resummed"] = num(L.value, 30)
            row["resummed_err"] = err(L.error)
            row["abs_diff"] = err(abs(L.value - q.value))
        rows.append(row)
    rep.timings["laplace"] = round(time.perf_counter() - t0, 4)
    rep.data["rows"] = rows
    if pade is not None:
        rep.data["borel"] = {"orders": list(pade.orders), "poles": pade.to_json()}


def read_coeffs(path):
    """One rational (``p/q``) or ``re im`` pair per line; ``#`` starts a comment."""
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) == 1:
                out.append(Fraction(parts[0]))
            elif len(parts) == 2:
                out.append(mpmath.mpc(mpmath.mpf(parts[0]), mpmath.mpf(parts[1])))
            else:
                raise ValueError(f"bad coefficient line: {line!r}")
    if not out:
        raise ValueError("coefficient file is empty")
    return out


def run_resum(path, direction, z, cfg: RunConfig, rep: Report):
    coeffs = read_coeffs(path)
    rep.data["input"]["n_coeffs"] = len(coeffs)
    if any(not is_exact(c) for c in coeffs):
        coeffs = [to_mp(c) for c in coeffs]
    f = PowerSeries(Fraction(0), 1, tuple(coeffs))
    b = borel_series(f)
    pade = rep.timed("pade", auto_pade, b)
    rep.data["poles"] = pade.to_json()
    rep.data["orders"] = list(pade.orders)
    L = rep.timed("laplace", laplace_sum, pade, z, direction)
    rep.data["laplace"] = L.to_json()
    stable = pade.stable_poles
    if stable:
        w = min(stable, key=lambda p: abs(p.location)).location
        st = rep.timed("stokes", stokes_jump, pade, mpmath.arg(w), tuple(abs(to_mp(z)) * s for s in (1, 2, 4)))
        if st.status != "ok":
            rep.warn(f"Stokes estimate unstable (spread {st.spread:.3g})")
        rep.data["stokes"] = _stokes_json(st)
    else:
        rep.data["stokes"] = None


def run_airy(q, cfg: RunConfig, rep: Report):
    model = rep.timed("build", build_airy, q, cfg.order)
    rep.data["operator_lambda"] = format_operator(model.operator_lambda)
    rep.data["operator_x"] = format_operator(model.operator_x)
    rep.data["u_plus"] = num(model.u_plus)
    rep.data["u_minus"] = num(model.u_minus)
    rep.data["beta"] = str(model.beta)
    rep.data["branch_convention"] = "principal q^(3/2)"
    rep.data["branches"] = [
        {
            "u": num(br.u),
            "beta": str(br.beta),
            "twisted_operator": format_operator(br.twisted),
            "borel_operator": format_operator(br.borel_operator),
            "borel_leading_zeros": [num(z) for z in br.leading_zeros],
            "leading": [num(c) for c in br.series.coeffs[:4]],
        }
        for br in model.branches
    ]


# ---------------------------------------------------------------------------


def _parse_scalar(text):
    try:
        return Fraction(text)
    except ValueError:
        return mpmath.mpc(complex(text.replace("i", "j")))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=256, help="working precision in bits")
    common.add_argument("--order", type=int, default=60, help="number of exact series coefficients")
    common.add_argument("--tol", type=float, default=1e-10, help="quadrature tolerance")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="resurgence", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="Newton polygon, formal basis and Borel analysis")
    g = a.add_mutually_exclusive_group(required=True)
    g.add_argument("--k", type=int, help="use the partition-function operator E_k")
    g.add_argument("--op", help='operator text, e.g. "x*theta^2 + theta - 1"')
    a.add_argument("--stokes", action="store_true", help="also estimate the Stokes constant (k = 2)")

    pt = sub.add_parser("partition", parents=[common], help="quadrature vs truncated series vs resummation")
    pt.add_argument("--k", type=int, required=True)
    g = pt.add_mutually_exclusive_group(required=True)
    g.add_argument("--lambda", dest="lam", type=float)
    g.add_argument("--lambda-grid", dest="grid", help="a:b:n")
    pt.add_argument("--j", type=int, default=0, help="moment index (phi^{2j} weight)")
    pt.add_argument("--jobs", type=int, default=1, help="parallel quadrature workers")

    r = sub.add_parser("resum", parents=[common], help="Borel-Pade-Laplace sum of a coefficient file")
    r.add_argument("--coeffs", required=True, help="coefficients a_n of sum a_n x^n, x = 1/z")
    r.add_argument("--direction", type=float, default=0.0, help="Laplace ray angle")
    r.add_argument("--z", type=_parse_scalar, required=True)

    ai = sub.add_parser("airy", parents=[common], help="Airy governing equation")
    ai.add_argument("--q", type=_parse_scalar, required=True)
    return p


def run(argv=None) -> tuple:
    """Return ``(exit code, report dict)``."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    cfg = RunConfig(args.precision, args.order, args.tol)
    inputs = {k: (str(v) if isinstance(v, (Fraction, mpmath.mpc)) else v) for k, v in vars(args).items()
              if k not in ("out", "verbose", "precision", "order", "tol", "command")}
    rep = Report(args.command, cfg, inputs)
    t0 = time.perf_counter()
    code = 0
    try:
        with working_precision(cfg.precision):
            rep.data["precision_bits"] = mp.prec
            if args.command == "analyze":
                if args.k is not None:
                    analyze_ek(args.k, cfg, rep, stokes=args.stokes)
                else:
                    analyze_op(args.op, cfg, rep)
            elif args.command == "partition":
                lambdas = (args.lam,) if args.lam is not None else PartitionGrid.parse(args.k, args.grid, args.j).lambdas
                run_partition(args.k, lambdas, args.j, cfg, rep, jobs=args.jobs)
            elif args.command == "resum":
                run_resum(args.coeffs, args.direction, args.z, cfg, rep)
            elif args.command == "airy":
                run_airy(args.q, cfg, rep)
    except ResurgenceError as e:
        code = 1
        rep.data["error"] = {"kind": e.kind, "message": str(e), "detail": {k: str(v) for k, v in e.detail.items()}}
    except (ValueError, OSError) as e:
        code = 1
        rep.data["error"] = {"kind": "input", "message": str(e), "detail": {}}
    rep.timings["total"] = round(time.perf_counter() - t0, 4)
    return code, rep.finish()


def main(argv=None) -> int:
    code, report = run(argv)
    text = dumps(report)
    args = build_parser().parse_args(argv)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
