"""Quadrature vs optimally truncated series vs Borel-Pade-Laplace sum of Z_0 for V = phi^{2k}."""
import argparse
import time

import mpmath

from resurgence.config import RunConfig
from resurgence.exactnum import to_mp, working_precision
from resurgence.models import Potential, asymptotic_coeffs, laplace_at_lambda, moment_pade, quad_moment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--lambdas", default="0.01,0.02,0.05,0.1,0.2,0.3,0.5,1")
    ap.add_argument("--order", type=int, default=60)
    ap.add_argument("--precision", type=int, default=256)
    args = ap.parse_args()
    cfg = RunConfig(precision=args.precision, order=args.order)

    with working_precision(cfg.precision):
        V = Potential.monomial(2 * args.k)
        alpha = [to_mp(a) for a in asymptotic_coeffs(V, 0, cfg.order)]
        t0 = time.perf_counter()
        pade = moment_pade(args.k, 0, cfg.order)
        print(f"# Pade {pade.orders} built in {time.perf_counter() - t0:.2f}s; "
              f"nearest stable pole {mpmath.nstr(pade.stable_poles[0].location, 10)}")
        print(f"{'lambda':>8} {'quadrature':>24} {'n*':>4} {'|trunc - quad|':>15} {'|resum - quad|':>15}")
        for text in args.lambdas.split(","):
            lam = mpmath.mpf(text)
            q = quad_moment(V, 0, lam, cfg.tol).value
            terms = [a * lam**n for n, a in enumerate(alpha)]
            n_opt = min(range(len(terms)), key=lambda n: abs(terms[n]))
            trunc = mpmath.fsum(terms[: n_opt + 1])
            res = laplace_at_lambda(pade, args.k, lam).value
            print(f"{text:>8} {mpmath.nstr(q, 20):>24} {n_opt:>4} "
                  f"{mpmath.nstr(abs(trunc - q), 3):>15} {mpmath.nstr(abs(res - q), 3):>15}")


if __name__ == "__main__":
    main()
