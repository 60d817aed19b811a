"""Numerical Stokes constant of Z_0 for E_2 across the negative Borel axis.

Prints A for several truncation orders and sampling radii; the exact value is
not used anywhere, the script only shows how stable the estimate is.
"""
import argparse

import mpmath

from resurgence.models import build_Ek, e2_stokes_constant


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--orders", default="40,50,60,70")
    ap.add_argument("--radii", default="8,16,32")
    args = ap.parse_args()
    orders = [int(n) for n in args.orders.split(",")]
    radii = tuple(int(r) for r in args.radii.split(","))
    model = build_Ek(2, order=max(orders))
    print(f"{'N':>4} {'A':>40} {'spread':>10} status")
    last = None
    for N in orders:
        est = e2_stokes_constant(model, radii=radii, N=N)
        print(f"{N:>4} {mpmath.nstr(est.constant, 15):>40} {est.spread:>10.2e} {est.status}")
        last = est.constant
    print(f"# |A| = {mpmath.nstr(abs(last), 15)}, sqrt(2) = {mpmath.nstr(mpmath.sqrt(2), 15)}")


if __name__ == "__main__":
    main()
