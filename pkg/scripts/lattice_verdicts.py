"""Discreteness of the group generated by the nonzero roots of P_k, with the bounded density search."""
import argparse

from resurgence.models import singularity_discreteness


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kmax", type=int, default=12)
    ap.add_argument("--depth", type=int, default=12)
    args = ap.parse_args()
    print(f"{'k':>3} {'order':>5} {'discrete':>8} {'min |word|/|u_1|':>18} witness")
    for k in range(3, args.kmax + 1):
        v = singularity_discreteness(k, depth=args.depth)
        print(f"{k:>3} {v.rotation_order:>5} {str(v.discrete):>8} {v.witness_ratio:>18.4g} {v.witness_found}")


if __name__ == "__main__":
    main()
