"""Twist roots, indicial exponents and Borel leading-coefficient zeros of the Airy operator."""
import argparse

from resurgence.cli import _parse_scalar, num
from resurgence.diffop import format_operator
from resurgence.models import build_airy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("qs", nargs="*", default=["1", "4", "1/4", "9/4", "2", "-1"])
    ap.add_argument("--order", type=int, default=20)
    args = ap.parse_args()
    for text in args.qs:
        model = build_airy(_parse_scalar(text), order=args.order)
        print(f"q = {text}: x-operator {format_operator(model.operator_x)}")
        for br in model.branches:
            print(f"  u = {num(br.u, 15)}  beta = {br.beta}  zeros = {[num(z, 15) for z in br.leading_zeros]}"
                  f"  h_1 = {num(br.series.coeffs[1], 15)}")


if __name__ == "__main__":
    main()
