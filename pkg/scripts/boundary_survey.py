"""Ghost expansions of a few local factors: termination, tail sup of n/m, dyadic coverage."""

import argparse

from natbound._arith import fmt_rational
from natbound.ghost import candidate_boundary, dyadic_blocks_nonzero, estermann_check, ghost_expand
from natbound.polyparse import parse_polynomial

DEFAULT = [
    "1 + T + p*T^2",
    "1 - T - p*T^2 + p*T^3",
    "1 + T",
    "1 + p*T + p^2*T + p^3*T + p^4*T + p^5*T^2",
    "1 + p*T^3",
    "1 + 2*T + p*T^2",
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("poly", nargs="*", default=DEFAULT)
    ap.add_argument("--depth", type=int, default=30)
    args = ap.parse_args()
    print(f"{'W':45} {'terminates':>10} {'tail sup':>9} {'global sup':>10} {'blocks':>7}")
    for text in args.poly:
        W = parse_polynomial(text)
        exp = ghost_expand(W, args.depth)
        b = candidate_boundary(exp)
        est = estermann_check(W, args.depth)
        blocks = dyadic_blocks_nonzero(exp)
        cover = f"{sum(nz for *_, nz in blocks)}/{len(blocks)}"
        print(f"{text:45} {str(est.terminated):>10} {fmt_rational(b.tail_sup) or '-':>9} {fmt_rational(b.global_sup) or '-':>10} {cover:>7}")
        if b.annotation:
            print(f"    {b.annotation}")


if __name__ == "__main__":
    main()
