"""Zero table to t_max: N(T) against the smooth main term and the six-unit gap check."""

import argparse

import numpy as np

from natbound.cache import get_zero_table
from natbound.zeros import counting_report, riemann_von_mangoldt, zero_count


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tmax", type=float, default=2000.0)
    ap.add_argument("--gaps-from", type=int, default=1000)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    table = get_zero_table(args.tmax, jobs=args.jobs)
    print(f"{len(table)} zeros up to {table.t_max:g}, certified at {len(table.certified_at)} heights")
    for T in np.linspace(100, args.tmax, 10):
        n = zero_count(table, T)
        print(f"T={T:8.1f}  N={n:5d}  N - main = {n - float(riemann_von_mangoldt(T)):+.3f}")
    rep = counting_report(table, args.gaps_from)
    print(f"gap check on {rep.gap_range}: {'ok' if rep.gaps_ok else rep.gap_failures}")
    print(f"max |N - main| / log T = {rep.backlund_ratio_max:.3f}")


if __name__ == "__main__":
    main()
