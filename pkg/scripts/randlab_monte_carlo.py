"""Random zeta products along Re s = 1/2: box hit rates over seeds and truncations V."""

import argparse

from natbound.cache import get_zero_table
from natbound.randlab import critical_line_preset, monte_carlo


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--V", type=int, nargs="+", default=[10, 25, 50])
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    t_grid = [float(t) for t in range(5, 21)]
    for V in args.V:
        config = critical_line_preset(V)
        zeros = get_zero_table(max(20.0, V * (t_grid[-1] + 1 / args.n) + 1))
        mc = monte_carlo(config, range(args.seeds), args.n, t_grid, zeros, jobs=args.jobs)
        print(
            f"V={V:3d} sigma_h={config.sigma_h} hit fraction={mc.hit_fraction:.3f} "
            f"weights conserved={all(s.weights_conserved for s in mc.scans)} sign balance p={mc.sign_balance_p}"
        )


if __name__ == "__main__":
    main()
