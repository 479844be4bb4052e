"""Cross-polarized transmissivity of the graphene stack around omega0."""
import argparse
import math

import numpy as np

from dispeq import records
from dispeq.presets import reference_flake, reference_stack
from dispeq.realization import SWEEP_COLUMNS, intraband_conductivity, transmissivity_sweep, white_line_mu


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--span", type=float, default=0.05, help="relative half-width")
    ap.add_argument("--points", type=int, default=201)
    ap.add_argument("--B0", type=float, default=1.0)
    ap.add_argument("--out", default="sweep.csv")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    design, medium, sd = reference_stack()
    mu = white_line_mu(args.B0, math.pi / (2 * sd.N), medium, sd.omega0)
    rel = np.linspace(1 - args.span, 1 + args.span, args.points)
    rows = transmissivity_sweep(sd, medium, reference_flake(mu, args.B0), intraband_conductivity,
                                rel * sd.omega0, threads=args.threads)
    records.write_csv(args.out, SWEEP_COLUMNS, rows, "sweep")
    c = args.points // 2
    print(f"mu_c = {mu:.5f} eV; wrote {args.out}")
    for i in (0, c // 2, c, c + c // 2, args.points - 1):
        print("  " + "  ".join(f"{v:.6g}" for v in rows[i]))


if __name__ == "__main__":
    main()
