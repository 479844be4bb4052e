"""Uniaxial background design, graphene white line and stack geometry."""
import argparse
import math

import numpy as np

from dispeq.constants import twopi_grad
from dispeq.dispersion import special_frequencies, uniaxial_design_solve
from dispeq.realization import (
    StackDesign,
    UniaxialMedium,
    intraband_conductivity,
    length_ratio,
    tilt_and_transmissivity,
    white_line_mu,
)
from dispeq.presets import reference_flake


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--curvature", choices=("index", "wavevector"), default="index")
    ap.add_argument("--N", type=int, default=100)
    ap.add_argument("--Lg", type=float, default=500e-9, help="stack length in m")
    args = ap.parse_args()

    for crit in ("index", "wavevector"):
        d = uniaxial_design_solve(2.5, twopi_grad(10), twopi_grad(60), curvature=crit)
        print(f"{crit:>10} curvature: omega_p/2pi = {d.omega_p / twopi_grad(1):.5f} Grad/s, "
              f"omega0/2pi = {d.omega0 / twopi_grad(1):.5f} Grad/s")
    d = uniaxial_design_solve(2.5, twopi_grad(10), twopi_grad(60), curvature=args.curvature)
    sf = special_frequencies(d.eps_inf, d.omega_rx, d.omega_ry, d.omega_p)
    print(f"omega_s/2pi = {sf.omega_s / twopi_grad(1):.4f}, crossings "
          f"{sf.omega_0a / twopi_grad(1):.4f}, {sf.omega_0b / twopi_grad(1):.4f} Grad/s")

    medium = UniaxialMedium.from_design(d)
    sd = StackDesign.designed(args.N, args.Lg, d.omega0)
    print(f"chi = {sd.chi:.6f} rad, L_m/L_g = {length_ratio(sd.chi):.8f}, L_m = {sd.L_m * 1e6:.4f} um")

    print("white line (|tilt| = chi):")
    for B0 in (1.0, 3.0, 10.0, 30.0):
        mu = white_line_mu(B0, sd.chi, medium, d.omega0)
        t, T = tilt_and_transmissivity(reference_flake(mu, B0), medium, intraband_conductivity, d.omega0)
        print(f"  B0 = {B0:5.1f} T  mu_c = {mu:.5f} eV  tilt = {t:+.6f}  transmissivity = {T:.5f}")


if __name__ == "__main__":
    main()
