"""Two-mode guide: zero-curvature frequency, scatterer placement, residual
fit and order, and the compensated pulse versus the bare guide."""
import argparse

import numpy as np

from dispeq.placement import solve_reduced
from dispeq.presets import REFERENCE_TRIPLE, REFERENCE_WINDING, two_mode_setup
from dispeq.transfer import composite_matrix, propagation_matrix
from dispeq.verify import PulseSpec, propagate_pulse, residual_fit, residual_order


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--winding", type=int, default=REFERENCE_WINDING)
    ap.add_argument("--periods", type=int, default=5)
    ap.add_argument("--bandwidth", type=float, default=0.003, help="relative to omega0")
    ap.add_argument("--plot", default=None, help="write a pulse figure to this path")
    args = ap.parse_args()

    s = two_mode_setup()
    c = s.coefficients
    print(f"omega0 = {s.omega0:.10f}")
    print("F_I derivatives:", np.array2string(c.fi_derivatives(), precision=6))
    print("F_z derivatives:", np.array2string(c.fz_derivatives(), precision=6))

    init = REFERENCE_TRIPLE if args.winding == REFERENCE_WINDING else None
    sol = solve_reduced(args.winding, s.fi, s.fz, initial=init)
    print(f"X = {np.round(sol.X, 8)}  lengths = {np.round(sol.lengths, 6)}")
    print(f"residuals = {sol.residuals}  period 2*sum(L) = {2 * sol.period:.6f}")

    period = lambda w: composite_matrix(sol.lengths, s.scatterer, s.phase, w, repetitions=2)
    bare = lambda w: propagation_matrix(s.phase, 2 * sol.period, w)
    fit = residual_fit(period, s.omega0)
    print(f"theta coefficients: {np.round(fit.theta[:4], 5)}")
    print(f"generator cubic (x, y, z): {np.round(fit.generator[:, 3], 5)}")
    est, ref = residual_order(period, s.omega0), residual_order(bare, s.omega0)
    print(f"residual order {est.slope:.4f} (R2 {est.r2:.6f}); bare guide {ref.slope:.4f}")

    spec = PulseSpec(s.omega0, args.bandwidth * s.omega0, amplitudes=(1.0, 1.0))
    res = propagate_pulse(spec, period, args.periods, reference=bare)
    print(f"compensated: centroid {res.centroid:.3f}, rms {res.rms_width:.3f}, "
          f"mode centroids {np.round(res.mode_centroids, 3)}")
    r = res.reference
    print(f"bare guide:  centroid {r.centroid:.3f}, rms {r.rms_width:.3f}, "
          f"mode centroids {np.round(r.mode_centroids, 3)}")

    if args.plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        fig, ax = plt.subplots(2, 1, sharex=True, figsize=(6, 5))
        for a, rr, title in ((ax[0], r, "bare guide"), (ax[1], res, "compensated")):
            for j in range(2):
                a.plot(rr.times, np.abs(rr.fields[:, j]) ** 2, label=f"mode {j + 1}")
            a.set_title(title)
            a.legend()
        ax[1].set_xlabel("time (normalized)")
        fig.tight_layout()
        fig.savefig(args.plot, dpi=120)


if __name__ == "__main__":
    main()
