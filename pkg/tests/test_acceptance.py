"""Acceptance criteria, one test each. Every test records a single
PASS/FAIL line; the lines are printed in the pytest terminal summary and
when this file is run as a script."""
import math
import time

import numpy as np
import pytest
from scipy import linalg

from dispeq import series
from dispeq.constants import twopi_grad
from dispeq.dispersion import eval_index, plane_wave, uniaxial_design_solve
from dispeq.placement import reduced_system_residuals, solve_general, solve_reduced
from dispeq.presets import REFERENCE_TRIPLE, REFERENCE_WINDING, reference_flake, reference_stack, synthetic_three_mode, two_mode_setup
from dispeq.realization import (
    GrapheneFlake,
    StackDesign,
    intraband_conductivity,
    length_ratio,
    reduced_c1_curvature,
    reduced_c1_series,
    reduced_matrix,
    tilt_and_transmissivity,
    transmissivity_sweep,
    transpose_covariance_defect,
    white_line_mu,
)
from dispeq.transfer import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    GenericScatterer,
    PhaseGenerator,
    TransferMatrix,
    analytic_c1,
    composite_matrix,
    propagation_matrix,
)
from dispeq.verify import PulseSpec, propagate_pulse, residual_fit, residual_order

RESULTS = []


def report(n, ok, detail):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def two_mode():
    s = two_mode_setup()
    sol = solve_reduced(REFERENCE_WINDING, s.fi, s.fz, initial=REFERENCE_TRIPLE)

    def period(w):
        return composite_matrix(sol.lengths, s.scatterer, s.phase, w, repetitions=2)

    def bare(w):
        return propagation_matrix(s.phase, 2 * sol.period, w)

    return s, sol, period, bare


@pytest.fixture(scope="module")
def stack():
    design, medium, sd = reference_stack()
    mu = white_line_mu(1.0, math.pi / 200, medium, sd.omega0)
    return design, medium, sd, reference_flake(mu_c=mu)


def test_criterion_01_model_constants(two_mode):
    s = two_mode[0]
    fi = s.coefficients.fi_derivatives()
    fz = s.coefficients.fz_derivatives()
    ok = (abs(fi[0] - 3.36984) <= 1e-3 and abs(fz[0] - 0.549151) <= 5e-4
          and abs(fi[1] - 5.23733) <= 1e-3 and abs(fi[2]) < 1e-3 and abs(s.omega0 - 2.98307) < 5e-6)
    report(1, ok, f"W0={s.omega0:.8f} F_I={fi[0]:.6f} F_z={fz[0]:.6f} F_I'={fi[1]:.6f} F_I''={fi[2]:.2e}")


def test_criterion_02_reference_triple():
    r1, r2 = reduced_system_residuals(*REFERENCE_TRIPLE)
    s = two_mode_setup()
    wind = sum(REFERENCE_TRIPLE) * s.fi / s.fz
    ok = abs(r1) < 2e-3 and abs(r2) < 2e-3 and abs(wind - 20 * math.pi) < 1e-3
    report(2, ok, f"r1={r1:.3e} r2={r2:.3e} winding-20pi={wind - 20 * math.pi:.3e}")


def test_criterion_03_reduced_solve(two_mode):
    s, sol, _, _ = two_mode
    free = solve_reduced(REFERENCE_WINDING, s.fi, s.fz)
    per = 2 * sol.period
    ok = (free.max_residual < 1e-10 and sol.max_residual < 1e-10
          and np.allclose(sol.X, REFERENCE_TRIPLE, atol=1e-5) and abs(per - 37.2905) <= 1e-3)
    report(3, ok, f"seeded X={np.round(sol.X, 6).tolist()} |r|={sol.max_residual:.1e}; "
                  f"unseeded |r|={free.max_residual:.1e}; period={per:.5f}")


def test_criterion_04_residual_fit(two_mode):
    s, _, period, _ = two_mode
    fit = residual_fit(period, s.omega0)
    th1, th2, th3 = fit.theta[1], fit.theta[2], fit.theta[3]
    gx, gy = fit.generator[0, 3], fit.generator[1, 3]
    mags = np.abs([th3, gx, gy])
    ref = np.array([185.11, 4.48, 4.08])
    ok = abs(th1 - 195.3037) <= 0.05 and abs(th2) < 0.05 and np.all(np.abs(mags / ref - 1) <= 0.1)
    report(4, ok, f"theta1={th1:.4f} theta2={th2:.2e} cubic: theta3={th3:.3f} gx={gx:.4f} gy={gy:.4f}")


def test_criterion_05_residual_order(two_mode):
    s, _, period, bare = two_mode
    est = residual_order(period, s.omega0)
    ref = residual_order(bare, s.omega0)
    ok = 2.8 <= est.slope <= 3.2 and est.r2 > 0.999 and 0.9 <= ref.slope <= 1.1
    report(5, ok, f"slope={est.slope:.4f} R2={est.r2:.6f}; uncompensated slope={ref.slope:.4f}")


def test_criterion_06_general_solver():
    p = synthetic_three_mode(order=1)
    t0 = time.perf_counter()
    sol = solve_general(p)
    dt = time.perf_counter() - t0
    m = composite_matrix(sol.lengths, p.scatterer, p.phase, p.omega0).matrix
    m3 = np.linalg.matrix_power(m, 3)
    lam = np.trace(m3) / 3
    dev = np.linalg.norm(m3 - lam / abs(lam) * np.eye(3))
    ok = sol.max_residual < 1e-8 and dev < 1e-6 and dt < 60
    report(6, ok, f"max residual={sol.max_residual:.1e} |T^3-e^(i theta)I|={dev:.1e} runtime={dt:.1f}s")


def test_criterion_07_uniaxial_design():
    d = uniaxial_design_solve(2.5, twopi_grad(10), twopi_grad(60))
    wp, w0 = d.omega_p / twopi_grad(1), d.omega0 / twopi_grad(1)
    ax, ay = d.axes
    nx, ny = float(eval_index(ax, d.omega0)), float(eval_index(ay, d.omega0))
    kx = plane_wave(ax).taylor(d.omega0, 2)[2]
    ky = plane_wave(ay).taylor(d.omega0, 2)[2]
    curv = abs(kx + ky) / (abs(kx) + abs(ky))
    ok = (abs(wp / 36.19 - 1) <= 0.01 and abs(w0 / 42.07 - 1) <= 0.01
          and abs(nx - ny) <= 1e-9 * ny and curv <= 1e-9)
    alt = uniaxial_design_solve(2.5, twopi_grad(10), twopi_grad(60), curvature="index")
    report(7, ok, f"kappa''-cancelling design: wp/2pi={wp:.4f} w0/2pi={w0:.4f} Grad/s "
                  f"|nx-ny|/n={abs(nx - ny) / ny:.1e} curvature={curv:.1e}; "
                  f"(n''-cancelling design gives {alt.omega_p / twopi_grad(1):.4f}, "
                  f"{alt.omega0 / twopi_grad(1):.4f})")


def test_criterion_08_length_ratio(stack):
    _, medium, sd, _ = stack
    chi = math.pi / 200
    Lm = length_ratio(chi) * 500e-9
    curv = reduced_c1_curvature(sd, medium)
    from dispeq.realization import h_derivatives
    h1, _ = h_derivatives(medium, sd.omega0)
    rel = abs(curv) / (h1 * sd.L_m) ** 2
    # closed-form series vs finite differences of the product in h
    ratio = sd.L_m / sd.L_g
    c = lambda h: -np.trace(_half_product(chi, ratio, 1.0, h))
    fd = series.derivatives(c, 0.0, 2, 0.05 / ratio)[2] / 2
    ser = reduced_c1_series(chi, ratio, 1.0, 2)[2]
    cons = abs(fd - ser) / ratio ** 2
    ok = abs(Lm / 40.8e-6 - 1) <= 5e-3 and rel <= 1e-9 and cons <= 1e-9
    report(8, ok, f"L_m={Lm * 1e6:.4f} um; |c1''|/(h' L_m)^2={rel:.1e}; series vs product FD in h: {cons:.1e}")


def test_criterion_09_sweep(stack):
    _, medium, sd, flake = stack
    rel = np.linspace(0.95, 1.05, 101)
    rows = transmissivity_sweep(sd, medium, flake, intraband_conductivity, rel * sd.omega0)
    c = 50
    p12, p21 = rows[:, 2], rows[:, 3]
    up = lambda a: np.all(np.diff(a[c:]) > 0) and np.all(np.diff(a[:c + 1]) < 0)
    off = [c + 20, c - 30]
    nonrec = all(abs(p12[i] - p21[i]) > 1e-3 * max(p12[i], p21[i]) for i in off)
    ok = p12[c] < 1e-3 and p21[c] < 1e-3 and up(p12) and up(p21) and nonrec
    report(9, ok, f"|P12|^2(w0)={p12[c]:.2e} |P21|^2(w0)={p21[c]:.2e} monotone={up(p12) and up(p21)} "
                  f"|P12|^2-|P21|^2 at 1.02 w0={p12[off[0]] - p21[off[0]]:.2e}")


def test_criterion_10_white_line(stack):
    _, medium, sd, flake = stack
    mu = flake.mu_c
    grid = np.geomspace(1e-4, 0.2, 200)
    mono = {}
    for B0 in (0.1, 0.5, 1.0):
        t = np.array([abs(tilt_and_transmissivity(GrapheneFlake(m, B0), medium, intraband_conductivity,
                                                  sd.omega0)[0]) for m in grid])
        inc = np.diff(t) > 0
        mono[B0] = (bool(inc.all()), float(grid[np.argmax(t)]))
    ok = 0.0229 / 2 <= mu <= 0.0229 * 2 and all(v[0] for v in mono.values())
    detail = " ".join(f"B0={b}T:{'monotone' if v[0] else f'peaks at {v[1]:.3f} eV'}" for b, v in mono.items())
    report(10, ok, f"mu_c(1 T)={mu:.5f} eV (ratio {mu / 0.0229:.3f}); tilt vs mu_c on [1e-4, 0.2] eV: {detail}")


def test_criterion_11_property_suites(two_mode, stack):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(10000):
        n = int(rng.integers(2, 6))
        coefs = rng.normal(size=(n, 3))
        laws = tuple((lambda c: (lambda w: float(c[0] + c[1] * w + c[2] * w * w)))(c) for c in coefs)
        laws = tuple(_Law(f) for f in laws)
        H = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        H = H + H.conj().T
        sc = GenericScatterer(lambda w, H=H: H, n)
        t = composite_matrix(rng.uniform(0, 5, size=int(rng.integers(1, 5))), sc, PhaseGenerator(laws),
                             float(rng.uniform(0.5, 2)))
        worst = max(worst, t.unitarity_defect / n)
    c1_err = 0.0
    for _ in range(100):
        X = rng.uniform(0, 20, 3)
        fx = float(rng.uniform(-4, 4))
        S = linalg.expm(1j * fx * SIGMA_X)
        m = np.eye(2)
        for x in X:
            m = linalg.expm(-1j * x * SIGMA_Z) @ S @ m
        c1_err = max(c1_err, abs(analytic_c1(X, fx) + np.trace(m)))
    _, medium, sd, flake = stack
    cov = max(transpose_covariance_defect(GrapheneFlake(m, b), medium, intraband_conductivity, sd.omega0 * r)
              for m in (0.005, 0.0229, 0.1) for b in (0.5, 1.0, 10.0) for r in (0.95, 1.0, 1.05))
    s, _, period, bare = two_mode
    res = propagate_pulse(PulseSpec(s.omega0, 0.01 * s.omega0, amplitudes=(1.0, 1.0)), period, 5)
    e_err = abs(res.energy / res.input_energy - 1)
    fit = residual_fit(period, s.omega0)
    c_err = abs(res.centroid / (5 * fit.theta[1]) - 1)
    ok = worst < 1e-12 and c1_err < 1e-10 and cov < 1e-14 and e_err < 1e-10 and c_err < 5e-3
    report(11, ok, f"unitarity/N={worst:.1e} c1 oracle={c1_err:.1e} transpose={cov:.1e} "
                   f"energy={e_err:.1e} centroid vs d theta/dw={c_err:.2e}")


def _half_product(chi, L_m, L_g, h):
    half = linalg.expm(-1j * h * (L_m / 2) * SIGMA_Z)
    rot = linalg.expm(-1j * (math.pi / 2) * SIGMA_Y - 1j * h * L_g * SIGMA_Z)
    return linalg.expm(1j * chi * SIGMA_Y) @ half @ rot @ linalg.expm(-1j * chi * SIGMA_Y) @ half


class _Law:
    def __init__(self, f):
        self.f = f

    def __call__(self, w):
        return self.f(w)


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
