"""Uniaxial-medium realization with magnetically biased graphene flakes.

Conventions: SI units, time dependence ``exp(+i w t)`` and propagation
``exp(-i kappa z)``. Field vectors are (E_x, E_y) phasors. The overall
period is

    P = (S^T U(L_m/2) (U(L_g/N) S)^N S U(L_m/2))^2

with ``S`` the flake transfer matrix and ``U`` diagonal propagation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy import linalg, optimize

from .constants import BOLTZMANN, ELEMENTARY_CHARGE, ETA0, EV, HBAR, SPEED_OF_LIGHT
from .dispersion import eval_index, plane_wave, uniaxial_axes
from .errors import DomainError, NoRootError
from .transfer import SIGMA_I, SIGMA_Y, SIGMA_Z, PhaseGenerator, TransferMatrix

SWEEP_COLUMNS = ("w_over_w0", "P11_sq", "P12_sq", "P21_sq", "P22_sq")


@dataclass(frozen=True)
class UniaxialMedium:
    """Lossless uniaxial background with Lorentz indices along x and y."""

    eps_inf: float
    omega_p: float
    omega_rx: float
    omega_ry: float
    c: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if not self.omega_ry > self.omega_rx:
            raise ValueError("need omega_ry > omega_rx")

    @classmethod
    def from_design(cls, design, c=SPEED_OF_LIGHT):
        return cls(design.eps_inf, design.omega_p, design.omega_rx, design.omega_ry, c)

    @property
    def axes(self):
        return uniaxial_axes(self.eps_inf, self.omega_p, self.omega_rx, self.omega_ry)

    def indices(self, w):
        ax, ay = self.axes
        return float(eval_index(ax, w)), float(eval_index(ay, w))

    def laws(self):
        ax, ay = self.axes
        return plane_wave(ax, self.c, "x"), plane_wave(ay, self.c, "y")

    def kappas(self, w):
        nx, ny = self.indices(w)
        return nx * w / self.c, ny * w / self.c

    def phase_generator(self):
        return PhaseGenerator(self.laws())


# ---------------------------------------------------------------------------
# graphene


@dataclass(frozen=True)
class GrapheneFlake:
    """Flake parameters: chemical potential in eV, bias in T, SI otherwise.

    ``orientation=-1`` reverses the bias (gamma_O changes sign).
    """

    mu_c: float
    B0: float
    tau: float = 0.2e-12
    temperature: float = 300.0
    v_f: float = 1e6
    orientation: int = 1

    def __post_init__(self):
        if not (self.tau > 0 and self.temperature > 0):
            raise ValueError("tau and temperature must be positive")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")

    def reversed(self):
        return replace(self, orientation=-self.orientation)


def drude_weight(mu_c_ev, temperature):
    kt = BOLTZMANN * temperature
    x = abs(mu_c_ev) * EV / (2.0 * kt)
    # log(2 cosh x) without overflow
    lc = x + math.log1p(math.exp(-2.0 * x))
    return ELEMENTARY_CHARGE ** 2 * kt / (math.pi * HBAR ** 2) * 2.0 * lc


def cyclotron_frequency(flake):
    if flake.B0 == 0:
        return 0.0
    if flake.mu_c == 0:
        return math.inf
    return ELEMENTARY_CHARGE * flake.B0 * flake.v_f ** 2 / (abs(flake.mu_c) * EV)


def intraband_conductivity(flake, w):
    """Intraband magneto-optical surface conductivity (gamma_D, gamma_O) in S."""
    wc = flake.orientation * cyclotron_frequency(flake)
    if math.isinf(wc):
        return 0j, 0j
    d = drude_weight(flake.mu_c, flake.temperature)
    g = 1.0 / flake.tau + 1j * w
    den = g * g + wc * wc
    return d * g / den, -d * wc / den


def zero_conductivity(flake, w):
    """Provider for a transparent flake."""
    return 0j, 0j


def graphene_transfer(flake, medium, provider, w, transpose=False):
    """Flake transfer matrix between the x/y field components on both sides."""
    nx, ny = medium.indices(w)
    gd, go = provider(flake, w)
    a, o = ETA0 * gd, ETA0 * go
    pref = 2.0 / ((2 * nx + a) * (2 * ny + a) + o * o)
    m = pref * np.array([[nx * (2 * ny + a), -ny * o], [nx * o, ny * (2 * nx + a)]], dtype=complex)
    return TransferMatrix(m.T if transpose else m)


def power_normalized(m, nx, ny):
    """Similarity to amplitudes whose squared norm is the carried power."""
    s = np.sqrt(np.array([nx, ny], dtype=float))
    return (s[:, None] * np.asarray(m)) / s[None, :]


def polarization_tilt(ex, ey):
    """Orientation of the major axis of the polarization ellipse (rad)."""
    return 0.5 * math.atan2(2.0 * (ex * np.conj(ey)).real, abs(ex) ** 2 - abs(ey) ** 2)


def tilt_and_transmissivity(flake, medium, provider, w):
    """(tilt, power transmissivity) for a unit x-polarized input."""
    nx, ny = medium.indices(w)
    s = graphene_transfer(flake, medium, provider, w).matrix
    ex, ey = s[0, 0], s[1, 0]
    return polarization_tilt(ex, ey), float((nx * abs(ex) ** 2 + ny * abs(ey) ** 2) / nx)


def white_line_mu(B0, target, medium, w, flake=None, provider=intraband_conductivity,
                  bracket=(1e-4, 0.2), samples=200):
    """Chemical potential (eV) giving ``|tilt| = target`` at bias ``B0``.

    The lowest crossing on a log grid over ``bracket`` is refined by brentq.
    """
    base = flake if flake is not None else GrapheneFlake(mu_c=bracket[0], B0=B0)
    base = replace(base, B0=B0)

    def f(mu):
        return abs(tilt_and_transmissivity(replace(base, mu_c=mu), medium, provider, w)[0]) - target

    grid = np.geomspace(bracket[0], bracket[1], samples)
    vals = np.array([f(m) for m in grid])
    idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    if len(idx) == 0:
        raise NoRootError(f"tilt never reaches {target:.4g} rad for mu_c in {bracket} eV at B0={B0} T")
    i = idx[0]
    return optimize.brentq(f, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-13)


# ---------------------------------------------------------------------------
# stack design


def length_ratio(chi):
    """L_m / L_g cancelling the second frequency derivative of c1 for tilt ``chi``."""
    if not 0 < chi < math.pi / 2:
        raise ValueError("chi must lie in (0, pi/2)")
    c = math.cos(chi)
    root = math.sqrt(c * (3 * c + math.cos(3 * chi) + 2 * math.pi * math.sin(chi)))
    return 2.0 / (math.pi * math.sin(2 * chi)) * (2 * c * c + root)


@dataclass(frozen=True)
class StackDesign:
    N: int
    L_g: float
    L_m: float
    omega0: float

    @property
    def chi(self):
        return math.pi / (2 * self.N)

    @property
    def half_length(self):
        return self.L_m + self.L_g

    @property
    def small_angle(self):
        """False when the per-flake tilt is too large for the idealized limit."""
        return self.N >= 4

    @classmethod
    def designed(cls, N, L_g, omega0):
        if N < 1:
            raise ValueError("N must be >= 1")
        return cls(N, L_g, length_ratio(math.pi / (2 * N)) * L_g, omega0)


def _prop(medium, L, w, stripped):
    kx, ky = medium.kappas(w)
    k0 = 0.5 * (kx + ky) if stripped else 0.0
    return np.diag([np.exp(-1j * (kx - k0) * L), np.exp(-1j * (ky - k0) * L)])


def overall_matrix(design, medium, flake, provider, w):
    """Two half-schemes of the flake stack; the common phase is carried separately.

    ``.matrix`` is the common-phase-stripped product and ``.full()`` the
    literal one.
    """
    S = graphene_transfer(flake, medium, provider, w).matrix
    half_m = _prop(medium, design.L_m / 2, w, True)
    step = _prop(medium, design.L_g / design.N, w, True) @ S
    stack = np.linalg.matrix_power(step, design.N)
    half = S.T @ half_m @ stack @ S @ half_m
    kx, ky = medium.kappas(w)
    return TransferMatrix(half @ half, (kx + ky) * design.half_length)


def transmissivity_sweep(design, medium, flake, provider, omegas, threads=1):
    """Rows of ``SWEEP_COLUMNS`` over the frequency grid (grid order kept)."""
    omegas = np.asarray(omegas, dtype=float)

    def row(w):
        p = overall_matrix(design, medium, flake, provider, w).full()
        a = np.abs(p) ** 2
        return [w / design.omega0, a[0, 0], a[0, 1], a[1, 0], a[1, 1]]

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(threads) as ex:
            rows = list(ex.map(row, omegas))
    else:
        rows = [row(w) for w in omegas]
    return np.array(rows, dtype=float).reshape(-1, len(SWEEP_COLUMNS))


# ---------------------------------------------------------------------------
# idealized (reduced) half-scheme


def _expm_taylor(M, X, order):
    """Taylor coefficients in ``t`` of ``expm(M + t X)`` at ``t = 0``."""
    n = M.shape[0]
    B = np.zeros(((order + 1) * n, (order + 1) * n), dtype=complex)
    for k in range(order + 1):
        B[k * n:(k + 1) * n, k * n:(k + 1) * n] = M
        if k < order:
            B[k * n:(k + 1) * n, (k + 1) * n:(k + 2) * n] = X
    E = linalg.expm(B)
    return [E[:n, k * n:(k + 1) * n] for k in range(order + 1)]


def _reduced_factors(chi, L_m, L_g):
    # (M, X) pairs for exp(M + h X), rightmost factor first
    z = np.zeros((2, 2), dtype=complex)
    return [
        (z, -1j * (L_m / 2) * SIGMA_Z),
        (-1j * chi * SIGMA_Y, z),
        (-1j * (math.pi / 2) * SIGMA_Y, -1j * L_g * SIGMA_Z),
        (z, -1j * (L_m / 2) * SIGMA_Z),
        (1j * chi * SIGMA_Y, z),
    ]


def reduced_series(chi, L_m, L_g, order=2):
    """Taylor coefficients (in h) of the idealized half-scheme matrix."""
    out = [SIGMA_I.copy()] + [np.zeros((2, 2), dtype=complex) for _ in range(order)]
    for M, X in _reduced_factors(chi, L_m, L_g):
        f = _expm_taylor(M, X, order)
        out = [sum(f[j] @ out[k - j] for j in range(k + 1)) for k in range(order + 1)]
    return out


def reduced_c1_series(chi, L_m, L_g, order=2):
    """Taylor coefficients in h of c1 = -tr T for the idealized half-scheme."""
    return np.array([-np.trace(m) for m in reduced_series(chi, L_m, L_g, order)])


def h_derivatives(medium, omega0):
    """(h', h'') at omega0 for h = (kx' - ky') d / 2 + kx'' d^2."""
    lx, ly = medium.laws()
    tx, ty = lx.taylor(omega0, 2), ly.taylor(omega0, 2)
    return 0.5 * (tx[1] - ty[1]), 2.0 * (2.0 * tx[2])


def h_of(medium, omega0, w):
    h1, h2 = h_derivatives(medium, omega0)
    d = w - omega0
    return h1 * d + 0.5 * h2 * d * d


def reduced_matrix(design, medium, w):
    """Idealized half-scheme with small-tilt flakes and a continuous rotator stack."""
    h = h_of(medium, design.omega0, w)
    m = SIGMA_I
    for M, X in _reduced_factors(design.chi, design.L_m, design.L_g):
        m = linalg.expm(M + h * X) @ m
    return TransferMatrix(m)


def reduced_c1_curvature(design, medium):
    """d^2 c1 / d w^2 at omega0 for the idealized half-scheme (exact in h)."""
    c = reduced_c1_series(design.chi, design.L_m, design.L_g, 2)
    h1, h2 = h_derivatives(medium, design.omega0)
    return complex(2.0 * c[2] * h1 ** 2 + c[1] * h2)


def trotter_error(u, N, symmetric=False):
    """Spectral-norm gap between the N-flake stack and the continuous rotator.

    ``u = h L_g`` is the accumulated stack phase.
    """
    a = -1j * u * SIGMA_Z
    b = -1j * (math.pi / 2) * SIGMA_Y
    exact = linalg.expm(a + b)
    if symmetric:
        step = linalg.expm(a / (2 * N)) @ linalg.expm(b / N) @ linalg.expm(a / (2 * N))
    else:
        step = linalg.expm(a / N) @ linalg.expm(b / N)
    return float(np.linalg.norm(np.linalg.matrix_power(step, N) - exact, 2))


def transpose_covariance_defect(flake, medium, provider, w):
    """Gap between S(-B) and S(B)^T in power-normalized amplitudes."""
    nx, ny = medium.indices(w)
    s = power_normalized(graphene_transfer(flake, medium, provider, w).matrix, nx, ny)
    r = power_normalized(graphene_transfer(flake.reversed(), medium, provider, w).matrix, nx, ny)
    return float(np.max(np.abs(r - s.T)))
