"""Mode dispersion laws, mode-pair coefficients, overlap couplings and the
Lorentz uniaxial design conditions.

Two unit systems are in use. Rectangular-guide laws work in normalized
units (``c = 1``; lengths in units of the guide height ``b``; frequency
``W = omega * b / c``). Uniaxial laws work in SI (rad/s, 1/m).

All permittivity models share the rational form

    eps(w) = eps_inf + strength / (pole_sq - w**2)

which covers both the normalized guide filling and the Lorentz axes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize
from numpy.polynomial import legendre

from . import series
from .constants import SPEED_OF_LIGHT
from .errors import (
    ConvergenceError,
    CutoffError,
    DegenerateCurvatureError,
    DomainError,
    NoRootError,
    OrderingError,
    QuadratureError,
)

# ---------------------------------------------------------------------------
# refraction models


@dataclass(frozen=True)
class RationalPermittivity:
    """``eps(w) = eps_inf + strength / (pole_sq - w**2)``.

    With ``strength=15, pole_sq=16`` this is the normalized guide filling
    whose two lowest modes have opposite curvature near ``W = 2.98307``.
    """

    strength: float
    pole_sq: float
    eps_inf: float = 1.0

    def permittivity(self, w):
        w = np.asarray(w, dtype=float)
        return self.eps_inf + self.strength / (self.pole_sq - w * w)

    def permittivity_series(self, w0, order):
        denom = np.zeros(order + 1)
        denom[:3] = [self.pole_sq - w0 * w0, -2.0 * w0, -1.0][: order + 1]
        out = self.strength * series.inv(denom)
        out[0] += self.eps_inf
        return out


@dataclass(frozen=True)
class LorentzAxis:
    """Lossless single-resonance Lorentz index along one crystal axis."""

    eps_inf: float
    omega_p: float
    omega_r: float

    @property
    def rational(self):
        return RationalPermittivity(self.omega_p ** 2, self.omega_r ** 2, self.eps_inf)

    def permittivity(self, w):
        return self.rational.permittivity(w)

    def permittivity_series(self, w0, order):
        return self.rational.permittivity_series(w0, order)


@dataclass(frozen=True)
class ConstantIndex:
    n: float

    def permittivity(self, w):
        return np.full_like(np.asarray(w, dtype=float), self.n ** 2)

    def permittivity_series(self, w0, order):
        out = np.zeros(order + 1)
        out[0] = self.n ** 2
        return out


RefractionModel = RationalPermittivity | LorentzAxis | ConstantIndex


def eval_index(model, w):
    """Refractive index ``sqrt(eps(w))``; raises DomainError where eps <= 0."""
    eps = model.permittivity(w)
    if np.any(~np.isfinite(eps)) or np.any(eps <= 0):
        raise DomainError(f"permittivity not positive at w={w!r} (eps={eps!r})")
    return np.sqrt(eps)


def index_series(model, w0, order):
    eps = model.permittivity_series(w0, order)
    if not eps[0] > 0:
        raise DomainError(f"permittivity not positive at w={w0!r}")
    return series.sqrt(eps)


# ---------------------------------------------------------------------------
# dispersion laws


@dataclass(frozen=True)
class ModeLaw:
    """``kappa(w) = sqrt(eps(w) w**2 / c**2 - cutoff_sq)`` with exact Taylor series.

    ``cutoff_sq = 0`` is a plane wave in the bulk medium.
    """

    model: object
    cutoff_sq: float = 0.0
    c: float = 1.0
    label: str = ""
    validity: Optional[Tuple[float, float]] = None

    def _radicand_series(self, w0, order):
        eps = self.model.permittivity_series(w0, order)
        if not eps[0] > 0:
            raise DomainError(f"{self.label or 'mode'}: permittivity not positive at w={w0!r}")
        g = series.mul(eps, series.power_of_x(w0, order, 2)) / self.c ** 2
        g[0] -= self.cutoff_sq
        return g

    def taylor(self, w0, order):
        """Taylor coefficients of kappa at ``w0`` through ``order``."""
        g = self._radicand_series(float(w0), order)
        if not g[0] > 0:
            raise CutoffError(
                f"{self.label or 'mode'} below cutoff at w={w0!r}",
                cutoff=self.cutoff_frequency(w0),
            )
        return series.sqrt(g)

    def derivative(self, w, order=1):
        return self.taylor(w, order)[order] * math.factorial(order)

    def __call__(self, w):
        w_arr = np.asarray(w, dtype=float)
        eps = self.model.permittivity(w_arr)
        if np.any(eps <= 0) or np.any(~np.isfinite(eps)):
            raise DomainError(f"{self.label or 'mode'}: permittivity not positive at w={w!r}")
        g = eps * w_arr ** 2 / self.c ** 2 - self.cutoff_sq
        if np.any(g <= 0):
            raise CutoffError(f"{self.label or 'mode'} below cutoff at w={w!r}",
                              cutoff=self.cutoff_frequency(float(np.min(w_arr))))
        out = np.sqrt(g)
        return float(out) if out.ndim == 0 else out

    def radicand(self, w):
        w = np.asarray(w, dtype=float)
        return self.model.permittivity(w) * w ** 2 / self.c ** 2 - self.cutoff_sq

    def cutoff_frequency(self, w_below):
        """Lowest frequency above ``w_below`` where the radicand turns positive."""
        if self.cutoff_sq == 0:
            return 0.0
        lo = float(w_below)
        hi = lo
        for _ in range(200):
            hi = hi * 1.01 + 1e-12
            pole = getattr(self.model, "pole_sq", None)
            if pole is None and hasattr(self.model, "omega_r"):
                pole = self.model.omega_r ** 2
            if pole is not None and lo * lo < pole <= hi * hi:
                return None
            if self.radicand(hi) > 0:
                return optimize.brentq(self.radicand, lo, hi, xtol=1e-14 * hi)
            lo = hi
        return None


@dataclass(frozen=True)
class FunctionLaw:
    """Dispersion law from a plain callable; derivatives by finite differences.

    ``step`` is the Richardson base step in frequency units.
    """

    func: Callable[[float], float]
    step: float = 1e-3
    label: str = ""
    validity: Optional[Tuple[float, float]] = None

    def __call__(self, w):
        return self.func(w)

    def taylor(self, w0, order):
        d = series.derivatives(self.func, float(w0), order, self.step)
        return series.to_coefficients([float(np.real(x)) for x in d])

    def derivative(self, w, order=1):
        return self.taylor(w, order)[order] * math.factorial(order)


@dataclass(frozen=True)
class WaveguideGeometry:
    """Rectangular ``a x b`` guide with conducting walls (normalized units)."""

    a: float = 2.0
    b: float = 1.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("guide dimensions must be positive")

    def cutoff_sq(self, l, j):
        return (l * math.pi / self.a) ** 2 + (j * math.pi / self.b) ** 2

    def mode(self, model, l, j, c=1.0):
        if l < 1 or j < 1:
            raise ValueError("mode indices are positive integers")
        return ModeLaw(model, self.cutoff_sq(l, j), c, label=f"({l},{j})")

    def cofactor(self, l, j, x, y):
        """Unit L2-normalized transverse co-factor sin(l pi x/a) sin(j pi y/b)."""
        norm = 2.0 / math.sqrt(self.a * self.b)
        return norm * np.sin(l * math.pi * x / self.a) * np.sin(j * math.pi * y / self.b)


def plane_wave(model, c=SPEED_OF_LIGHT, label=""):
    return ModeLaw(model, 0.0, c, label=label)


def mode_wavevector(geom, model, l, j, w, c=1.0):
    return geom.mode(model, l, j, c)(w)


# ---------------------------------------------------------------------------
# mode pair coefficients


@dataclass(frozen=True)
class ModePairCoefficients:
    """Half-sum ``F_I`` and half-difference ``F_z`` of two mode wavevectors.

    ``fi`` and ``fz`` hold Taylor coefficients at ``omega0``.
    """

    law1: object
    law2: object
    omega0: float
    fi: np.ndarray
    fz: np.ndarray

    @property
    def order(self):
        return len(self.fi) - 1

    def FI(self, w):
        return 0.5 * (self.law1(w) + self.law2(w))

    def Fz(self, w):
        return 0.5 * (self.law1(w) - self.law2(w))

    def fi_derivatives(self):
        return series.to_derivatives(self.fi)

    def fz_derivatives(self):
        return series.to_derivatives(self.fz)


def mode_pair_coefficients(law1, law2, omega0, order):
    """F_I/F_z evaluators and Taylor coefficients through ``order + 1``."""
    t1 = law1.taylor(omega0, order + 1)
    t2 = law2.taylor(omega0, order + 1)
    return ModePairCoefficients(law1, law2, float(omega0), 0.5 * (t1 + t2), 0.5 * (t1 - t2))


def _fi_curvature(law1, law2, w):
    return law1.taylor(w, 2)[2] + law2.taylor(w, 2)[2]  # = F_I''(w)


def find_zero_curvature_frequency(law1, law2, bracket, tol=1e-10, samples=201):
    """Frequency in ``bracket`` where the two curvatures cancel (F_I'' = 0).

    Points where either law is not propagating are skipped, so a bracket
    may straddle a cutoff.
    """
    lo, hi = bracket
    grid = np.linspace(lo, hi, samples)
    vals = []
    for w in grid:
        try:
            vals.append(_fi_curvature(law1, law2, w))
        except DomainError:
            vals.append(np.nan)
    vals = np.asarray(vals)
    ok = np.isfinite(vals)
    if not ok.any():
        raise NoRootError(f"no propagating frequency in {bracket}")
    scale = np.max(np.abs(law1.taylor(grid[ok][0], 2))) + 1.0
    if np.all(np.abs(vals[ok]) < tol * scale):
        raise DegenerateCurvatureError("curvatures cancel identically on the bracket")
    f = lambda w: _fi_curvature(law1, law2, w)
    for i in range(samples - 1):
        if ok[i] and ok[i + 1]:
            if vals[i] == 0.0:
                return float(grid[i])
            if np.sign(vals[i]) != np.sign(vals[i + 1]):
                root = optimize.brentq(f, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15)
                if abs(f(root)) > tol * scale * 10:
                    raise NoRootError("curvature root did not reach tolerance")
                return float(root)
    raise NoRootError(f"F_I'' does not change sign on {bracket}")


# ---------------------------------------------------------------------------
# overlap coupling


@dataclass(frozen=True)
class GaussianPerturbation:
    """Antisymmetric pair of Gaussian index bumps at ``x0`` and ``a - x0``."""

    dn: float
    x0: float
    y0: float
    z0: float
    alpha: float
    beta: float

    def __call__(self, geom, x, y, z):
        tr = np.exp(-((y - self.y0) / self.alpha) ** 2 - ((z - self.z0) / self.beta) ** 2)
        return self.dn * tr * (np.exp(-((x - self.x0) / self.alpha) ** 2)
                               - np.exp(-((x - geom.a + self.x0) / self.alpha) ** 2))


def _adaptive_gl(f, a, b, rtol, npts=16, max_panels=4096):
    """Composite Gauss-Legendre; panels doubled until two levels agree.

    Returns (value, error estimate, scale) where scale integrates |f|.
    """
    xg, wg = legendre.leggauss(npts)

    def composite(panels):
        edges = np.linspace(a, b, panels + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        x = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
        w = (half[:, None] * wg[None, :]).ravel()
        fx = f(x)
        return np.sum(w * fx), np.sum(w * np.abs(fx))

    panels = 4
    prev, _ = composite(panels)
    while panels < max_panels:
        panels *= 2
        cur, scale = composite(panels)
        err = abs(cur - prev)
        if err <= rtol * max(scale, 1e-300):
            return cur, err, scale
        prev = cur
    raise QuadratureError(f"quadrature error {err:.3g} exceeds {rtol:g} relative")


def overlap_coupling(geom, pert, l1, j1, l2, j2, phase_mismatch=0.0, rtol=1e-8):
    """Matrix element of the index perturbation between two guide modes.

    The integrand factorizes, so the tensor-product quadrature reduces to
    three 1-D Gauss-Legendre integrals. ``phase_mismatch`` (kappa_1 - kappa_2)
    adds the longitudinal phase factor; at zero the kernel is real symmetric.
    """
    a, b = geom.a, geom.b
    sx = lambda x: (np.sin(l1 * math.pi * x / a) * np.sin(l2 * math.pi * x / a)
                    * (np.exp(-((x - pert.x0) / pert.alpha) ** 2)
                       - np.exp(-((x - a + pert.x0) / pert.alpha) ** 2)))
    sy = lambda y: (np.sin(j1 * math.pi * y / b) * np.sin(j2 * math.pi * y / b)
                    * np.exp(-((y - pert.y0) / pert.alpha) ** 2))
    zr = 12.0 * pert.beta
    sz = lambda z: np.exp(-((z - pert.z0) / pert.beta) ** 2) * np.exp(1j * phase_mismatch * (z - pert.z0))
    # symmetric integrand pieces make cancellation exact; measure error vs |f|
    ix, _, _ = _adaptive_gl(sx, 0.0, a, rtol)
    iy, _, _ = _adaptive_gl(sy, 0.0, b, rtol)
    iz, _, _ = _adaptive_gl(sz, pert.z0 - zr, pert.z0 + zr, rtol)
    norm = 4.0 / (a * b)
    return complex(pert.dn * norm * ix * iy * iz)


# ---------------------------------------------------------------------------
# uniaxial Lorentz design


def uniaxial_axes(eps_inf, omega_p, omega_rx, omega_ry):
    """(x-axis, y-axis) Lorentz models; the y axis has unit background."""
    return LorentzAxis(eps_inf, omega_p, omega_rx), LorentzAxis(1.0, omega_p, omega_ry)


def uniaxial_seed(eps_inf, omega_rx, omega_ry):
    """Closed-form tangency point: (omega_p, omega0)."""
    wp = math.sqrt((eps_inf - 1.0) * (omega_ry ** 2 - omega_rx ** 2) / 4.0)
    w0 = math.sqrt((omega_ry ** 2 + omega_rx ** 2) / 2.0)
    return wp, w0


@dataclass(frozen=True)
class UniaxialDesign:
    eps_inf: float
    omega_rx: float
    omega_ry: float
    omega_p: float
    omega0: float
    seed: Tuple[float, float]
    residuals: Tuple[float, float]
    iterations: int
    curvature: str

    @property
    def axes(self):
        return uniaxial_axes(self.eps_inf, self.omega_p, self.omega_rx, self.omega_ry)


def _curvature_pair(axis_x, axis_y, w, curvature, c):
    if curvature == "wavevector":
        kx = plane_wave(axis_x, c).taylor(w, 2)
        ky = plane_wave(axis_y, c).taylor(w, 2)
    elif curvature == "index":
        kx = index_series(axis_x, w, 2)
        ky = index_series(axis_y, w, 2)
    else:
        raise ValueError(f"unknown curvature criterion {curvature!r}")
    return 2.0 * kx[2], 2.0 * ky[2]


def uniaxial_residuals(eps_inf, omega_rx, omega_ry, omega_p, omega0, curvature="wavevector",
                       c=SPEED_OF_LIGHT):
    """Relative residuals (index match, curvature cancellation)."""
    ax, ay = uniaxial_axes(eps_inf, omega_p, omega_rx, omega_ry)
    nx = float(eval_index(ax, omega0))
    ny = float(eval_index(ay, omega0))
    cx, cy = _curvature_pair(ax, ay, omega0, curvature, c)
    return (nx - ny) / ny, (cx + cy) / (abs(cx) + abs(cy))


def uniaxial_design_solve(eps_inf, omega_rx, omega_ry, seed=None, curvature="wavevector",
                          c=SPEED_OF_LIGHT, tol=1e-12, max_iter=60):
    """Newton solve for (omega_p, omega0) giving equal indices and cancelling
    curvature, started from the closed-form tangency seed.

    ``curvature="wavevector"`` cancels kappa_x'' + kappa_y''; ``"index"``
    cancels n_x'' + n_y'' instead.
    """
    if not omega_ry > omega_rx:
        raise ValueError("need omega_ry > omega_rx")
    if not eps_inf > 1:
        raise ValueError("need eps_inf > 1")
    seed = uniaxial_seed(eps_inf, omega_rx, omega_ry) if seed is None else tuple(seed)
    scale = seed[1]
    x = np.array(seed, dtype=float) / scale

    def F(v):
        return np.array(uniaxial_residuals(eps_inf, omega_rx, omega_ry, v[0] * scale,
                                           v[1] * scale, curvature, c))

    it = 0
    fx = F(x)
    while it < max_iter and np.max(np.abs(fx)) > tol:
        J = np.empty((2, 2))
        for k in range(2):
            dh = 1e-7 * max(abs(x[k]), 1.0)
            e = np.zeros(2)
            e[k] = dh
            J[:, k] = (F(x + e) - F(x - e)) / (2 * dh)
        step = np.linalg.solve(J, -fx)
        lam = 1.0
        while True:
            try:
                trial = x + lam * step
                ft = F(trial)
                if np.max(np.abs(ft)) < np.max(np.abs(fx)) or lam < 1e-4:
                    break
            except DomainError:
                pass
            lam *= 0.5
            if lam < 1e-6:
                raise ConvergenceError("uniaxial Newton line search failed")
        x, fx = trial, ft
        it += 1
    if np.max(np.abs(fx)) > tol:
        raise ConvergenceError(f"uniaxial design residual {np.max(np.abs(fx)):.3g} after {it} steps")
    wp, w0 = x * scale
    ws = math.sqrt(omega_rx ** 2 + wp ** 2 / eps_inf)
    if not (ws < w0 < omega_ry):
        raise OrderingError(f"omega0={w0:.6g} outside ({ws:.6g}, {omega_ry:.6g})")
    return UniaxialDesign(eps_inf, omega_rx, omega_ry, float(wp), float(w0), seed,
                          tuple(float(v) for v in fx), it, curvature)


@dataclass(frozen=True)
class SpecialFrequencies:
    omega_s: float
    omega_0a: float
    omega_0b: float
    degenerate: bool


def special_frequencies(eps_inf, omega_rx, omega_ry, omega_p, rel_tol=1e-8, samples=4001):
    """x-axis index zero ``omega_s`` and the index crossings in (omega_s, omega_ry).

    A tangential touch (double root) is reported with ``degenerate=True``.
    """
    ws = math.sqrt(omega_rx ** 2 + omega_p ** 2 / eps_inf)
    ax, ay = uniaxial_axes(eps_inf, omega_p, omega_rx, omega_ry)
    lo, hi = ws * (1 + 1e-9), omega_ry * (1 - 1e-9)
    if not lo < hi:
        raise NoRootError("no frequency window above omega_s")

    def diff(w):
        return float(np.sqrt(ax.permittivity(w)) - np.sqrt(ay.permittivity(w)))

    grid = np.linspace(lo, hi, samples)
    d = np.array([diff(w) for w in grid])
    roots = [optimize.brentq(diff, grid[i], grid[i + 1], xtol=1e-14 * grid[i])
             for i in range(samples - 1) if np.sign(d[i]) != np.sign(d[i + 1]) and d[i] != 0]
    if len(roots) >= 2:
        return SpecialFrequencies(ws, float(roots[0]), float(roots[1]), False)
    i = int(np.argmax(d))
    a_, b_ = grid[max(i - 1, 0)], grid[min(i + 1, samples - 1)]
    res = optimize.minimize_scalar(lambda w: -diff(w), bounds=(a_, b_), method="bounded",
                                   options={"xatol": 1e-12 * b_})
    peak = -res.fun
    n_ref = float(np.sqrt(ay.permittivity(res.x)))
    if abs(peak) <= rel_tol * n_ref:
        return SpecialFrequencies(ws, float(res.x), float(res.x), True)
    if peak > 0:
        r1 = optimize.brentq(diff, lo, res.x, xtol=1e-14 * res.x)
        r2 = optimize.brentq(diff, res.x, hi, xtol=1e-14 * res.x)
        return SpecialFrequencies(ws, float(r1), float(r2), abs(r2 - r1) <= rel_tol * res.x)
    raise NoRootError("index curves do not intersect above omega_s")
