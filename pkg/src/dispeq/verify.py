"""Distance of a period matrix from a scalar phase: Taylor fits of the
matrix logarithm, residual-order estimation and pulse propagation.

A period matrix is written as ``T(w) = exp(-i (theta(w) I + sum_a g_a(w) l_a))``
with ``l_a`` the Pauli (N=2) or Gell-Mann matrices, so ``theta`` is the
common phase delay and ``g`` the traceless residual generator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import linalg

from .errors import AliasError, BranchError
from .transfer import TransferMatrix, gell_mann

_BRANCH_MARGIN = 0.1


def _split(m):
    """(stripped matrix, common delay phase) from a TransferMatrix or array."""
    if isinstance(m, TransferMatrix):
        return np.asarray(m.matrix, dtype=complex), float(m.common_phase)
    return np.asarray(m, dtype=complex), 0.0


def _generator(V, basis):
    """Traceless Hermitian ``G`` with ``V = exp(-i G)``, as basis coefficients."""
    T, Z = linalg.schur(V, output="complex")
    ph = -np.angle(np.diag(T))
    if np.max(np.abs(ph)) > math.pi - _BRANCH_MARGIN:
        raise BranchError(f"eigenphase {np.max(np.abs(ph)):.4f} near pi; shrink the window")
    G = (Z * ph) @ Z.conj().T
    return np.array([np.trace(b @ G).real / 2 for b in basis])


def _closest_branch(m, det_phase, n):
    """Branch index q so that ``m exp(i(-phi + 2 pi q)/n)`` is closest to I."""
    best, qbest = np.inf, 0
    for q in range(n):
        V = m * np.exp(1j * (-det_phase + 2 * math.pi * q) / n)
        d = np.linalg.norm(V - np.eye(n))
        if d < best - 1e-12:
            best, qbest = d, q
    return qbest


def decompose_sweep(sweep, omegas, omega0):
    """Scalar delay phase and generator coefficients along an ordered grid.

    Returns (theta, g, q) with theta unwrapped by continuity from the
    sample nearest ``omega0``.
    """
    mats, commons = zip(*(_split(sweep(w)) for w in omegas))
    n = mats[0].shape[0]
    basis = gell_mann(n)
    i0 = int(np.argmin(np.abs(np.asarray(omegas) - omega0)))
    phi = np.unwrap(np.array([np.angle(np.linalg.det(m)) for m in mats]))
    phi = phi - phi[i0] + np.angle(np.linalg.det(mats[i0]))
    q = _closest_branch(mats[i0], phi[i0], n)
    theta_s = (-phi + 2 * math.pi * q) / n
    theta = np.array(commons) + theta_s
    g = np.array([_generator(m * np.exp(1j * t), basis) for m, t in zip(mats, theta_s)])
    return theta, g, q


@dataclass
class ResidualFit:
    """Polynomial model of the scalar delay phase and the traceless generator.

    ``theta[j]`` and ``generator[a, j]`` multiply ``(w - omega0)**j``.
    """

    omega0: float
    window: float
    samples: int
    theta: np.ndarray
    generator: np.ndarray
    fit_residual: float
    condition: float
    halvings: int
    dim: int

    def theta_coeff(self, j):
        return float(self.theta[j]) if j < len(self.theta) else 0.0

    def coefficients(self, j):
        """(scalar, generator...) coefficients of order ``j``."""
        return np.concatenate([[self.theta_coeff(j)], self.generator[:, j]])

    def model(self, w):
        d = w - self.omega0
        powers = d ** np.arange(len(self.theta))
        th = float(self.theta @ powers)
        G = sum(c * b for c, b in zip(self.generator @ powers, gell_mann(self.dim)))
        return np.exp(-1j * th) * linalg.expm(-1j * G)

    def group_delay(self):
        return self.theta_coeff(1)


def _polyfit(x, y, deg):
    s = np.max(np.abs(x))
    V = np.vander(x / s, deg + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(V, y, rcond=None)
    resid = np.max(np.abs(V @ coef - y)) if len(y) else 0.0
    scale = s ** -np.arange(deg + 1)
    coef = coef * (scale[:, None] if coef.ndim == 2 else scale)
    return coef, float(resid), float(np.linalg.cond(V))


def residual_fit(sweep, omega0, max_order=3, window=0.02, samples=41, guard=2,
                 tol=1e-9, max_halvings=6):
    """Fit ``theta`` and the generator to degree ``max_order + guard`` on
    ``|w - omega0| <= window * |omega0|``.

    The window halves on branch trouble or while the fit residual exceeds
    ``tol`` relative to the largest sampled phase excursion.
    """
    if samples < max_order + guard + 2:
        raise ValueError("too few samples for the requested degree")
    half = window * abs(omega0)
    deg = max_order + guard
    last = None
    for k in range(max_halvings + 1):
        omegas = omega0 + np.linspace(-half, half, samples)
        try:
            theta, g, _ = decompose_sweep(sweep, omegas, omega0)
        except BranchError:
            if k == max_halvings:
                raise
            half /= 2
            continue
        x = omegas - omega0
        y = np.column_stack([theta, g])
        coef, resid, cond = _polyfit(x, y, deg)
        span = max(np.max(np.abs(y - y[samples // 2])), 1.0)
        last = ResidualFit(omega0, half, samples, coef[:, 0], coef[:, 1:].T.copy(),
                           resid, cond, k, int(round(math.sqrt(g.shape[1] + 1))))
        if resid <= tol * span:
            break
        half /= 2
    return last


@dataclass
class OrderEstimate:
    slope: float
    r2: float
    deltas: np.ndarray
    norms: np.ndarray


def residual_order(sweep, omega0, decades=(3e-5, 3e-3), points=9):
    """Log-log slope of the generator deviation from its value at omega0.

    Offsets ``+-delta`` with ``delta / |omega0|`` log-spaced over ``decades``.
    """
    rel = np.geomspace(decades[0], decades[1], points)
    deltas = np.concatenate([-rel[::-1], rel]) * abs(omega0)
    m0, _ = _split(sweep(omega0))
    n = m0.shape[0]
    basis = gell_mann(n)
    phi0 = np.angle(np.linalg.det(m0))
    q = _closest_branch(m0, phi0, n)
    g0 = _generator(m0 * np.exp(1j * (-phi0 + 2 * math.pi * q) / n), basis)
    V0 = m0 * np.exp(1j * (-phi0 + 2 * math.pi * q) / n)
    norms = []
    for d in deltas:
        m, _ = _split(sweep(omega0 + d))
        phi = np.angle(np.linalg.det(m))
        # branch nearest the reference at omega0
        cands = [m * np.exp(1j * (-phi + 2 * math.pi * j) / n) for j in range(n)]
        V = min(cands, key=lambda c: np.linalg.norm(c - V0))
        norms.append(np.linalg.norm(_generator(V, basis) - g0))
    norms = np.array(norms)
    x = np.log(np.abs(deltas))
    y = np.log(np.maximum(norms, 1e-300))
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    fit = A @ coef
    r2 = 1.0 - np.sum((y - fit) ** 2) / np.sum((y - y.mean()) ** 2)
    return OrderEstimate(float(coef[0]), float(r2), deltas, norms)


# ---------------------------------------------------------------------------
# pulses


@dataclass(frozen=True)
class PulseSpec:
    """Gaussian pulse: power spectrum RMS width ``bandwidth`` about ``omega0``.

    ``span`` is the spectral window in units of ``bandwidth``.
    """

    omega0: float
    bandwidth: float
    amplitudes: tuple = (1.0, 0.0)
    samples: int = 2048
    span: float = 16.0

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        if self.span < 6:
            raise ValueError("spectral window must cover at least 6 RMS bandwidths")
        if self.samples < 16:
            raise ValueError("need at least 16 samples")


@dataclass
class PulseResult:
    times: np.ndarray
    fields: np.ndarray
    energy: float
    centroid: float
    rms_width: float
    mode_centroids: np.ndarray
    mode_widths: np.ndarray
    input_energy: float
    input_centroid: float
    input_rms_width: float
    reference: Optional["PulseResult"] = None


def _moments(t, intensity):
    w = intensity.sum()
    if w == 0:
        return math.nan, math.nan
    c = float((t * intensity).sum() / w)
    return c, float(math.sqrt(max(((t - c) ** 2 * intensity).sum() / w, 0.0)))


def _delay_phase(structure, w, periods):
    m, common = _split(structure(w))
    n = m.shape[0]
    return periods * (common - np.angle(np.linalg.det(m)) / n)


def _to_time(spec_vals, dw):
    # sum_k B_k exp(i D_k t_m), D_k = (k - n/2) dw, t_m = m dt, m = -n/2..n/2-1
    n = spec_vals.shape[0]
    e = n * np.fft.ifft(spec_vals, axis=0)
    m = np.arange(-n // 2, n // 2)
    sign = np.where(m % 2 == 0, 1.0, -1.0)
    return e[m % n] * sign[:, None] * dw


def _edge_check(intensity, frac=0.025, limit=1e-6):
    n = len(intensity)
    k = max(1, int(frac * n))
    tot = intensity.sum()
    if tot > 0 and (intensity[:k].sum() + intensity[-k:].sum()) / tot > limit:
        raise AliasError("pulse energy reaches the time-window edge; widen the spectral sampling")


def _single(spec, structure, periods):
    n = spec.samples
    dw = spec.span * spec.bandwidth / n
    D = (np.arange(n) - n // 2) * dw
    amp = np.exp(-D ** 2 / (4 * spec.bandwidth ** 2))
    a_in = np.asarray(spec.amplitudes, dtype=complex)
    a_in = a_in / np.linalg.norm(a_in)
    dt = 2 * math.pi / (n * dw)
    t = np.arange(-n // 2, n // 2) * dt

    if structure is None or periods == 0:
        tau = 0.0
        out = amp[:, None] * a_in[None, :]
    else:
        h = 1e-3 * spec.bandwidth
        tau = (_delay_phase(structure, spec.omega0 + h, periods)
               - _delay_phase(structure, spec.omega0 - h, periods)) / (2 * h)
        out = np.empty((n, len(a_in)), dtype=complex)
        for k, d in enumerate(D):
            tm = structure(spec.omega0 + d)
            m, common = _split(tm)
            p = np.linalg.matrix_power(m, periods)
            out[k] = (p @ a_in) * np.exp(-1j * (periods * common - tau * d))
        out *= amp[:, None]
    fields = _to_time(out, dw)
    inten = np.abs(fields) ** 2
    _edge_check(inten.sum(axis=1))
    times = t + tau
    c, w = _moments(times, inten.sum(axis=1))
    mc = np.array([_moments(times, inten[:, j])[0] for j in range(inten.shape[1])])
    mw = np.array([_moments(times, inten[:, j])[1] for j in range(inten.shape[1])])
    return times, fields, float(inten.sum() * dt), c, w, mc, mw


def propagate_pulse(spec, structure, periods, reference=None):
    """Send the pulse through ``periods`` copies of ``structure`` (w -> period matrix).

    Times are absolute; the computation runs in a frame retarded by the
    scalar group delay so the output stays centred in the window.
    ``reference`` (w -> matrix) is run the same way, e.g. the scatterer-free guide.
    """
    t0, f0, e0, c0, w0, _, _ = _single(spec, None, 0)
    times, fields, e, c, w, mc, mw = _single(spec, structure, periods)
    ref = propagate_pulse(spec, reference, periods) if reference is not None else None
    return PulseResult(times, fields, e, c, w, mc, mw, e0, c0, w0, ref)
