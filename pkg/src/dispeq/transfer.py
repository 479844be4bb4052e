"""Transfer-matrix algebra for mode propagation and scattering.

Matrices act on column vectors of mode amplitudes from the left, so a
sequence "scatter, propagate L1, scatter, propagate L2" is the product
``U(L2) S U(L1) S`` read right to left. Propagation uses the phase-delay
form ``exp(-i kappa L)``.

The mean wavevector is never embedded in a product: every
:class:`TransferMatrix` carries it separately as ``common_phase`` (a phase
delay in radians), and :meth:`TransferMatrix.full` multiplies it back in.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import series
from .errors import DetNotUnimodular

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)


@dataclass(frozen=True)
class TransferMatrix:
    matrix: np.ndarray
    common_phase: float = 0.0

    @property
    def dim(self):
        return self.matrix.shape[0]

    def full(self):
        return self.matrix * np.exp(-1j * self.common_phase)

    @property
    def unitarity_defect(self):
        m = self.matrix
        return float(np.linalg.norm(m.conj().T @ m - np.eye(self.dim)))

    @property
    def det(self):
        return complex(np.linalg.det(self.matrix))

    def __matmul__(self, other):
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch {self.dim} vs {other.dim}")
        return TransferMatrix(self.matrix @ other.matrix, self.common_phase + other.common_phase)

    def power(self, r):
        return TransferMatrix(np.linalg.matrix_power(self.matrix, r), r * self.common_phase)


# ---------------------------------------------------------------------------
# generators


@dataclass(frozen=True)
class PhaseGenerator:
    """Traceless diagonal phase rate built from ``N`` dispersion laws."""

    laws: tuple

    @property
    def dim(self):
        return len(self.laws)

    def kappas(self, w):
        return np.array([law(w) for law in self.laws], dtype=float)

    def __call__(self, w):
        k = self.kappas(w)
        return k - k.mean()

    def common(self, w):
        return float(self.kappas(w).mean())


@dataclass(frozen=True)
class PairPhase:
    """Two-mode phase rates given directly as (F_I, F_z) callables."""

    fi: Callable[[float], float]
    fz: Callable[[float], float]
    dim: int = 2

    def __call__(self, w):
        z = self.fz(w)
        return np.array([z, -z])

    def common(self, w):
        return float(self.fi(w))


def pair_phase(coeffs):
    """PairPhase from :class:`~dispeq.dispersion.ModePairCoefficients`."""
    return PairPhase(coeffs.FI, coeffs.Fz)


@dataclass(frozen=True)
class Pauli2Scatterer:
    """``exp(i F_x(w) sigma_x)`` with ``F_x`` given by derivatives at ``omega0``."""

    omega0: float
    derivatives: tuple = (math.pi / 2,)
    dim: int = 2

    def fx(self, w):
        return float(series.evaluate(series.to_coefficients(self.derivatives), w - self.omega0))

    def action(self, w):
        return self.fx(w) * SIGMA_X


@dataclass(frozen=True)
class GenericScatterer:
    """``exp(i s(w))`` for a Hermitian N x N action matrix ``s(w)``."""

    action_fn: Callable[[float], np.ndarray]
    dim: int
    hermitian_tol: float = 1e-12

    def action(self, w):
        s = np.asarray(self.action_fn(w), dtype=complex)
        if np.max(np.abs(s - s.conj().T)) > self.hermitian_tol * max(1.0, np.max(np.abs(s))):
            raise ValueError("scattering action matrix is not Hermitian")
        return s


def expi_hermitian(h):
    """``exp(i h)`` for Hermitian ``h`` (closed form for 2x2)."""
    h = np.asarray(h, dtype=complex)
    if h.shape == (2, 2):
        a0 = 0.5 * (h[0, 0] + h[1, 1]).real
        v = np.array([h[0, 1].real, -h[0, 1].imag, 0.5 * (h[0, 0] - h[1, 1]).real])
        r = float(np.linalg.norm(v))
        if r == 0.0:
            return np.exp(1j * a0) * SIGMA_I
        n = v / r
        ns = n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z
        return np.exp(1j * a0) * (math.cos(r) * SIGMA_I + 1j * math.sin(r) * ns)
    e, v = np.linalg.eigh(h)
    return (v * np.exp(1j * e)) @ v.conj().T


# ---------------------------------------------------------------------------
# building blocks


def propagation_matrix(phase, length, w):
    """Propagation over ``length``; ``phase`` is a generator or an (F_I, F_z) pair."""
    if length < 0:
        raise ValueError("length must be non-negative")
    if isinstance(phase, tuple):
        fi, fz = phase
        rates, common = np.array([fz, -fz]), fi
    else:
        rates, common = phase(w), phase.common(w)
    return TransferMatrix(np.diag(np.exp(-1j * length * rates)), length * common)


def scatterer_matrix(spec, w):
    return TransferMatrix(expi_hermitian(spec.action(w)))


def composite_matrix(lengths, spec, phase, w, repetitions=1):
    """Scatter, propagate ``lengths[0]``, scatter, propagate ``lengths[1]``, ...

    repeated ``repetitions`` times.
    """
    if spec.dim != phase.dim:
        raise ValueError(f"dimension mismatch: scatterer {spec.dim}, modes {phase.dim}")
    S = expi_hermitian(spec.action(w))
    rates = phase(w)
    m = np.eye(spec.dim, dtype=complex)
    for L in lengths:
        m = (np.exp(-1j * L * rates)[:, None] * S) @ m
    common = phase.common(w) * float(np.sum(lengths))
    if repetitions != 1:
        m = np.linalg.matrix_power(m, repetitions)
    return TransferMatrix(m, repetitions * common)


# ---------------------------------------------------------------------------
# characteristic polynomial


def char_poly_c1(T):
    m = T.matrix if isinstance(T, TransferMatrix) else np.asarray(T)
    if m.shape != (2, 2):
        raise ValueError("char_poly_c1 is defined for 2x2 matrices")
    return complex(-np.trace(m))


@dataclass(frozen=True)
class CharPoly:
    """``det(lambda I - T) = lambda^N + sum_n c[n] lambda^n + (-1)^N det T``."""

    coeffs: dict
    det_phase: float

    def __getitem__(self, n):
        return self.coeffs[n]


def faddeev_leverrier(m):
    """Monic characteristic polynomial coefficients [1, p1, ..., pN]."""
    n = m.shape[0]
    p = [1.0 + 0j]
    M = np.zeros_like(m)
    I = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        M = m @ M + p[-1] * I
        p.append(-np.trace(m @ M) / k)
    return np.array(p)


def char_poly_coeffs(T, tol=1e-8):
    m = T.matrix if isinstance(T, TransferMatrix) else np.asarray(T, dtype=complex)
    d = np.linalg.det(m)
    if abs(abs(d) - 1.0) > tol:
        raise DetNotUnimodular(f"|det T| = {abs(d):.12g}")
    p = faddeev_leverrier(m)
    n = m.shape[0]
    return CharPoly({k: complex(p[n - k]) for k in range(1, n)}, float(np.angle(d)))


def det_phase_sweep(matrices):
    """arg det along a sweep, unwrapped continuously."""
    return np.unwrap([np.angle(np.linalg.det(getattr(t, "matrix", t))) for t in matrices])


def analytic_c1(X, fx, truncated=False):
    """Closed-form ``-tr T`` for the three-scatterer two-mode sequence.

    ``X`` are the phase lengths ``F_z L``. ``truncated`` drops the cos^3
    terms, which are third order when ``F_x`` sits near pi/2.
    """
    x1, x2, x3 = X
    c = math.cos(fx)
    s = (math.cos(x1 - x2 - x3) + math.cos(x1 + x2 - x3) + math.cos(x1 - x2 + x3))
    if truncated:
        return 2.0 * c * s
    return 2.0 * (c - c ** 3) * s - 2.0 * c ** 3 * math.cos(x1 + x2 + x3)


# ---------------------------------------------------------------------------
# bases


@dataclass(frozen=True)
class PauliDecomposition:
    c_i: complex
    c_x: complex
    c_y: complex
    c_z: complex

    def matrix(self):
        return self.c_i * SIGMA_I + self.c_x * SIGMA_X + self.c_y * SIGMA_Y + self.c_z * SIGMA_Z

    def as_tuple(self):
        return (self.c_i, self.c_x, self.c_y, self.c_z)


def pauli_decompose(T):
    m = T.matrix if isinstance(T, TransferMatrix) else np.asarray(T)
    if m.shape != (2, 2):
        raise ValueError("pauli_decompose needs a 2x2 matrix")
    return PauliDecomposition(np.trace(m) / 2, *(np.trace(s @ m) / 2 for s in PAULI))


def gell_mann(n):
    """Traceless Hermitian basis with ``tr(l_a l_b) = 2 delta_ab``; Pauli order for n=2."""
    if n == 2:
        return list(PAULI)
    out = []
    for j in range(n):
        for k in range(j + 1, n):
            s = np.zeros((n, n), dtype=complex)
            s[j, k] = s[k, j] = 1
            out.append(s)
            a = np.zeros((n, n), dtype=complex)
            a[j, k], a[k, j] = -1j, 1j
            out.append(a)
    for l in range(1, n):
        d = np.zeros((n, n), dtype=complex)
        d[np.arange(l), np.arange(l)] = 1
        d[l, l] = -l
        out.append(d * math.sqrt(2.0 / (l * (l + 1))))
    return out


def basis_decompose(m):
    """(identity coefficient, traceless coefficients) in the Gell-Mann basis."""
    m = np.asarray(m)
    n = m.shape[0]
    return np.trace(m) / n, np.array([np.trace(b @ m) / 2 for b in gell_mann(n)])


def basis_compose(c0, coeffs, n):
    out = c0 * np.eye(n, dtype=complex)
    for c, b in zip(coeffs, gell_mann(n)):
        out = out + c * b
    return out


def is_nondegenerate_root(T, tol=1e-8):
    """True when ``T`` is a scalar times a matrix whose eigenvalues are the N
    distinct N-th roots of unity."""
    m = T.matrix if isinstance(T, TransferMatrix) else np.asarray(T)
    n = m.shape[0]
    ev = np.linalg.eigvals(m)
    ratio = ev / ev[0]
    roots = np.exp(2j * np.pi * np.arange(n) / n)
    used = set()
    for r in ratio:
        k = int(np.argmin(np.abs(roots - r)))
        if abs(roots[k] - r) > tol or k in used:
            return False
        used.add(k)
    return True
