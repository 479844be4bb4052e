"""Scatterer placement: interval lengths that make the period matrix a
nondegenerate root of identity up to a chosen frequency order.

Two solvers live here. :func:`solve_reduced` handles the two-mode,
three-scatterer design in closed form (phase lengths ``X = F_z L``).
:func:`solve_general` assembles the characteristic-polynomial condition
stack numerically for any number of modes and solves it by multi-start
least squares.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize
from scipy.stats import qmc

from . import series
from .errors import ConvergenceError, DegenerateSystemError, InfeasibleError
from .transfer import analytic_c1, composite_matrix, faddeev_leverrier

_ARG = np.array([[1.0, -1.0, -1.0], [1.0, 1.0, -1.0], [1.0, -1.0, 1.0]])


@dataclass
class PlacementSolution:
    lengths: np.ndarray
    residuals: np.ndarray
    winding: Optional[float]
    iterations: int
    step_norm: float
    seed_index: int
    X: Optional[np.ndarray] = None
    degenerate_rows: list = field(default_factory=list)
    labels: list = field(default_factory=list)

    @property
    def max_residual(self):
        return float(np.max(np.abs(self.residuals))) if len(self.residuals) else 0.0

    @property
    def period(self):
        return float(np.sum(self.lengths))


# ---------------------------------------------------------------------------
# reduced two-mode system


def reduced_system_residuals(X1, X2, X3):
    a = _ARG @ np.array([X1, X2, X3], dtype=float)
    return float(np.sum(np.cos(a))), float(np.sum(a * np.sin(a)))


def _reduced_F(X, target):
    a = _ARG @ X
    return np.array([np.sum(np.cos(a)), np.sum(a * np.sin(a)), np.sum(X) - target])


def _reduced_J(X):
    a = _ARG @ X
    j1 = -np.sin(a) @ _ARG
    j2 = (np.sin(a) + a * np.cos(a)) @ _ARG
    return np.vstack([j1, j2, np.ones(3)])


def _newton(F, J, x, tol, max_iter=100):
    fx = F(x)
    step = np.inf
    for it in range(max_iter):
        if np.max(np.abs(fx)) < tol:
            return x, fx, it, step
        try:
            dx = np.linalg.solve(J(x), -fx)
        except np.linalg.LinAlgError:
            return x, fx, it, step
        lam = 1.0
        while lam > 1e-8:
            xt = x + lam * dx
            ft = F(xt)
            if np.max(np.abs(ft)) < np.max(np.abs(fx)):
                break
            lam *= 0.5
        x, fx, step = xt, ft, float(np.linalg.norm(lam * dx))
    return x, fx, max_iter, step


def simplex_seeds(total, count, dim=3, seed=0):
    """Low-discrepancy points on ``{x >= 0, sum x = total}``."""
    u = qmc.Sobol(dim - 1, scramble=True, seed=seed).random(count)
    # sorted-uniform spacings map the cube onto the simplex
    s = np.sort(u, axis=1)
    edges = np.hstack([np.zeros((count, 1)), s, np.ones((count, 1))])
    return total * np.diff(edges, axis=1)


def solve_reduced(m, fi, fz, seeds=64, tol=1e-10, initial=None, max_iter=100):
    """Solve the reduced system plus the winding constraint
    ``(X1 + X2 + X3) F_I / F_z = 2 m pi``.

    ``initial`` (a phase-length triple) is tried before the quasi-random
    seeds. Returns the first solution with all ``X > 0``.
    """
    if fz == 0:
        raise ValueError("F_z(omega0) must be nonzero")
    target = 2.0 * math.pi * m * fz / fi
    if not target > 0:
        raise InfeasibleError(f"winding m={m} gives sum X = {target:.6g}; no positive lengths")
    starts = [] if initial is None else [np.asarray(initial, dtype=float)]
    starts.extend(simplex_seeds(target, seeds))
    F = lambda x: _reduced_F(x, target)
    for idx, x0 in enumerate(starts):
        x, fx, it, step = _newton(F, _reduced_J, x0.copy(), tol, max_iter)
        if np.max(np.abs(fx)) < tol and np.all(x > 0):
            seed_index = idx - (initial is not None)
            return PlacementSolution(
                lengths=x / fz, residuals=fx[:2], winding=float(np.sum(x) * fi / fz),
                iterations=it, step_norm=step, seed_index=seed_index, X=x,
                labels=["r1", "r2"],
            )
    raise ConvergenceError(f"no seed converged to |r| < {tol:g} with positive X")


# ---------------------------------------------------------------------------
# general condition stack


@dataclass(frozen=True)
class PlacementProblem:
    """Inputs for :func:`solve_general`.

    ``phase`` is a PhaseGenerator/PairPhase; ``scatterer`` a Pauli2Scatterer
    or GenericScatterer. ``count`` defaults to ``N * order``. ``step`` is
    the finite-difference base step (default ``1e-3 * omega0``).
    ``truncated`` uses the closed-form two-mode c1 without cos^3 terms
    (three scatterers, Pauli2 only).
    """

    phase: object
    scatterer: object
    omega0: float
    order: int
    winding: Optional[int] = None
    count: Optional[int] = None
    step: Optional[float] = None
    truncated: bool = False

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order k must be >= 1")
        if self.count is not None and self.count < 1:
            raise ValueError("scatterer count must be >= 1")

    @property
    def dim(self):
        return self.phase.dim

    @property
    def M(self):
        return self.count if self.count is not None else self.dim * self.order

    @property
    def h(self):
        return self.step if self.step is not None else 1e-3 * abs(self.omega0)


def _su_coeffs(problem, lengths, w, ref):
    """Independent char-poly coefficients of the det-normalized period matrix."""
    n = problem.dim
    if problem.truncated:
        fz = problem.phase(w)[0]
        c1 = analytic_c1(fz * np.asarray(lengths), problem.scatterer.fx(w), truncated=True)
        return np.array([c1 + 0j])
    m = composite_matrix(lengths, problem.scatterer, problem.phase, w).matrix
    d = np.linalg.det(m)
    phi = ref + np.angle(d * np.exp(-1j * ref))
    m = m * np.exp(-1j * phi / n)
    p = faddeev_leverrier(m)
    return np.array([p[n - j] for j in range(1, n // 2 + 1)])


def condition_labels(problem):
    n, labels = problem.dim, []
    for j in range(1, n // 2 + 1):
        for p in range(problem.order):
            labels.append(f"Re d{p} c{j}")
            if not (2 * j == n or problem.truncated):
                labels.append(f"Im d{p} c{j}")
    if problem.winding is not None:
        labels.append("winding")
    return labels


def condition_stack(problem, lengths):
    """All imposed conditions at ``lengths``: for each independent coefficient
    c_n and each order p < k, Re/Im of the p-th frequency derivative at
    omega0 (det-normalized), then the winding row when requested.

    For even N the middle coefficient is real after normalization, so only
    its real part is a condition.
    """
    lengths = np.asarray(lengths, dtype=float)
    w0, n = problem.omega0, problem.dim
    ref = 0.0
    if not problem.truncated:
        ref = float(np.angle(np.linalg.det(
            composite_matrix(lengths, problem.scatterer, problem.phase, w0).matrix)))
    d = series.derivatives(lambda w: _su_coeffs(problem, lengths, w, ref), w0,
                           problem.order - 1, problem.h)
    rows = []
    for j in range(1, n // 2 + 1):
        for p in range(problem.order):
            v = d[p][j - 1]
            rows.append(v.real)
            if not (2 * j == n or problem.truncated):
                rows.append(v.imag)
    if problem.winding is not None:
        rows.append(problem.phase.common(w0) * lengths.sum() - 2 * math.pi * problem.winding)
    return np.array(rows, dtype=float)


def det_phase_conditions(problem, lengths):
    """arg det of the period matrix at omega0 (wrapped to a 2 pi q offset)
    and its frequency derivatives. These do not depend on the lengths when
    the phase generator is traceless."""
    lengths = np.asarray(lengths, dtype=float)
    w0 = problem.omega0
    ref = np.linalg.det(composite_matrix(lengths, problem.scatterer, problem.phase, w0).matrix)

    def phase(w):
        d = np.linalg.det(composite_matrix(lengths, problem.scatterer, problem.phase, w).matrix)
        return np.angle(d / ref) + np.angle(ref)

    d = series.derivatives(phase, w0, problem.order - 1, problem.h)
    q = round(d[0] / (2 * math.pi))
    return np.array([d[0] - 2 * math.pi * q] + [float(x) for x in d[1:]])


def default_seed_span(problem):
    rates = np.abs(problem.phase(problem.omega0))
    return 2 * math.pi * (problem.order + 1) / max(float(rates.max()), 1e-300)


def solve_general(problem, seeds=64, tol=1e-8, span=None, threads=1, rank_tol=1e-7, batch=8):
    """Multi-start least squares on the condition stack with ``L > 0``.

    Conditions that vanish at every probe point are identities and are
    dropped (reported in ``degenerate_rows``). Seeds run in fixed batches
    of ``batch``; the first batch holding a converged, full-rank point
    ends the search and its shortest total length wins (ties go to the
    lower seed index). The batch size, not ``threads``, fixes the result.
    """
    M = problem.M
    span = default_seed_span(problem) if span is None else span
    labels = condition_labels(problem)
    pts = qmc.Sobol(M, scramble=True, seed=0).random(seeds) * span
    pts = np.clip(pts, 1e-6 * span, None)

    probes = np.random.default_rng(12345).uniform(0.05, 1.0, size=(3, M)) * span
    pv = np.array([condition_stack(problem, p) for p in probes])
    alive = np.any(np.abs(pv) > 1e-10, axis=0)
    dropped = [l for l, a in zip(labels, alive) if not a]
    kept = [l for l, a in zip(labels, alive) if a]

    if not alive.any():
        x = pts[0]
        return PlacementSolution(lengths=x, residuals=condition_stack(problem, x), winding=None,
                                 iterations=0, step_norm=0.0, seed_index=0,
                                 degenerate_rows=dropped, labels=labels)

    fun = lambda x: condition_stack(problem, x)[alive]

    def run(x0):
        try:
            return optimize.least_squares(fun, x0, bounds=(0.0, np.inf), method="trf",
                                          xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=100 * M)
        except (ValueError, np.linalg.LinAlgError, ArithmeticError):
            return None

    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    best, n_conv = None, 0
    try:
        for start in range(0, seeds, batch):
            chunk = pts[start:start + batch]
            results = list(pool.map(run, chunk)) if pool else [run(x0) for x0 in chunk]
            for j, r in enumerate(results):
                if r is None or not np.all(np.isfinite(r.fun)):
                    continue
                if np.max(np.abs(r.fun)) >= tol or np.min(r.x) <= 1e-9 * span:
                    continue
                n_conv += 1
                sv = np.linalg.svd(r.jac, compute_uv=False)
                if np.sum(sv > rank_tol * sv[0]) < min(r.jac.shape):
                    continue
                if best is None or r.x.sum() < best[1].x.sum() - 1e-12:
                    best = (start + j, r)
            if best is not None:
                break
    finally:
        if pool:
            pool.shutdown()
    if best is None and n_conv:
        raise DegenerateSystemError(
            "Jacobian rank-deficient at every converged point; relax F_x(omega0)=pi/2 "
            "or the single-Pauli scatterer form to lift the degeneracy")
    if best is None:
        raise ConvergenceError(f"no seed of {seeds} converged below {tol:g}")
    idx, r = best
    full = condition_stack(problem, r.x)
    wind = problem.phase.common(problem.omega0) * r.x.sum()
    X = None
    if problem.dim == 2:
        X = problem.phase(problem.omega0)[0] * r.x
    return PlacementSolution(lengths=r.x, residuals=full[alive], winding=float(wind),
                             iterations=int(r.nfev), step_norm=float(np.linalg.norm(r.x - pts[idx])),
                             seed_index=idx, X=X, degenerate_rows=dropped, labels=kept)
