import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import linalg

from dispeq.errors import AliasError, BranchError
from dispeq.transfer import SIGMA_X, SIGMA_Z, TransferMatrix, gell_mann
from dispeq.verify import (
    PulseSpec,
    decompose_sweep,
    propagate_pulse,
    residual_fit,
    residual_order,
)

W0 = 3.0


def synthetic(theta, gen, n=2, split=0.0):
    """Sweep with polynomial scalar phase and generator; ``split`` of the
    scalar phase is carried as TransferMatrix.common_phase."""
    basis = gell_mann(n)

    def f(w):
        d = w - W0
        th = np.polyval(theta[::-1], d)
        G = sum(np.polyval(c[::-1], d) * b for c, b in zip(gen, basis))
        m = np.exp(-1j * (1 - split) * th) * linalg.expm(-1j * G)
        return TransferMatrix(m, split * th)
    return f


def test_fit_recovers_known_coefficients():
    theta = np.array([0.4, 12.0, 0.0, 30.0])
    gen = np.array([[0.1, 0.0, 0.0, 5.0], [0.0, 0.0, 0.0, -3.0], [0.2, 0.0, 0.0, 0.5]])
    fit = residual_fit(synthetic(theta, gen, split=0.7), W0)
    np.testing.assert_allclose(fit.theta[:4], theta, atol=1e-6)
    np.testing.assert_allclose(fit.generator[:, :4], gen, atol=1e-6)
    assert fit.group_delay() == pytest.approx(12.0, abs=1e-8)


def test_fit_three_modes():
    theta = np.array([1.0, 5.0, 0.3])
    gen = np.zeros((8, 3))
    gen[0] = [0.2, 0.0, 1.0]
    gen[7] = [-0.1, 0.5, 0.0]
    fit = residual_fit(synthetic(theta, gen, n=3), W0, max_order=2)
    np.testing.assert_allclose(fit.theta[:3], theta, atol=1e-7)
    np.testing.assert_allclose(fit.generator[:, :3], gen, atol=1e-7)
    assert fit.dim == 3


def test_fit_model_reproduces_sweep(period, setup):
    fit = residual_fit(period, setup.omega0)
    for d in (-0.3, 0.0, 0.4):
        w = setup.omega0 + d * fit.window
        np.testing.assert_allclose(fit.model(w), period(w).full(), atol=1e-8)


def test_decompose_scalar_branch():
    # a pure scalar delay has zero generator on every branch choice
    f = synthetic(np.array([2.9, 40.0]), np.zeros((3, 2)))
    om = W0 + np.linspace(-0.05, 0.05, 11)
    theta, g, q = decompose_sweep(f, om, W0)
    np.testing.assert_allclose(theta, 2.9 + 40 * (om - W0), atol=1e-12)
    assert np.max(np.abs(g)) < 1e-12


def test_branch_error_when_generator_wraps():
    f = lambda w: linalg.expm(-1j * 60.0 * (w - W0) * SIGMA_Z)
    with pytest.raises(BranchError):
        residual_fit(f, W0, max_halvings=0)
    # halving the window recovers
    fit = residual_fit(f, W0, max_order=1)
    assert fit.generator[2, 1] == pytest.approx(60.0, rel=1e-9)
    assert fit.halvings >= 1


@pytest.mark.parametrize("p", [1, 2, 3])
def test_residual_order_synthetic(p):
    gen = np.zeros((3, p + 1))
    gen[0, p] = 2.0
    gen[2, 0] = 0.3
    est = residual_order(synthetic(np.array([0.0, 5.0]), gen), W0)
    assert est.slope == pytest.approx(p, abs=0.02)
    assert est.r2 > 0.9999


def test_pulse_spec_validation():
    with pytest.raises(ValueError):
        PulseSpec(1.0, 0.0)
    with pytest.raises(ValueError):
        PulseSpec(1.0, 0.1, span=4)
    with pytest.raises(ValueError):
        PulseSpec(1.0, 0.1, samples=8)


def test_pulse_free_space_unchanged():
    spec = PulseSpec(W0, 0.01)
    res = propagate_pulse(spec, lambda w: TransferMatrix(np.eye(2)), 3)
    assert res.centroid == pytest.approx(0.0, abs=1e-9)
    assert res.rms_width == pytest.approx(res.input_rms_width, rel=1e-12)
    # power spectrum rms width s gives intensity rms width 1/(2 s)
    assert res.input_rms_width == pytest.approx(1 / (2 * 0.01), rel=1e-6)


def test_pulse_pure_delay():
    spec = PulseSpec(W0, 0.01)
    res = propagate_pulse(spec, lambda w: TransferMatrix(np.eye(2), 7.5 * w), 4)
    assert res.centroid == pytest.approx(30.0, abs=1e-8)
    assert res.rms_width == pytest.approx(res.input_rms_width, rel=1e-10)


def test_pulse_energy_conserved_generic(rng):
    H0 = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    H0 = H0 + H0.conj().T
    f = lambda w: TransferMatrix(linalg.expm(-1j * (H0 + 20 * (w - W0) * SIGMA_X)), 3.0 * w)
    res = propagate_pulse(PulseSpec(W0, 0.01, amplitudes=(0.6, 0.8j)), f, 3)
    assert res.energy == pytest.approx(res.input_energy, rel=1e-12)


def test_pulse_alias_detected():
    spec = PulseSpec(W0, 0.01, samples=64, span=6)
    f = lambda w: TransferMatrix(np.diag(np.exp(-1j * np.array([1.0, -1.0]) * 3000 * (w - W0))))
    with pytest.raises(AliasError):
        propagate_pulse(spec, f, 1, )


def test_pulse_reference_run(period, bare_guide, setup):
    spec = PulseSpec(setup.omega0, 0.003 * setup.omega0)
    res = propagate_pulse(spec, period, 2, reference=bare_guide)
    assert res.reference is not None
    assert res.reference.energy == pytest.approx(res.reference.input_energy, rel=1e-12)
    assert res.reference.mode_centroids[0] != pytest.approx(res.reference.mode_centroids[1], rel=1e-3)
