"""Reference configurations: the normalized two-mode guide, the uniaxial
graphene stack and a synthetic three-mode problem."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import twopi_grad
from .dispersion import (
    FunctionLaw,
    RationalPermittivity,
    WaveguideGeometry,
    find_zero_curvature_frequency,
    mode_pair_coefficients,
    uniaxial_design_solve,
)
from .placement import PlacementProblem
from .realization import GrapheneFlake, StackDesign, UniaxialMedium
from .transfer import GenericScatterer, Pauli2Scatterer, PhaseGenerator

REFERENCE_TRIPLE = (2.10269, 0.776642, 7.35977)
# scatterer angle slope that reproduces the reference cubic residual
REFERENCE_FX_SLOPE = 0.1
REFERENCE_BRACKET = (2.5, 3.5)
REFERENCE_WINDING = 10


@dataclass(frozen=True)
class TwoModeSetup:
    geometry: WaveguideGeometry
    laws: tuple
    omega0: float
    coefficients: object
    phase: PhaseGenerator
    scatterer: Pauli2Scatterer

    @property
    def fi(self):
        return float(self.coefficients.fi[0])

    @property
    def fz(self):
        return float(self.coefficients.fz[0])


def guide_filling():
    return RationalPermittivity(strength=15.0, pole_sq=16.0, eps_inf=1.0)


def two_mode_setup(fx=(math.pi / 2, REFERENCE_FX_SLOPE), order=3):
    geom = WaveguideGeometry(2.0, 1.0)
    model = guide_filling()
    laws = (geom.mode(model, 1, 1), geom.mode(model, 2, 1))
    w0 = find_zero_curvature_frequency(*laws, REFERENCE_BRACKET)
    coeffs = mode_pair_coefficients(*laws, w0, order)
    return TwoModeSetup(geom, laws, w0, coeffs, PhaseGenerator(laws), Pauli2Scatterer(w0, tuple(fx)))


def polynomial_law(coeffs, omega0, step=1e-3):
    """Law ``sum c_j (w - omega0)**j``."""
    c = np.asarray(coeffs, dtype=float)
    return FunctionLaw(lambda w: float(np.polyval(c[::-1], w - omega0)), step=step)


def synthetic_three_mode(order=1, seed=7, omega0=1.0):
    """Generic three-mode problem: quadratic laws, random Hermitian action
    with a linear frequency slope."""
    rng = np.random.default_rng(seed)
    base = [(2.0, 1.0, 0.3), (2.5, 1.6, -0.2), (3.1, 0.7, 0.5)]
    laws = tuple(polynomial_law(c, omega0) for c in base)
    H = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    H = (H + H.conj().T) / 4
    H1 = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    H1 = (H1 + H1.conj().T) / 8
    scat = GenericScatterer(lambda w: H + (w - omega0) * H1, 3)
    return PlacementProblem(PhaseGenerator(laws), scat, omega0, order)


def reference_uniaxial(curvature="index"):
    """Uniaxial design from eps_inf=2.5, resonances 10 and 60 (x 2 pi Grad/s)."""
    return uniaxial_design_solve(2.5, twopi_grad(10.0), twopi_grad(60.0), curvature=curvature)


def reference_stack(curvature="index", N=100, L_g=500e-9):
    design = reference_uniaxial(curvature)
    medium = UniaxialMedium.from_design(design)
    return design, medium, StackDesign.designed(N, L_g, design.omega0)


def reference_flake(mu_c=0.0229, B0=1.0):
    return GrapheneFlake(mu_c=mu_c, B0=B0, tau=0.2e-12, temperature=300.0, v_f=1e6)
