"""Dispersion equalization of multi-mode propagation by periodic mode scatterers."""
from .dispersion import (
    GaussianPerturbation,
    LorentzAxis,
    ModeLaw,
    RationalPermittivity,
    WaveguideGeometry,
    eval_index,
    find_zero_curvature_frequency,
    mode_pair_coefficients,
    mode_wavevector,
    overlap_coupling,
    special_frequencies,
    uniaxial_design_solve,
)
from .placement import (
    PlacementProblem,
    PlacementSolution,
    condition_stack,
    reduced_system_residuals,
    solve_general,
    solve_reduced,
)
from .realization import (
    GrapheneFlake,
    StackDesign,
    UniaxialMedium,
    graphene_transfer,
    length_ratio,
    overall_matrix,
    reduced_matrix,
    tilt_and_transmissivity,
    transmissivity_sweep,
)
from .transfer import (
    GenericScatterer,
    Pauli2Scatterer,
    PhaseGenerator,
    TransferMatrix,
    analytic_c1,
    char_poly_c1,
    char_poly_coeffs,
    composite_matrix,
    pauli_decompose,
    propagation_matrix,
    scatterer_matrix,
)
from .verify import PulseSpec, ResidualFit, propagate_pulse, residual_fit, residual_order

__version__ = "0.1.0"
