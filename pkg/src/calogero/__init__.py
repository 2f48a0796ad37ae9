"""Factorized representations of the inverse-square (Calogero) operator on the half-line."""

from .extensions import (
    ExtensionParam,
    GroundState,
    Regime,
    ZeroSequence,
    classify,
    ground_state,
    oscillation_zeros,
    representation_table,
    s_of,
    theta_of,
)
from .factorization import (
    CouplingParams,
    FactorizationParams,
    PhiFamily,
    SampledFunction,
    apply_a,
    apply_b,
    factorization_residual,
    h,
    h_prime,
    phi,
    riccati_residual,
    solve_inhomogeneous_a,
    solve_inhomogeneous_b,
)
from .oracle import ShootingConfig, SpectralResult, find_bound_state, shoot

__version__ = "0.1.0"
