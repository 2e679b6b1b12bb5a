"""Replicator dynamics, deterministic and stochastic, in two-player zero-sum games."""

__version__ = "0.1.0"

from .equilibrium import EquilibriumReport, maximal_support_equilibrium, solve_value
from .game import Game, SimplexPoint, StrategyProfile, SupportSet, check_support_lemma
from .generator import (
    LyapunovSpec,
    apply_generator,
    apply_generator_via_transformed_coords,
    check_ellipticity,
    check_noise_conditions,
    classify_3x2_faces,
    corner_H_exponents,
)
from .measures import corner_mass, occupation_histogram, regret_report, time_average
from .ode import OdeConfig, cross_entropy, integrate_ode, replicator_field
from .sde import (
    DiffusionSpec,
    SdeConfig,
    check_orthogonality,
    diffusion_row_matrix,
    em_step,
    simulate_ensemble,
    simulate_face,
    simulate_sde,
)
from .trajectory import Trajectory

__all__ = [
    "DiffusionSpec", "EquilibriumReport", "Game", "LyapunovSpec", "OdeConfig", "SdeConfig",
    "SimplexPoint", "StrategyProfile", "SupportSet", "Trajectory", "apply_generator",
    "apply_generator_via_transformed_coords", "check_ellipticity", "check_noise_conditions",
    "check_orthogonality", "check_support_lemma", "classify_3x2_faces", "corner_H_exponents",
    "corner_mass", "cross_entropy", "diffusion_row_matrix", "em_step", "integrate_ode",
    "maximal_support_equilibrium", "occupation_histogram", "regret_report", "replicator_field",
    "simulate_ensemble", "simulate_face", "simulate_sde", "solve_value", "time_average",
]
