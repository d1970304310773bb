"""Lipkin-model ground-state solvers and finite-size scaling tools.

Layers, from cheapest to most expensive:

* `model`      -- parameters, phase regions, canonicalization
* `meanfield`  -- coherent-state energy surface and its minima
* `bogoliubov` -- quadratic boson truncation: gap, 1/N observables, chi_F
* `spectrum`   -- exact parity-block diagonalization and chi_F evaluators
* `scaling`    -- renormalization, peak campaigns, power-law fits, collapses
* `cli`        -- `lipkin` command-line front end
"""

from .model import ModelParams, PhaseRegion, RegionError, canonicalize, classify_phase
from .meanfield import (
    ConvergenceError,
    CriticalPoint,
    MeanFieldObservables,
    critical_point,
    energy_surface,
    mf_observables,
    minimize_surface_numeric,
)
from .bogoliubov import (
    ChiCoefficients,
    SingularPointError,
    TruncatedSolution,
    chi_coefficients,
    chi_f_special_line,
    chi_f_truncated,
    gap,
    truncated_coefficients,
    truncated_observables,
    truncated_solution,
)
from .spectrum import (
    IllConditionedError,
    ParityBlocks,
    ParityMismatchError,
    SizeCapError,
    SpectrumResult,
    build_blocks,
    chi_f_finite_difference,
    chi_f_resolvent,
    chi_f_sum,
    dense_hamiltonian,
    excitation_gaps,
    fidelity,
    ground_state,
    lowest_levels,
    n_e_exact,
)
from .scaling import (
    FitResult,
    PeakResult,
    ScalingExponents,
    collapse_data,
    exponent_table,
    find_chi_max,
    fit_power_law,
    peak_campaign,
    peak_scaling_exponent,
    renormalize,
    singular_energy,
    singular_ne,
    solve_universality_exponent,
)

__version__ = "0.1.0"

__all__ = [
    "ModelParams",
    "PhaseRegion",
    "RegionError",
    "canonicalize",
    "classify_phase",
    "ConvergenceError",
    "CriticalPoint",
    "MeanFieldObservables",
    "critical_point",
    "energy_surface",
    "mf_observables",
    "minimize_surface_numeric",
    "ChiCoefficients",
    "SingularPointError",
    "TruncatedSolution",
    "chi_coefficients",
    "chi_f_special_line",
    "chi_f_truncated",
    "gap",
    "truncated_coefficients",
    "truncated_observables",
    "truncated_solution",
    "IllConditionedError",
    "ParityBlocks",
    "ParityMismatchError",
    "SizeCapError",
    "SpectrumResult",
    "build_blocks",
    "chi_f_finite_difference",
    "chi_f_resolvent",
    "chi_f_sum",
    "dense_hamiltonian",
    "excitation_gaps",
    "fidelity",
    "ground_state",
    "lowest_levels",
    "n_e_exact",
    "FitResult",
    "PeakResult",
    "ScalingExponents",
    "collapse_data",
    "exponent_table",
    "find_chi_max",
    "fit_power_law",
    "peak_campaign",
    "peak_scaling_exponent",
    "renormalize",
    "singular_energy",
    "singular_ne",
    "solve_universality_exponent",
    "__version__",
]
