"""Flux-qubit double-well spectra, flux coherence under dephasing, and
measurement-based coherence witnesses."""

__version__ = "0.1.0"

from .circuit import (CircuitParams, DerivedScales, EffectiveSize, PRESETS,
                      THREE_JUNCTION_PRESETS, ThreeJunctionParams,
                      delft_effective_size, derived_scales, ideal_effective_size,
                      potential, reference_variance, well_geometry)
from .coherence import (CoherenceReport, DephasingChannel, coherence_report,
                        coherence_vs_gamma, dephase, quantum_coherence)
from .grid import (FluxGrid, GridState, finite_difference_oracle, hermite_basis,
                   load_grid_state, project_to_basis, save_grid_state, to_grid)
from .hobasis import (HoBasisConfig, SpectralResult, build_hamiltonian,
                      cosine_matrix, displacement_table, eigensolve,
                      find_target_states, solve_circuit, sweep_phi_x)
from .witness import (EnergyMeasurement, FluxBinMeasurement, OutcomeDistribution,
                      StateProjectionMeasurement, TimeDistribution, WitnessBound,
                      averaged_bound, bhattacharyya, gaussian_time_average,
                      optimized_unitary_bound, simulate_protocol, unitary_bound,
                      weak_dephasing_bound)

__all__ = [
    "CircuitParams", "DerivedScales", "EffectiveSize", "PRESETS",
    "THREE_JUNCTION_PRESETS", "ThreeJunctionParams", "delft_effective_size",
    "derived_scales", "ideal_effective_size", "potential", "reference_variance",
    "well_geometry",
    "CoherenceReport", "DephasingChannel", "coherence_report", "coherence_vs_gamma",
    "dephase", "quantum_coherence",
    "FluxGrid", "GridState", "finite_difference_oracle", "hermite_basis",
    "load_grid_state", "project_to_basis", "save_grid_state", "to_grid",
    "HoBasisConfig", "SpectralResult", "build_hamiltonian", "cosine_matrix",
    "displacement_table", "eigensolve", "find_target_states", "solve_circuit",
    "sweep_phi_x",
    "EnergyMeasurement", "FluxBinMeasurement", "OutcomeDistribution",
    "StateProjectionMeasurement", "TimeDistribution", "WitnessBound",
    "averaged_bound", "bhattacharyya", "gaussian_time_average",
    "optimized_unitary_bound", "simulate_protocol", "unitary_bound",
    "weak_dephasing_bound",
]
