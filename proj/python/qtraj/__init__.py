"""Quantum trajectories of continually measured finite-dimensional systems."""

from ._core import (
    Model,
    QtrajError,
    __version__,
    apply_liouvillian,
    atom_model,
    bloch_histogram,
    bloch_vector,
    check_ellipticity,
    equilibrium,
    ergodic_distance,
    evolve_master,
    lie_rank,
    linear_entropy,
    load_model,
    model_from_json,
    run_ensemble,
    simulate_linear,
    simulate_posterior,
    trace_norm,
    von_neumann_entropy,
)

__all__ = [
    "Model",
    "QtrajError",
    "__version__",
    "apply_liouvillian",
    "atom_model",
    "bloch_histogram",
    "bloch_vector",
    "check_ellipticity",
    "equilibrium",
    "ergodic_distance",
    "evolve_master",
    "lie_rank",
    "linear_entropy",
    "load_model",
    "model_from_json",
    "run_ensemble",
    "simulate_linear",
    "simulate_posterior",
    "trace_norm",
    "von_neumann_entropy",
]
