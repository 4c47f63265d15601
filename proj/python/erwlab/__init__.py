"""Excited random walk laboratory.

Simulation of m-ERW / biased / symmetric lattice walks, renewal-time
detection, Girsanov reweighting, regenerative speed and derivative
estimators, and an exact small-path enumeration oracle.
"""

from ._erwlab import (
    ErwlabError,
    Trajectory,
    coupled_pair_check,
    detect_direct,
    detect_sd,
    exact_expectation,
    exact_speed_and_derivative,
    extract_cycles,
    girsanov_check,
    path_weight,
    reweighted_mean,
    run_experiment,
    simulate,
    step_probabilities,
    window_novelty,
)

__all__ = [
    "ErwlabError",
    "Trajectory",
    "coupled_pair_check",
    "detect_direct",
    "detect_sd",
    "exact_expectation",
    "exact_speed_and_derivative",
    "extract_cycles",
    "girsanov_check",
    "path_weight",
    "reweighted_mean",
    "run_experiment",
    "simulate",
    "step_probabilities",
    "window_novelty",
]

__version__ = "0.1.0"
