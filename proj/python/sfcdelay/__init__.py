"""Conditional end-to-end delay prediction for queueing networks.

Thin Python layer over the C++ core: network simulation, the analytic
mixture approximation, mixture density networks, delay bounds and the
admission-control experiment.
"""

from ._sfcdelay import (
    Mixture,
    Model,
    admission_experiment,
    analytic_mixture,
    ks_distance,
    network_config,
    preset_names,
    read_dataset,
    seen_queue_lengths,
    simulate,
    simulate_to_file,
    train,
)

__all__ = [
    "Mixture",
    "Model",
    "admission_experiment",
    "analytic_mixture",
    "ks_distance",
    "network_config",
    "preset_names",
    "read_dataset",
    "seen_queue_lengths",
    "simulate",
    "simulate_to_file",
    "train",
]

__version__ = "0.1.0"
