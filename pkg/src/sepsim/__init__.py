"""Simulation and closed-form theory of the measurement-driven separability
transition in commuting-gate (IQP / Clifford) dynamics."""

__version__ = "0.1.0"

from ._backend import COMPILED_AVAILABLE, get_backend
from .graph_state import (
    Bipartition,
    EvolvedState,
    apply_two_qubit_gate,
    bipartite_entropy_clifford,
    connected_components,
    gf2_rank,
    is_separable,
    measure_z_and_reset,
    new_product_state,
)
from .dynamics import (
    DegreeHistogram,
    DynamicsParams,
    EnsembleResult,
    TrajectoryRecord,
    advance_timestep,
    degree_distribution,
    run_ensemble,
    run_trajectory,
    trajectory_rng,
)
from . import dense, iqp, theory
from .percolation import ClusterStats, cluster_statistics, collapse_quality, power_law_fit
from .tableau import (
    EntanglingPowerResult,
    StabilizerTableau,
    entangling_power_experiment,
    from_graph_state,
    measure_pauli,
    mutual_information,
    subsystem_entropy,
)

__all__ = [
    "COMPILED_AVAILABLE",
    "get_backend",
    "Bipartition",
    "EvolvedState",
    "apply_two_qubit_gate",
    "bipartite_entropy_clifford",
    "connected_components",
    "gf2_rank",
    "is_separable",
    "measure_z_and_reset",
    "new_product_state",
    "DegreeHistogram",
    "DynamicsParams",
    "EnsembleResult",
    "TrajectoryRecord",
    "advance_timestep",
    "degree_distribution",
    "run_ensemble",
    "run_trajectory",
    "trajectory_rng",
    "dense",
    "iqp",
    "theory",
    "ClusterStats",
    "cluster_statistics",
    "collapse_quality",
    "power_law_fit",
    "EntanglingPowerResult",
    "StabilizerTableau",
    "entangling_power_experiment",
    "from_graph_state",
    "measure_pauli",
    "mutual_information",
    "subsystem_entropy",
]
