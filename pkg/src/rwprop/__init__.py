"""Differentiable random-walk label propagation on 4-connected pixel lattices."""

__version__ = "0.1.0"

from .lattice import (
    B_MAX,
    BoundaryField,
    GridLattice,
    LabelField,
    SparseLabels,
    ValidationError,
    partition,
)
from .propagate import (
    PartitionField,
    PropagationResult,
    RwSystem,
    SolverError,
    assemble_system,
    propagate_labels,
    solve_partition,
)
from .adjoint import BoundaryGradient, backprop_boundary, grad_partition
from .loss import (
    LossReport,
    cross_entropy_loss,
    entropy,
    kl_divergence,
    uncertainty_weights,
    weighted_loss,
)

__all__ = [
    "B_MAX",
    "BoundaryField",
    "BoundaryGradient",
    "GridLattice",
    "LabelField",
    "LossReport",
    "PartitionField",
    "PropagationResult",
    "RwSystem",
    "SolverError",
    "SparseLabels",
    "ValidationError",
    "assemble_system",
    "backprop_boundary",
    "cross_entropy_loss",
    "entropy",
    "grad_partition",
    "kl_divergence",
    "partition",
    "propagate_labels",
    "solve_partition",
    "uncertainty_weights",
    "weighted_loss",
]
