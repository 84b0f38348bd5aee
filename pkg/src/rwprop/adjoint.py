"""Exact loss gradients with respect to the boundary field.

Perturbing the diagonal coefficient C_i of an interior row by epsilon changes
the solution of A z = b by -epsilon * A^{-1} e_i e_i^T z + O(eps^2), so

    dL/dC_i = -(A^{-T} dL/dz)_i * z_i

accumulated over classes, and dL/dB(x_i) = dL/dC_i * C_i since
C_i = 4 * exp(B(x_i)).  Labeled (identity) rows carry no dependence on B and
contribute exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import BoundaryField, LabelField, ValidationError
from .propagate import EPS_REACH, PartitionField, RwSystem, solve_linear


@dataclass(frozen=True)
class BoundaryGradient:
    """Per-pixel dL/dB; exactly zero at labeled pixels."""

    values: np.ndarray


def grad_partition(
    p: LabelField,
    z_sums: np.ndarray,
    dldp: np.ndarray,
    unreached: np.ndarray | None = None,
) -> np.ndarray:
    """Chain dL/dP through the normalization P = Z / sum_l Z to get dL/dZ.

    dL/dZ(x,l) = (dLdP(x,l) - sum_m dLdP(x,m) P(x,m)) / S(x); a shift of
    dLdP that is constant across classes therefore maps to zero.
    """
    if dldp.shape != p.probs.shape:
        raise ValidationError(
            f"dLdP shape {dldp.shape} does not match P shape {p.probs.shape}"
        )
    safe = z_sums > EPS_REACH
    inner = (dldp * p.probs).sum(axis=1, keepdims=True)
    dldz = np.zeros_like(dldp)
    dldz[safe] = (dldp[safe] - inner[safe]) / z_sums[safe, None]
    if unreached is not None and len(unreached):
        dldz[unreached] = 0.0
    return dldz


def backprop_boundary(
    system: RwSystem,
    z: PartitionField,
    dldz: np.ndarray,
    boundary: BoundaryField,
    method: str = "auto",
) -> BoundaryGradient:
    """Solve the adjoint systems A^T u_l = dL/dZ_l and assemble dL/dB."""
    if dldz.shape != z.z.shape:
        raise ValidationError(
            f"dLdZ shape {dldz.shape} does not match Z shape {z.z.shape}"
        )
    u = solve_linear(system.matrix, dldz, method=method, transpose=True)
    # Deterministic reduction: sum over classes in ascending order.
    dldc = -np.einsum("nk,nk->n", u, z.z)
    dldc[system.labeled_mask] = 0.0
    dldb = dldc * system.diag
    dldb[system.labeled_mask] = 0.0
    if not np.all(np.isfinite(dldb)):
        bad = int(np.argmax(~np.isfinite(dldb)))
        raise ValidationError(f"non-finite boundary gradient at pixel {bad}")
    return BoundaryGradient(values=dldb)
