"""Assembly and solution of the per-label partition-function linear systems.

For an unlabeled pixel x the partition value obeys

    Z_x = (1/4) * exp(-B(x)) * sum_{x' ~ x} Z_{x'}

with Z = 0 off the grid, so row x of the system reads

    4 * exp(B(x)) * Z_x - sum_{x' ~ x} Z_{x'} = 0.

Labeled pixels are absorbing: their rows are identity rows with right-hand
side 1 for the matching class and 0 otherwise.  The matrix is the same for
every class; only the right-hand side changes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .lattice import (
    BoundaryField,
    GridLattice,
    LabelField,
    SparseLabels,
    ValidationError,
)

# Below this total probability mass a pixel is considered unreachable from
# every labeled pixel (possible only via underflow behind very thick walls).
EPS_REACH = 1e-300

# Solver outputs in [NEG_CLAMP, 0) are clamped to zero; anything more
# negative indicates a bug rather than roundoff.
NEG_CLAMP = -1e-12

# Systems up to this size take the direct sparse-LU path; beyond it the
# Gauss-Seidel/SOR sweeps are used.
DIRECT_MAX = 262144

SOR_OMEGA = 1.5
RESIDUAL_TOL = 1e-10


class SolverError(RuntimeError):
    """A linear solve failed to reach the residual target."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class RwSystem:
    """The assembled sparse system A z = b_l, shared across all labels."""

    lattice: GridLattice
    num_classes: int
    matrix: sp.csr_matrix
    diag: np.ndarray  # per-pixel diagonal coefficient (4*e^B interior, 1 labeled)
    labeled_mask: np.ndarray  # bool, per pixel
    labeled_pixels: np.ndarray
    labeled_classes: np.ndarray

    def rhs(self) -> np.ndarray:
        """(N, K) right-hand sides, one column per class."""
        b = np.zeros((self.lattice.num_pixels, self.num_classes))
        b[self.labeled_pixels, self.labeled_classes] = 1.0
        return b


@dataclass(frozen=True)
class PartitionField:
    """Per-pixel, per-class partition values Z."""

    num_classes: int
    z: np.ndarray

    def sums(self) -> np.ndarray:
        return self.z.sum(axis=1)


@dataclass(frozen=True)
class PropagationResult:
    p: LabelField
    z: PartitionField
    unreached: np.ndarray  # pixel indices with total mass <= EPS_REACH


def assemble_system(
    lattice: GridLattice, labels: SparseLabels, boundary: BoundaryField
) -> RwSystem:
    """Build the sparse system for the given lattice, labels and boundary."""
    labels.validate_for(lattice)
    if not labels.entries:
        raise ValidationError("no absorbing pixels")
    n = lattice.num_pixels
    if boundary.values.shape != (n,):
        raise ValidationError(
            f"boundary field has {boundary.values.shape} values, expected ({n},)"
        )

    labeled_pixels = labels.pixels()
    labeled_classes = labels.classes()
    labeled_mask = np.zeros(n, dtype=bool)
    labeled_mask[labeled_pixels] = True

    diag = np.where(labeled_mask, 1.0, 4.0 * np.exp(boundary.values))

    nbr = lattice.neighbor_array()
    rows = [np.arange(n)]
    cols = [np.arange(n)]
    vals = [diag]
    interior = ~labeled_mask
    for k in range(4):
        ok = interior & (nbr[:, k] >= 0)
        rows.append(np.flatnonzero(ok))
        cols.append(nbr[ok, k])
        vals.append(np.full(int(ok.sum()), -1.0))
    matrix = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    )
    return RwSystem(
        lattice=lattice,
        num_classes=labels.num_classes,
        matrix=matrix,
        diag=diag,
        labeled_mask=labeled_mask,
        labeled_pixels=labeled_pixels,
        labeled_classes=labeled_classes,
    )


def _sor_solve(
    a: sp.csr_matrix,
    b: np.ndarray,
    omega: float = SOR_OMEGA,
    tol: float = RESIDUAL_TOL,
    max_sweeps: int | None = None,
    reverse: bool = False,
) -> tuple[np.ndarray, float]:
    """Gauss-Seidel sweeps with successive over-relaxation, one rhs column."""
    n = a.shape[0]
    if max_sweeps is None:
        max_sweeps = 100 * n
    x = np.zeros(n)
    indptr, indices, data = a.indptr, a.indices, a.data
    diag = a.diagonal()
    b_norm = np.linalg.norm(b)
    if b_norm == 0.0:
        return x, 0.0
    order = range(n - 1, -1, -1) if reverse else range(n)
    residual = np.inf
    for _ in range(max_sweeps):
        for i in order:
            lo, hi = indptr[i], indptr[i + 1]
            row_sum = data[lo:hi] @ x[indices[lo:hi]] - diag[i] * x[i]
            x[i] = (1.0 - omega) * x[i] + omega * (b[i] - row_sum) / diag[i]
        residual = np.linalg.norm(a @ x - b) / b_norm
        if residual <= tol:
            return x, residual
    raise SolverError(
        f"SOR did not converge within {max_sweeps} sweeps "
        f"(residual {residual:.3e})",
        residual=residual,
    )


def _check_residual(a, z, b, what: str) -> None:
    for l in range(b.shape[1]):
        b_norm = np.linalg.norm(b[:, l])
        res = np.linalg.norm(a @ z[:, l] - b[:, l])
        rel = res / b_norm if b_norm > 0 else res
        if rel > RESIDUAL_TOL:
            raise SolverError(
                f"{what} residual {rel:.3e} above {RESIDUAL_TOL} for class {l}",
                residual=rel,
            )


def solve_linear(
    matrix: sp.csr_matrix, b: np.ndarray, method: str = "auto", transpose: bool = False
) -> np.ndarray:
    """Solve A x = b (or A^T x = b) for all rhs columns.

    ``method`` is "auto", "lu" or "sor".  The per-column solves share one
    factorization and are independent of scheduling, so the result does not
    depend on evaluation order.
    """
    n = matrix.shape[0]
    if method == "auto":
        method = "lu" if n <= DIRECT_MAX else "sor"
    if method == "lu":
        lu = spla.splu(matrix.tocsc())
        x = lu.solve(np.ascontiguousarray(b), trans="T" if transpose else "N")
    elif method == "sor":
        # Sweep the transposed system in reverse row order; forward order on A
        # and reverse order on A^T traverse the grid consistently.
        a = matrix.T.tocsr() if transpose else matrix
        x = np.empty_like(b)
        for l in range(b.shape[1]):
            x[:, l], _ = _sor_solve(a, b[:, l], reverse=transpose)
    else:
        raise ValueError(f"unknown solver method {method!r}")
    a = matrix.T.tocsr() if transpose else matrix
    _check_residual(a, x, b, "adjoint" if transpose else "forward")
    return x


def solve_partition(
    system: RwSystem, labels: SparseLabels, method: str = "auto"
) -> PartitionField:
    """Solve A z_l = b_l for every class l and return the partition field."""
    if not labels.entries:
        raise ValidationError("no absorbing pixels")
    b = system.rhs()
    z = solve_linear(system.matrix, b, method=method)

    if np.any(z < NEG_CLAMP):
        i, l = np.unravel_index(int(np.argmin(z)), z.shape)
        raise SolverError(
            f"partition value {z[i, l]:.3e} at pixel {i}, class {l} "
            f"below clamp threshold {NEG_CLAMP}"
        )
    z = np.maximum(z, 0.0)
    # Boundary conditions hold exactly regardless of solver roundoff.
    z[system.labeled_pixels, :] = 0.0
    z[system.labeled_pixels, system.labeled_classes] = 1.0
    return PartitionField(num_classes=system.num_classes, z=z)


def propagate_labels(
    lattice: GridLattice,
    labels: SparseLabels,
    boundary: BoundaryField,
    method: str = "auto",
) -> PropagationResult:
    """Propagate sparse labels to dense distributions P = Z / sum_l Z."""
    system = assemble_system(lattice, labels, boundary)
    zfield = solve_partition(system, labels, method=method)
    sums = zfield.sums()
    unreached = np.flatnonzero(sums <= EPS_REACH)
    probs = np.empty_like(zfield.z)
    reached = sums > EPS_REACH
    probs[reached] = zfield.z[reached] / sums[reached, None]
    probs[~reached] = 1.0 / labels.num_classes
    p = LabelField(num_classes=labels.num_classes, probs=probs)
    return PropagationResult(p=p, z=zfield, unreached=unreached)
