"""Independent ground-truth generators used by the test suite.

Everything here is deliberately built from first principles and shares no
numerical machinery with the production path: a Monte-Carlo walker that
simulates the path semantics directly, a dense pivoted-elimination solver, a
central-finite-difference gradient, and a brute-force enumeration of the
expected dense loss.

Randomness uses numpy's PCG64 generator, seeded per start pixel with
``seed + pixel`` so results do not depend on scheduling.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .lattice import BoundaryField, GridLattice, SparseLabels, ValidationError
from .loss import PROB_FLOOR
from .propagate import PartitionField


@dataclass(frozen=True)
class McEstimate:
    probs: np.ndarray  # (N, K) class frequencies among hitting walks
    stderr: np.ndarray  # (N, K) binomial standard error
    deaths: np.ndarray  # (N,) fraction of walks that died or hit the step cap
    hits: np.ndarray  # (N,) number of walks absorbed at a labeled pixel


def mc_hitting_probabilities(
    lattice: GridLattice,
    labels: SparseLabels,
    boundary: BoundaryField,
    walks_per_pixel: int,
    max_steps: int = 10**6,
    seed: int = 0,
) -> McEstimate:
    """Estimate hitting probabilities by direct simulation.

    At an unlabeled pixel x a walk survives with probability exp(-B(x)) and
    then moves to one of the four neighbors uniformly; stepping off the grid
    kills it.  Reaching a labeled pixel absorbs the walk and records that
    pixel's class.
    """
    if walks_per_pixel < 1:
        raise ValidationError("walks_per_pixel must be >= 1")
    labels.validate_for(lattice)
    n, k = lattice.num_pixels, labels.num_classes
    nbr = lattice.neighbor_array()
    survive = np.exp(-boundary.values)
    pixel_class = np.full(n, -1, dtype=np.int64)
    pixel_class[labels.pixels()] = labels.classes()

    counts = np.zeros((n, k), dtype=np.int64)
    deaths = np.zeros(n)
    for start in range(n):
        rng = np.random.default_rng(seed + start)
        if pixel_class[start] >= 0:
            counts[start, pixel_class[start]] = walks_per_pixel
            continue
        pos = np.full(walks_per_pixel, start, dtype=np.int64)
        dead = 0
        for _ in range(max_steps):
            if len(pos) == 0:
                break
            alive = rng.random(len(pos)) < survive[pos]
            dirs = rng.integers(0, 4, len(pos))
            nxt = nbr[pos, dirs]
            alive &= nxt >= 0
            dead += int(len(pos) - alive.sum())
            pos = nxt[alive]
            absorbed = pixel_class[pos] >= 0
            if absorbed.any():
                np.add.at(counts[start], pixel_class[pos[absorbed]], 1)
                pos = pos[~absorbed]
        deaths[start] = (dead + len(pos)) / walks_per_pixel

    hits = counts.sum(axis=1)
    probs = np.zeros((n, k))
    stderr = np.zeros((n, k))
    got = hits > 0
    probs[got] = counts[got] / hits[got, None]
    stderr[got] = np.sqrt(probs[got] * (1.0 - probs[got]) / hits[got, None])
    return McEstimate(probs=probs, stderr=stderr, deaths=deaths, hits=hits)


def dense_partition_matrix(
    lattice: GridLattice, labels: SparseLabels, boundary: BoundaryField
) -> tuple[np.ndarray, np.ndarray]:
    """Dense (A, b) for the partition system, assembled row by row."""
    n, k = lattice.num_pixels, labels.num_classes
    a = np.zeros((n, n))
    b = np.zeros((n, k))
    labeled = dict(labels.entries)
    for i in range(n):
        if i in labeled:
            a[i, i] = 1.0
            b[i, labeled[i]] = 1.0
        else:
            a[i, i] = 4.0 * np.exp(boundary.values[i])
            for j in lattice.neighbors(i):
                a[i, j] = -1.0
    return a, b


def _gaussian_elimination(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a x = b by Gaussian elimination with partial pivoting."""
    a = a.copy()
    b = b.copy()
    n = a.shape[0]
    for col in range(n):
        pivot = col + int(np.argmax(np.abs(a[col:, col])))
        if a[pivot, col] == 0.0:
            raise np.linalg.LinAlgError("singular matrix")
        if pivot != col:
            a[[col, pivot]] = a[[pivot, col]]
            b[[col, pivot]] = b[[pivot, col]]
        factors = a[col + 1 :, col] / a[col, col]
        a[col + 1 :, col:] -= factors[:, None] * a[col, col:]
        b[col + 1 :] -= factors[:, None] * b[col]
    x = np.zeros_like(b)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - a[row, row + 1 :] @ x[row + 1 :]) / a[row, row]
    return x


def dense_solve_partition(
    lattice: GridLattice, labels: SparseLabels, boundary: BoundaryField
) -> tuple[PartitionField, bool]:
    """Dense reference solve of the partition system.

    Returns (field, degenerate_flag); with no absorbing pixels at all the
    right-hand sides vanish, so the partition values are identically zero and
    the flag is set.  (Off-grid absorption keeps the matrix itself strictly
    diagonally dominant, hence nonsingular, even without labels.)
    """
    if lattice.num_pixels > 4096:
        raise ValidationError("dense oracle limited to 4096 pixels")
    a, b = dense_partition_matrix(lattice, labels, boundary)
    z = _gaussian_elimination(a, b)
    degenerate = len(labels.entries) == 0
    return PartitionField(num_classes=labels.num_classes, z=np.maximum(z, 0.0)), degenerate


def finite_diff_boundary_grad(
    loss_fn,
    lattice: GridLattice,
    labels: SparseLabels,
    boundary: BoundaryField,
    step: float,
) -> np.ndarray:
    """Per-pixel numerical dL/dB by central differences.

    ``loss_fn`` maps a BoundaryField to a scalar.  Pixels where a backward
    step would leave the B >= 0 domain use a one-sided forward difference.
    """
    if step <= 0:
        raise ValidationError("finite-difference step must be > 0")
    base = boundary.values
    grad = np.zeros_like(base)
    for i in range(len(base)):
        plus = base.copy()
        plus[i] += step
        f_plus = loss_fn(BoundaryField(plus))
        if base[i] - step < 0.0:
            grad[i] = (f_plus - loss_fn(boundary)) / step
        else:
            minus = base.copy()
            minus[i] -= step
            grad[i] = (f_plus - loss_fn(BoundaryField(minus))) / (2.0 * step)
    return grad


def marginalization_check(
    lattice: GridLattice,
    labels: SparseLabels,
    boundary: BoundaryField,
    q: np.ndarray,
) -> tuple[float, float]:
    """Brute-force check that the expected dense loss equals sum_x H(P, Q).

    The left side enumerates every dense labeling of the unlabeled pixels
    under the product measure prod_x P(x, y(x)) and sums the dense
    cross-entropy loss; the right side evaluates the propagated form
    directly.  Both use the dense reference solve for P.
    """
    labeled = dict(labels.entries)
    unlabeled = [i for i in range(lattice.num_pixels) if i not in labeled]
    if labels.num_classes > 2:
        raise ValidationError("enumeration check limited to K <= 2")
    if len(unlabeled) > 9:
        raise ValidationError("enumeration check limited to <= 9 unlabeled pixels")

    zfield, _ = dense_solve_partition(lattice, labels, boundary)
    sums = zfield.sums()
    p = zfield.z / sums[:, None]

    logq = np.log(np.maximum(q, PROB_FLOOR))
    k = labels.num_classes
    lhs = 0.0
    for assignment in itertools.product(range(k), repeat=len(unlabeled)):
        dense = np.empty(lattice.num_pixels, dtype=np.int64)
        for pix, cls in labeled.items():
            dense[pix] = cls
        for pix, cls in zip(unlabeled, assignment):
            dense[pix] = cls
        weight = float(np.prod(p[np.arange(lattice.num_pixels), dense]))
        dense_loss = float(-logq[np.arange(lattice.num_pixels), dense].sum())
        lhs += weight * dense_loss
    rhs = float(-(p * logq).sum())
    return lhs, rhs
