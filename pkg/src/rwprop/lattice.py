"""Grid geometry, sparse labels, and the per-pixel fields shared by every stage.

Pixel order is row-major with x fastest: linear index ``i = y * width + x``.
All types here are immutable after construction and safe to share.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

# Boundary scores above this are clamped at ingestion.  exp(-50) ~ 2e-22:
# effectively an infinite wall without risking denormal underflow per step.
B_MAX = 50.0


class ValidationError(ValueError):
    """An input violated a structural contract (bad index, bad shape, ...)."""


@dataclass(frozen=True)
class GridLattice:
    """A width x height pixel grid with 4-connectivity."""

    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValidationError(
                f"lattice dimensions must be >= 1, got {self.width}x{self.height}"
            )

    @property
    def num_pixels(self) -> int:
        return self.width * self.height

    def index(self, x: int, y: int) -> int:
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise ValidationError(f"pixel ({x},{y}) outside {self.width}x{self.height}")
        return y * self.width + x

    def coords(self, pixel: int) -> tuple[int, int]:
        if not (0 <= pixel < self.num_pixels):
            raise ValidationError(f"pixel index {pixel} outside lattice")
        return pixel % self.width, pixel // self.width

    def neighbors(self, pixel: int) -> list[int]:
        """In-grid 4-neighbors of ``pixel`` in up, down, left, right order."""
        x, y = self.coords(pixel)
        out = []
        if y > 0:
            out.append(pixel - self.width)
        if y < self.height - 1:
            out.append(pixel + self.width)
        if x > 0:
            out.append(pixel - 1)
        if x < self.width - 1:
            out.append(pixel + 1)
        return out

    def neighbor_array(self) -> np.ndarray:
        """(N, 4) int array of neighbors in up/down/left/right order; -1 off grid."""
        w, h = self.width, self.height
        idx = np.arange(self.num_pixels)
        x, y = idx % w, idx // w
        nbr = np.full((self.num_pixels, 4), -1, dtype=np.int64)
        nbr[y > 0, 0] = idx[y > 0] - w
        nbr[y < h - 1, 1] = idx[y < h - 1] + w
        nbr[x > 0, 2] = idx[x > 0] - 1
        nbr[x < w - 1, 3] = idx[x < w - 1] + 1
        return nbr


@dataclass(frozen=True)
class SparseLabels:
    """Sparse class assignments: a set of (pixel index, class id) pairs.

    Class ids are 0-based and dense in [0, num_classes).  Gapped external ids
    should be remapped with :func:`remap_class_ids` before construction.
    """

    num_classes: int
    entries: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.num_classes < 1:
            raise ValidationError("num_classes must be >= 1")
        seen = set()
        for pixel, cls in self.entries:
            if pixel in seen:
                raise ValidationError(f"duplicate label at pixel {pixel}")
            seen.add(pixel)
            if not (0 <= cls < self.num_classes):
                raise ValidationError(
                    f"class id {cls} at pixel {pixel} outside [0,{self.num_classes})"
                )
        object.__setattr__(self, "entries", tuple(sorted(self.entries)))

    def validate_for(self, lattice: GridLattice) -> None:
        for pixel, cls in self.entries:
            if not (0 <= pixel < lattice.num_pixels):
                raise ValidationError(
                    f"label entry (pixel={pixel}, class={cls}) outside "
                    f"{lattice.width}x{lattice.height} lattice"
                )

    def pixels(self) -> np.ndarray:
        return np.array([p for p, _ in self.entries], dtype=np.int64)

    def classes(self) -> np.ndarray:
        return np.array([c for _, c in self.entries], dtype=np.int64)


def remap_class_ids(
    raw_entries: list[tuple[int, int]],
) -> tuple[list[tuple[int, int]], dict[int, int]]:
    """Remap arbitrary (possibly gapped) class ids to dense 0-based ids.

    Returns the remapped entries and the external-id -> dense-id mapping.
    """
    external = sorted({c for _, c in raw_entries})
    mapping = {c: i for i, c in enumerate(external)}
    return [(p, mapping[c]) for p, c in raw_entries], mapping


def partition(
    lattice: GridLattice, labels: SparseLabels
) -> tuple[np.ndarray, np.ndarray]:
    """Split pixel indices into (labeled, unlabeled), each sorted ascending."""
    labels.validate_for(lattice)
    mask = np.zeros(lattice.num_pixels, dtype=bool)
    mask[labels.pixels()] = True
    idx = np.arange(lattice.num_pixels)
    return idx[mask], idx[~mask]


@dataclass(frozen=True)
class BoundaryField:
    """Nonnegative per-pixel boundary scores; values above B_MAX are clamped."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1:
            raise ValidationError("boundary values must be a flat per-pixel array")
        if not np.all(np.isfinite(vals)):
            raise ValidationError("boundary values must be finite")
        if np.any(vals < 0):
            bad = int(np.argmax(vals < 0))
            raise ValidationError(f"negative boundary score at pixel {bad}")
        if np.any(vals > B_MAX):
            warnings.warn(
                f"boundary scores above {B_MAX} clamped", RuntimeWarning, stacklevel=2
            )
            vals = np.minimum(vals, B_MAX)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @staticmethod
    def zeros(lattice: GridLattice) -> "BoundaryField":
        return BoundaryField(np.zeros(lattice.num_pixels))


@dataclass(frozen=True)
class LabelField:
    """Per-pixel probability distribution over num_classes classes."""

    num_classes: int
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 2 or p.shape[1] != self.num_classes:
            raise ValidationError(
                f"probs must have shape (num_pixels, {self.num_classes})"
            )
        if np.any(p < 0):
            raise ValidationError("probabilities must be >= 0")
        if np.any(np.abs(p.sum(axis=1) - 1.0) > 1e-9):
            bad = int(np.argmax(np.abs(p.sum(axis=1) - 1.0)))
            raise ValidationError(f"row {bad} does not sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def map_labels(self) -> np.ndarray:
        """Per-pixel argmax with lowest-class-id tie-break."""
        return np.argmax(self.probs, axis=1)
