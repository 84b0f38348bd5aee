import numpy as np
import pytest

from rwprop import BoundaryField, GridLattice, SparseLabels


def random_instance(rng, width, height, num_classes, b_high=2.0, num_labeled=None):
    """Random lattice/labels/boundary with every class labeled at least once."""
    lattice = GridLattice(width, height)
    n = lattice.num_pixels
    if num_labeled is None:
        num_labeled = int(rng.integers(num_classes, min(n, num_classes + 3) + 1))
    num_labeled = min(max(num_labeled, num_classes), n)
    pixels = rng.choice(n, size=num_labeled, replace=False)
    classes = np.concatenate(
        [
            np.arange(num_classes),
            rng.integers(0, num_classes, num_labeled - num_classes),
        ]
    )
    labels = SparseLabels(
        num_classes=num_classes,
        entries=tuple((int(p), int(c)) for p, c in zip(pixels, classes)),
    )
    boundary = BoundaryField(rng.uniform(0.0, b_high, n))
    return lattice, labels, boundary


@pytest.fixture
def rng():
    return np.random.default_rng(42)
