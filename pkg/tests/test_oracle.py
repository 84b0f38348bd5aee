import numpy as np
import pytest

from rwprop import BoundaryField, GridLattice, SparseLabels, propagate_labels
from rwprop.lattice import ValidationError
from rwprop.oracle import (
    dense_solve_partition,
    finite_diff_boundary_grad,
    marginalization_check,
    mc_hitting_probabilities,
)

from conftest import random_instance


def test_mc_single_class_is_delta():
    lat = GridLattice(3, 3)
    labels = SparseLabels(num_classes=1, entries=((4, 0),))
    est = mc_hitting_probabilities(
        lat, labels, BoundaryField.zeros(lat), walks_per_pixel=2000, seed=1
    )
    hit = est.hits > 0
    assert np.all(est.probs[hit, 0] == 1.0)
    assert np.all(est.stderr[hit] == 0.0)


def test_mc_1x3_symmetry():
    lat = GridLattice(3, 1)
    labels = SparseLabels(num_classes=2, entries=((0, 0), (2, 1)))
    est = mc_hitting_probabilities(
        lat, labels, BoundaryField.zeros(lat), walks_per_pixel=100000, seed=3
    )
    se = max(est.stderr[1, 0], 1e-6)
    assert abs(est.probs[1, 0] - 0.5) <= 3.0 * se


def test_mc_agrees_with_solver(rng):
    lat, labels, boundary = random_instance(rng, 4, 4, 2, b_high=1.0)
    exact = propagate_labels(lat, labels, boundary).p.probs
    est = mc_hitting_probabilities(lat, labels, boundary, walks_per_pixel=100000, seed=7)
    for i in range(lat.num_pixels):
        if est.hits[i] == 0:
            continue
        for l in range(2):
            se = np.sqrt(exact[i, l] * (1 - exact[i, l]) / est.hits[i])
            diff = abs(est.probs[i, l] - exact[i, l])
            assert diff <= max(3.5 * se, 1e-12)


def test_mc_stderr_scales_with_walks():
    lat = GridLattice(3, 3)
    labels = SparseLabels(num_classes=2, entries=((0, 0), (8, 1)))
    b = BoundaryField.zeros(lat)
    small = mc_hitting_probabilities(lat, labels, b, walks_per_pixel=1000, seed=11)
    large = mc_hitting_probabilities(lat, labels, b, walks_per_pixel=100000, seed=11)
    mask = (small.stderr > 0) & (large.stderr > 0)
    ratio = (small.stderr[mask] / large.stderr[mask]).mean()
    assert 5.0 < ratio < 20.0  # nominal sqrt(100) = 10


def test_mc_deterministic_given_seed(rng):
    lat, labels, boundary = random_instance(rng, 3, 3, 2)
    a = mc_hitting_probabilities(lat, labels, boundary, walks_per_pixel=500, seed=9)
    b = mc_hitting_probabilities(lat, labels, boundary, walks_per_pixel=500, seed=9)
    assert np.array_equal(a.probs, b.probs)
    assert np.array_equal(a.deaths, b.deaths)


def test_dense_2x1_fixture():
    lat = GridLattice(2, 1)
    labels = SparseLabels(num_classes=1, entries=((0, 0),))
    z, singular = dense_solve_partition(lat, labels, BoundaryField.zeros(lat))
    assert not singular
    assert z.z.ravel().tolist() == [1.0, 0.25]


def test_dense_all_labeled_indicator_rows():
    lat = GridLattice(2, 2)
    labels = SparseLabels(num_classes=2, entries=((0, 0), (1, 1), (2, 0), (3, 1)))
    z, _ = dense_solve_partition(lat, labels, BoundaryField.zeros(lat))
    assert np.array_equal(z.z, np.array([[1, 0], [0, 1], [1, 0], [0, 1]], dtype=float))


def test_dense_no_labels_is_degenerate():
    lat = GridLattice(2, 2)
    labels = SparseLabels(num_classes=1, entries=())
    z, degenerate = dense_solve_partition(lat, labels, BoundaryField.zeros(lat))
    assert degenerate
    assert np.all(z.z == 0.0)


def test_finite_diff_constant_loss_is_zero(rng):
    lat, labels, boundary = random_instance(rng, 3, 3, 2)
    grad = finite_diff_boundary_grad(lambda b: 1.0, lat, labels, boundary, 1e-5)
    assert np.all(grad == 0.0)


def test_finite_diff_one_sided_at_zero():
    lat = GridLattice(2, 1)
    labels = SparseLabels(num_classes=1, entries=((0, 0),))
    boundary = BoundaryField(np.zeros(2))
    # loss linear in B(1): one-sided difference is exact
    grad = finite_diff_boundary_grad(
        lambda b: 3.0 * b.values[1], lat, labels, boundary, 1e-5
    )
    assert grad[1] == pytest.approx(3.0, rel=1e-8)


def test_marginalization_all_labeled(rng):
    lat = GridLattice(2, 2)
    labels = SparseLabels(num_classes=2, entries=((0, 0), (1, 1), (2, 0), (3, 1)))
    q = rng.dirichlet(np.ones(2), size=4)
    lhs, rhs = marginalization_check(lat, labels, BoundaryField.zeros(lat), q)
    dense = sum(-np.log(q[i, c]) for i, c in enumerate([0, 1, 0, 1]))
    assert lhs == pytest.approx(rhs, abs=1e-12)
    assert lhs == pytest.approx(dense, abs=1e-12)


def test_marginalization_single_unlabeled(rng):
    lat = GridLattice(2, 1)
    labels = SparseLabels(num_classes=2, entries=((0, 1),))
    q = rng.dirichlet(np.ones(2), size=2)
    lhs, rhs = marginalization_check(lat, labels, BoundaryField.zeros(lat), q)
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_marginalization_3x3(rng):
    lat = GridLattice(3, 3)
    labeled = rng.choice(9, size=5, replace=False)
    entries = tuple((int(p), int(c)) for p, c in zip(labeled, [0, 1, 0, 1, 1]))
    labels = SparseLabels(num_classes=2, entries=entries)
    boundary = BoundaryField(rng.uniform(0, 2, 9))
    q = rng.dirichlet(np.ones(2), size=9)
    lhs, rhs = marginalization_check(lat, labels, boundary, q)
    assert abs(lhs - rhs) <= 1e-10


def test_marginalization_size_limits(rng):
    lat = GridLattice(4, 4)
    labels = SparseLabels(num_classes=2, entries=((0, 0), (1, 1)))
    q = rng.dirichlet(np.ones(2), size=16)
    with pytest.raises(ValidationError):
        marginalization_check(lat, labels, BoundaryField.zeros(lat), q)
