import numpy as np
import pytest

from rwprop import (
    BoundaryField,
    GridLattice,
    LabelField,
    SparseLabels,
    assemble_system,
    backprop_boundary,
    grad_partition,
    propagate_labels,
    weighted_loss,
)
from rwprop.adjoint import ValidationError
from rwprop.oracle import finite_diff_boundary_grad
from rwprop.propagate import solve_linear

from conftest import random_instance


def _analytic_grad(lat, labels, boundary, q, alpha=1.0):
    result = propagate_labels(lat, labels, boundary)
    rep = weighted_loss(
        result.p, q, alpha=alpha, flow_through_weights=True, unreached=result.unreached
    )
    dldz = grad_partition(result.p, result.z.sums(), rep.dldp, result.unreached)
    system = assemble_system(lat, labels, boundary)
    return backprop_boundary(system, result.z, dldz, boundary).values


def _loss_fn(lat, labels, q, alpha=1.0):
    def fn(b):
        result = propagate_labels(lat, labels, b)
        return weighted_loss(
            result.p, q, alpha=alpha, flow_through_weights=True,
            unreached=result.unreached,
        ).total

    return fn


def test_grad_partition_kills_uniform_shift():
    p = LabelField(num_classes=2, probs=np.array([[0.3, 0.7]]))
    dldz = grad_partition(p, np.array([0.5]), np.array([[2.0, 2.0]]))
    assert np.abs(dldz).max() < 1e-15


def test_grad_partition_arithmetic():
    p = LabelField(num_classes=2, probs=np.array([[0.5, 0.5]]))
    dldz = grad_partition(p, np.array([0.25]), np.array([[1.0, 0.0]]))
    assert dldz[0].tolist() == [2.0, -2.0]


def test_grad_partition_matches_normalization_fd(rng):
    z = rng.uniform(0.1, 1.0, size=(6, 3))
    s = z.sum(axis=1)
    p = z / s[:, None]
    dldp = rng.normal(size=(6, 3))
    analytic = grad_partition(
        LabelField(num_classes=3, probs=p), s, dldp
    )
    h = 1e-7
    for i in range(6):
        for l in range(3):
            zp, zm = z.copy(), z.copy()
            zp[i, l] += h
            zm[i, l] -= h
            f = lambda zz: float(
                (dldp * (zz / zz.sum(axis=1, keepdims=True))).sum()
            )
            num = (f(zp) - f(zm)) / (2 * h)
            assert abs(analytic[i, l] - num) <= 1e-6 * max(1.0, abs(num))


def test_grad_partition_shape_mismatch():
    p = LabelField(num_classes=2, probs=np.array([[0.5, 0.5]]))
    with pytest.raises(ValidationError):
        grad_partition(p, np.array([1.0]), np.zeros((2, 2)))


def test_zero_dldz_gives_zero_gradient(rng):
    lat, labels, boundary = random_instance(rng, 4, 4, 2)
    result = propagate_labels(lat, labels, boundary)
    system = assemble_system(lat, labels, boundary)
    grad = backprop_boundary(system, result.z, np.zeros_like(result.z.z), boundary)
    assert np.abs(grad.values).max() == 0.0


def test_gradient_zero_at_labeled_pixels(rng):
    lat, labels, boundary = random_instance(rng, 4, 4, 2)
    q = rng.dirichlet(np.ones(2), size=lat.num_pixels)
    grad = _analytic_grad(lat, labels, boundary, q)
    for pixel, _ in labels.entries:
        assert grad[pixel] == 0.0


def test_backprop_matches_finite_differences(rng):
    for _ in range(5):
        lat, labels, boundary = random_instance(rng, 4, 4, 2)
        q = rng.dirichlet(np.ones(2), size=lat.num_pixels)
        analytic = _analytic_grad(lat, labels, boundary, q)
        numeric = finite_diff_boundary_grad(
            _loss_fn(lat, labels, q), lat, labels, boundary, 1e-5
        )
        rel = np.abs(analytic - numeric) / np.maximum(np.abs(numeric), 1e-4)
        assert rel.max() < 1e-5


def test_adjoint_linearity(rng):
    lat, labels, boundary = random_instance(rng, 4, 4, 2)
    result = propagate_labels(lat, labels, boundary)
    system = assemble_system(lat, labels, boundary)
    dldz = rng.normal(size=result.z.z.shape)
    g1 = backprop_boundary(system, result.z, dldz, boundary).values
    g2 = backprop_boundary(system, result.z, 2.0 * dldz, boundary).values
    assert np.array_equal(g2, 2.0 * g1)


def test_adjoint_consistency_inner_products(rng):
    for _ in range(5):
        lat, labels, boundary = random_instance(rng, 5, 5, 2)
        a = assemble_system(lat, labels, boundary).matrix
        v = rng.normal(size=(lat.num_pixels, 1))
        w = rng.normal(size=(lat.num_pixels, 1))
        x = solve_linear(a, v)  # A^{-1} v
        y = solve_linear(a, w, transpose=True)  # A^{-T} w
        assert float(w[:, 0] @ x[:, 0]) == pytest.approx(
            float(y[:, 0] @ v[:, 0]), abs=1e-8, rel=1e-8
        )
