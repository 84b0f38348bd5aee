"""Desk-scale joint training of a boundary field and a label predictor.

The predictors are direct per-pixel parameter fields: Q(x) = softmax(theta(x))
and B(x) = link(phi(x)) with a softplus (default) or exp link, clamped to
[0, B_MAX].  Each step is one full-batch gradient-descent update of both
fields on the uncertainty-weighted loss, with the boundary gradient coming
from the adjoint solve.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .adjoint import backprop_boundary, grad_partition
from .lattice import (
    B_MAX,
    BoundaryField,
    GridLattice,
    LabelField,
    SparseLabels,
    ValidationError,
)
from .loss import LossReport, weighted_loss
from .propagate import PropagationResult, assemble_system, propagate_labels

SCENARIO_NAMES = ("twoRegions", "threeRegionsDiagonal", "ringRegion", "unlabeledIsland")


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 500
    lr_phi: float = 0.5
    lr_theta: float = 0.5
    alpha: float = 1.0
    seed: int = 0
    link: str = "softplus"
    flow_through_weights: bool = False

    def __post_init__(self):
        if self.steps < 1:
            raise ValidationError(f"steps must be >= 1, got {self.steps}")
        if self.lr_phi < 0 or self.lr_theta < 0:
            raise ValidationError("learning rates must be >= 0")
        if self.alpha < 0:
            raise ValidationError("alpha must be >= 0")
        if self.link not in ("softplus", "exp"):
            raise ValidationError(f"unknown link function {self.link!r}")


@dataclass(frozen=True)
class TrainState:
    lattice: GridLattice
    labels: SparseLabels
    phi: np.ndarray  # per-pixel boundary parameter
    theta: np.ndarray  # per-pixel class logits (N, K)


@dataclass(frozen=True)
class ForwardResult:
    boundary: BoundaryField
    propagation: PropagationResult
    q: LabelField
    report: LossReport


@dataclass(frozen=True)
class SyntheticScenario:
    name: str
    lattice: GridLattice
    labels: SparseLabels
    ground_truth: np.ndarray | None  # dense per-pixel class ids, if known
    border_mask: np.ndarray | None  # pixels adjacent to a different true class


@dataclass(frozen=True)
class TrainTrace:
    records: list[dict]  # one {"step", "loss", "accuracy"} per step
    final_state: TrainState
    final_forward: ForwardResult


def _link(phi: np.ndarray, kind: str) -> tuple[np.ndarray, np.ndarray]:
    """Map phi to a boundary field value and its derivative dB/dphi."""
    if kind == "softplus":
        b = np.logaddexp(0.0, phi)
        db = 1.0 / (1.0 + np.exp(-phi))
    else:
        b = np.exp(phi)
        db = b.copy()
    clamped = b >= B_MAX
    b = np.minimum(b, B_MAX)
    db[clamped] = 0.0
    return b, db


def _softmax(theta: np.ndarray) -> np.ndarray:
    shifted = theta - theta.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def init_state(
    lattice: GridLattice, labels: SparseLabels, num_classes: int | None = None
) -> TrainState:
    """Uninformative start: B near zero (phi = -2), Q uniform (theta = 0)."""
    k = labels.num_classes if num_classes is None else num_classes
    return TrainState(
        lattice=lattice,
        labels=labels,
        phi=np.full(lattice.num_pixels, -2.0),
        theta=np.zeros((lattice.num_pixels, k)),
    )


def forward(state: TrainState, config: TrainConfig) -> ForwardResult:
    """Evaluate B, P, Q and the weighted loss at the current parameters."""
    b_vals, _ = _link(state.phi, config.link)
    boundary = BoundaryField(b_vals)
    prop = propagate_labels(state.lattice, state.labels, boundary)
    q = LabelField(num_classes=state.labels.num_classes, probs=_softmax(state.theta))
    report = weighted_loss(
        prop.p,
        q,
        alpha=config.alpha,
        flow_through_weights=config.flow_through_weights,
        unreached=prop.unreached,
    )
    return ForwardResult(boundary=boundary, propagation=prop, q=q, report=report)


def gradients(
    state: TrainState, config: TrainConfig, fwd: ForwardResult
) -> tuple[np.ndarray, np.ndarray]:
    """(dL/dphi, dL/dtheta) at the given forward evaluation."""
    prop = fwd.propagation
    dldz = grad_partition(prop.p, prop.z.sums(), fwd.report.dldp, prop.unreached)
    system = assemble_system(state.lattice, state.labels, fwd.boundary)
    dldb = backprop_boundary(system, prop.z, dldz, fwd.boundary).values
    _, db_dphi = _link(state.phi, config.link)
    g_phi = dldb * db_dphi

    q = fwd.q.probs
    dldq = fwd.report.dldq
    g_theta = q * (dldq - (dldq * q).sum(axis=1, keepdims=True))

    for name, g in (("phi", g_phi), ("theta", g_theta)):
        finite_rows = np.isfinite(g).reshape(len(g), -1).all(axis=1)
        if not finite_rows.all():
            bad = int(np.argmax(~finite_rows))
            raise ValidationError(f"non-finite {name} gradient at pixel {bad}")
    return g_phi, g_theta


def step(state: TrainState, config: TrainConfig) -> tuple[TrainState, ForwardResult]:
    """One full-batch gradient-descent update; returns the pre-step forward."""
    fwd = forward(state, config)
    g_phi, g_theta = gradients(state, config, fwd)
    new_state = replace(
        state,
        phi=state.phi - config.lr_phi * g_phi,
        theta=state.theta - config.lr_theta * g_theta,
    )
    return new_state, fwd


def map_accuracy(q: LabelField, ground_truth: np.ndarray) -> float:
    return float(np.mean(q.map_labels() == ground_truth))


def _border_mask(lattice: GridLattice, truth: np.ndarray) -> np.ndarray:
    nbr = lattice.neighbor_array()
    mask = np.zeros(lattice.num_pixels, dtype=bool)
    for k in range(4):
        ok = nbr[:, k] >= 0
        mask[ok] |= truth[ok] != truth[nbr[ok, k]]
    return mask


def build_scenario(name: str, size: int = 16) -> SyntheticScenario:
    """Built-in synthetic ground-truth instances with sparse scribbles."""
    if name not in SCENARIO_NAMES:
        raise ValidationError(f"unknown scenario {name!r}; choose from {SCENARIO_NAMES}")
    lattice = GridLattice(size, size)
    idx = np.arange(lattice.num_pixels)
    x, y = idx % size, idx // size

    if name == "twoRegions":
        truth = (x >= size // 2).astype(np.int64)
        quarter, mid = size // 4, size // 2
        entries = [(lattice.index(quarter, yy), 0) for yy in range(mid - 2, mid + 2)]
        entries += [
            (lattice.index(size - 1 - quarter, yy), 1) for yy in range(mid - 2, mid + 2)
        ]
        labels = SparseLabels(num_classes=2, entries=tuple(entries))
    elif name == "threeRegionsDiagonal":
        band = (3 * (x + y)) // (2 * size)
        truth = np.minimum(band, 2).astype(np.int64)
        entries = [
            (lattice.index(2, 2), 0),
            (lattice.index(3, 2), 0),
            (lattice.index(size // 2, size // 2), 1),
            (lattice.index(size // 2 + 1, size // 2), 1),
            (lattice.index(size - 3, size - 3), 2),
            (lattice.index(size - 2, size - 3), 2),
        ]
        labels = SparseLabels(num_classes=3, entries=tuple(entries))
    elif name == "ringRegion":
        cx = cy = (size - 1) / 2.0
        r = np.hypot(x - cx, y - cy)
        truth = ((r >= size / 5.0) & (r <= size / 2.8)).astype(np.int64)
        ring_y = int(cy - (size / 5.0 + size / 2.8) / 2.0)
        entries = [
            (lattice.index(0, 0), 0),
            (lattice.index(1, 0), 0),
            (lattice.index(size // 2, ring_y), 1),
            (lattice.index(size // 2 - 1, ring_y), 1),
            (lattice.index(size // 2, size // 2), 0),
        ]
        labels = SparseLabels(num_classes=2, entries=tuple(entries))
    else:  # unlabeledIsland: right end sealed off by a thick ground-truth wall
        truth = (x >= size // 2).astype(np.int64)
        entries = [(lattice.index(1, size // 2), 0), (lattice.index(2, size // 2), 0)]
        labels = SparseLabels(num_classes=2, entries=tuple(entries))

    return SyntheticScenario(
        name=name,
        lattice=lattice,
        labels=labels,
        ground_truth=truth,
        border_mask=_border_mask(lattice, truth),
    )


def train_demo(scenario: SyntheticScenario, config: TrainConfig) -> TrainTrace:
    """Run the full training loop on a scenario and record the trace."""
    state = init_state(scenario.lattice, scenario.labels)
    records = []
    for i in range(config.steps):
        state, fwd = step(state, config)
        accuracy = (
            map_accuracy(fwd.q, scenario.ground_truth)
            if scenario.ground_truth is not None
            else None
        )
        records.append({"step": i, "loss": fwd.report.total, "accuracy": accuracy})
    final_forward = forward(state, config)
    return TrainTrace(records=records, final_state=state, final_forward=final_forward)
