"""Loss family over propagated (P) and predicted (Q) label fields.

Three forms: plain cross-entropy sum_x H(P(x), Q(x)), and the
uncertainty-weighted variant sum_x w(x) KL(P(x)||Q(x)) + H(P(x)) with
w(x) = exp(-alpha * H(P(x))).  All logs are natural; losses are sums over
pixels unless ``normalize`` divides by pixel count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import LabelField, ValidationError

# Probabilities are clamped to this floor inside logarithms so that losses
# and gradients stay finite at simplex corners.
PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class LossReport:
    total: float
    per_pixel: np.ndarray
    weights: np.ndarray
    dldp: np.ndarray
    dldq: np.ndarray


def _probs(field) -> np.ndarray:
    if isinstance(field, LabelField):
        return field.probs
    return np.asarray(field, dtype=np.float64)


def _xlogx(p: np.ndarray) -> np.ndarray:
    return np.where(p > 0.0, p * np.log(np.maximum(p, PROB_FLOOR)), 0.0)


def entropy(p) -> np.ndarray | float:
    """Shannon entropy in nats over the last axis, with 0*log(0) = 0."""
    p = _probs(p)
    return -_xlogx(p).sum(axis=-1)


def kl_divergence(p, q) -> np.ndarray | float:
    """KL(p||q) in nats over the last axis."""
    p, q = _probs(p), _probs(q)
    logq = np.log(np.maximum(q, PROB_FLOOR))
    return (_xlogx(p) - p * logq).sum(axis=-1)


def uncertainty_weights(p, alpha: float) -> np.ndarray:
    """w(x) = exp(-alpha * H(P(x))); 1 at confident pixels, small at uncertain."""
    if alpha < 0:
        raise ValidationError(f"alpha must be >= 0, got {alpha}")
    return np.exp(-alpha * entropy(p))


def _check_shapes(p: np.ndarray, q: np.ndarray) -> None:
    if p.shape != q.shape:
        raise ValidationError(f"P shape {p.shape} does not match Q shape {q.shape}")


def cross_entropy_loss(p, q, normalize: bool = False) -> LossReport:
    """Per-pixel cross-entropy H(P(x), Q(x)) and its gradients."""
    p, q = _probs(p), _probs(q)
    _check_shapes(p, q)
    logq = np.log(np.maximum(q, PROB_FLOOR))
    per_pixel = -(p * logq).sum(axis=1)
    dldq = -p / np.maximum(q, PROB_FLOOR)
    dldp = -logq
    scale = 1.0 / len(p) if normalize else 1.0
    return LossReport(
        total=float(per_pixel.sum()) * scale,
        per_pixel=per_pixel * scale,
        weights=np.ones(len(p)),
        dldp=dldp * scale,
        dldq=dldq * scale,
    )


def weighted_loss(
    p,
    q,
    alpha: float = 1.0,
    flow_through_weights: bool = False,
    unreached: np.ndarray | None = None,
    normalize: bool = False,
) -> LossReport:
    """Uncertainty-weighted loss w(x) KL(P||Q) + H(P) with w = exp(-alpha H(P)).

    ``flow_through_weights`` controls whether dL/dP includes the dependence of
    w on P; when False, w is treated as a stop-gradient factor.  Weights are
    forced to 0 at ``unreached`` pixels.  At alpha = 0 the loss reduces
    pixelwise to the plain cross-entropy H(P, Q).
    """
    if alpha < 0:
        raise ValidationError(f"alpha must be >= 0, got {alpha}")
    p, q = _probs(p), _probs(q)
    _check_shapes(p, q)

    logp = np.log(np.maximum(p, PROB_FLOOR))
    logq = np.log(np.maximum(q, PROB_FLOOR))
    h = entropy(p)
    kl = kl_divergence(p, q)
    w = np.exp(-alpha * h)
    if unreached is not None and len(unreached):
        w = w.copy()
        w[unreached] = 0.0
    per_pixel = w * kl + h

    dldq = -w[:, None] * p / np.maximum(q, PROB_FLOOR)
    # d KL/dP_l = log P_l - log Q_l + 1;  d H/dP_l = -(log P_l + 1)
    dldp = w[:, None] * (logp - logq + 1.0) - (logp + 1.0)
    if flow_through_weights:
        # dw/dP_l = alpha * w * (log P_l + 1)
        dldp = dldp + alpha * (w * kl)[:, None] * (logp + 1.0)

    scale = 1.0 / len(p) if normalize else 1.0
    return LossReport(
        total=float(per_pixel.sum()) * scale,
        per_pixel=per_pixel * scale,
        weights=w,
        dldp=dldp * scale,
        dldq=dldq * scale,
    )
