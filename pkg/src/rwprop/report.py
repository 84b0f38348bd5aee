"""Matplotlib renderings of per-pixel fields and training traces.

Figures are written straight to files (Agg backend); nothing here opens a
window.  Weight maps use the coolwarm colormap so low weight reads blue and
high weight reads red.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def _grid(values: np.ndarray, width: int, height: int) -> np.ndarray:
    return np.asarray(values).reshape(height, width)


def save_heatmap(path, values, width, height, title="", cmap="viridis",
                 vmin=None, vmax=None) -> None:
    fig, ax = plt.subplots(figsize=(4, 4))
    im = ax.imshow(_grid(values, width, height), cmap=cmap, vmin=vmin, vmax=vmax,
                   interpolation="nearest")
    ax.set_title(title)
    ax.set_xticks([])
    ax.set_yticks([])
    fig.colorbar(im, ax=ax, fraction=0.046)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)


def save_map_figure(path, map_labels, width, height, num_classes, title="MAP") -> None:
    fig, ax = plt.subplots(figsize=(4, 4))
    ax.imshow(_grid(map_labels, width, height), cmap="tab10",
              vmin=0, vmax=max(9, num_classes - 1), interpolation="nearest")
    ax.set_title(title)
    ax.set_xticks([])
    ax.set_yticks([])
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)


def save_weight_map(path, weights, width, height) -> None:
    save_heatmap(path, weights, width, height, title="loss weights",
                 cmap="coolwarm", vmin=0.0, vmax=1.0)


def save_loss_curve(path, records) -> None:
    steps = [r["step"] for r in records]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(steps, [r["loss"] for r in records], label="loss")
    ax.set_xlabel("step")
    ax.set_ylabel("loss (nats)")
    if all(r.get("accuracy") is not None for r in records):
        ax2 = ax.twinx()
        ax2.plot(steps, [r["accuracy"] for r in records], color="tab:orange",
                 label="MAP accuracy")
        ax2.set_ylabel("accuracy")
        ax2.set_ylim(0, 1.02)
    ax.legend(loc="upper right")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)


def write_trace_csv(path, records) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=["step", "loss", "accuracy"])
        writer.writeheader()
        for r in records:
            writer.writerow({k: r.get(k) for k in ("step", "loss", "accuracy")})


def render_propagation_figures(out_dir, width, height, p_probs, map_labels,
                               entropy_map, weights) -> list[Path]:
    """Standard figure set for one propagation result; returns written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    num_classes = p_probs.shape[1]
    jobs = [
        ("map.png", lambda p: save_map_figure(p, map_labels, width, height, num_classes)),
        ("entropy.png", lambda p: save_heatmap(p, entropy_map, width, height,
                                               title="entropy (nats)", cmap="magma")),
        ("weights.png", lambda p: save_weight_map(p, weights, width, height)),
    ]
    for name, fn in jobs:
        path = out_dir / name
        fn(path)
        written.append(path)
    return written
