"""Command-line entry point.

Subcommands: propagate (sparse labels + boundary -> dense fields), train
(the desk-scale learning loop), gradcheck / mccheck (oracle comparisons on
random instances), and serve (the HTTP facade).

Exit codes: 0 success, 1 check failure, 2 validation error, 3 numerical
failure.  Diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io, report
from .adjoint import backprop_boundary, grad_partition
from .lattice import BoundaryField, GridLattice, SparseLabels, ValidationError
from .loss import entropy, uncertainty_weights, weighted_loss
from .oracle import finite_diff_boundary_grad, mc_hitting_probabilities
from .propagate import SolverError, assemble_system, propagate_labels
from .trainer import (
    SCENARIO_NAMES,
    SyntheticScenario,
    TrainConfig,
    build_scenario,
    train_demo,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _err(message: str) -> None:
    print(message, file=sys.stderr)


def cmd_propagate(args) -> int:
    lattice, labels = io.read_labels(args.labels)
    try:
        width, height, channels, data = io.read_field(args.boundary)
    except FileNotFoundError:
        raise ValidationError(f"boundary file not found: {args.boundary}") from None
    if (width, height) != (lattice.width, lattice.height):
        raise ValidationError(
            f"boundary field is {width}x{height}, labels are "
            f"{lattice.width}x{lattice.height}"
        )
    if channels != 1:
        raise ValidationError(f"boundary field must have 1 channel, got {channels}")
    boundary = BoundaryField(data[:, 0].astype(np.float64))

    result = propagate_labels(lattice, labels, boundary)
    _err(f"unreached pixels: {len(result.unreached)}")

    probs = result.p.probs
    if args.out_p:
        io.write_field(args.out_p, probs, lattice.width, lattice.height)
    if args.out_map:
        io.write_pgm(args.out_map, result.p.map_labels(), lattice.width, lattice.height)
    if args.out_entropy:
        io.write_field(args.out_entropy, entropy(probs), lattice.width, lattice.height)
    if args.out_weights:
        io.write_field(
            args.out_weights,
            uncertainty_weights(probs, args.alpha),
            lattice.width,
            lattice.height,
        )
    if args.figures:
        report.render_propagation_figures(
            args.figures,
            lattice.width,
            lattice.height,
            probs,
            result.p.map_labels(),
            entropy(probs),
            uncertainty_weights(probs, args.alpha),
        )
    return EXIT_OK


def cmd_train(args) -> int:
    if args.scenario:
        scenario = build_scenario(args.scenario)
    elif args.labels:
        lattice, labels = io.read_labels(args.labels)
        scenario = SyntheticScenario(
            name="custom",
            lattice=lattice,
            labels=labels,
            ground_truth=None,
            border_mask=None,
        )
    else:
        raise ValidationError("either --scenario or --labels is required")

    config = TrainConfig(
        steps=args.steps,
        lr_phi=args.lr_phi,
        lr_theta=args.lr_theta,
        alpha=args.alpha,
        seed=args.seed,
        flow_through_weights=args.flow_through_weights,
        link=args.link,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    trace = train_demo(scenario, config)
    lattice = scenario.lattice

    with open(out_dir / "trace.jsonl", "w") as f:
        for record in trace.records:
            f.write(json.dumps(record) + "\n")
    report.write_trace_csv(out_dir / "trace.csv", trace.records)

    fwd = trace.final_forward
    io.write_field(out_dir / "B.rwf", fwd.boundary.values, lattice.width, lattice.height)
    io.write_field(out_dir / "P.rwf", fwd.propagation.p.probs, lattice.width, lattice.height)
    io.write_field(out_dir / "Q.rwf", fwd.q.probs, lattice.width, lattice.height)
    io.write_pgm(out_dir / "map.pgm", fwd.q.map_labels(), lattice.width, lattice.height)

    if args.figures:
        fig_dir = out_dir / "figures"
        fig_dir.mkdir(exist_ok=True)
        report.save_loss_curve(fig_dir / "loss.png", trace.records)
        report.save_heatmap(
            fig_dir / "boundary.png",
            fwd.boundary.values,
            lattice.width,
            lattice.height,
            title="learned boundary field",
            cmap="inferno",
        )
        report.render_propagation_figures(
            fig_dir,
            lattice.width,
            lattice.height,
            fwd.propagation.p.probs,
            fwd.q.map_labels(),
            entropy(fwd.propagation.p.probs),
            fwd.report.weights,
        )
    final = trace.records[-1]
    _err(f"final loss {final['loss']:.6f}, MAP accuracy {final['accuracy']:.4f}")
    return EXIT_OK


def _parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise ValidationError(f"bad --size {text!r}, expected WxH") from None


def _random_instance(width, height, num_classes, rng, b_high=2.0):
    lattice = GridLattice(width, height)
    n = lattice.num_pixels
    num_labeled = min(n, max(num_classes, int(rng.integers(num_classes, num_classes + 3))))
    pixels = rng.choice(n, size=num_labeled, replace=False)
    classes = np.concatenate(
        [np.arange(num_classes), rng.integers(0, num_classes, num_labeled - num_classes)]
    )[:num_labeled]
    labels = SparseLabels(
        num_classes=num_classes,
        entries=tuple((int(p), int(c)) for p, c in zip(pixels, classes)),
    )
    boundary = BoundaryField(rng.uniform(0.0, b_high, n))
    return lattice, labels, boundary


def cmd_gradcheck(args) -> int:
    width, height = _parse_size(args.size)
    rng = np.random.default_rng(args.seed)
    lattice, labels, boundary = _random_instance(width, height, args.classes, rng)
    q = rng.dirichlet(np.ones(args.classes), size=lattice.num_pixels)

    def loss_of(b: BoundaryField) -> float:
        result = propagate_labels(lattice, labels, b)
        rep = weighted_loss(
            result.p, q, alpha=1.0, flow_through_weights=True, unreached=result.unreached
        )
        return rep.total

    result = propagate_labels(lattice, labels, boundary)
    rep = weighted_loss(
        result.p, q, alpha=1.0, flow_through_weights=True, unreached=result.unreached
    )
    dldz = grad_partition(result.p, result.z.sums(), rep.dldp, result.unreached)
    system = assemble_system(lattice, labels, boundary)
    analytic = backprop_boundary(system, result.z, dldz, boundary).values
    numeric = finite_diff_boundary_grad(loss_of, lattice, labels, boundary, args.fd_step)

    denom = np.maximum(np.abs(numeric), 1e-4)
    rel = np.abs(analytic - numeric) / denom
    worst = int(np.argmax(rel))
    print(f"max relative error {rel[worst]:.3e} at pixel {worst} "
          f"(analytic {analytic[worst]:.6e}, numeric {numeric[worst]:.6e})")
    if rel[worst] >= 1e-5:
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_mccheck(args) -> int:
    width, height = _parse_size(args.size)
    rng = np.random.default_rng(args.seed)
    lattice, labels, boundary = _random_instance(
        width, height, args.classes, rng, b_high=1.0
    )
    exact = propagate_labels(lattice, labels, boundary)
    mc = mc_hitting_probabilities(
        lattice, labels, boundary, walks_per_pixel=args.walks, seed=args.seed
    )
    z_max, where = 0.0, (0, 0)
    for i in range(lattice.num_pixels):
        if mc.hits[i] == 0:
            continue
        for l in range(labels.num_classes):
            p_ex = exact.p.probs[i, l]
            se = np.sqrt(p_ex * (1.0 - p_ex) / mc.hits[i])
            diff = abs(mc.probs[i, l] - p_ex)
            if se == 0.0:
                z = 0.0 if diff == 0.0 else np.inf
            else:
                z = diff / se
            if z > z_max:
                z_max, where = z, (i, l)
    i, l = where
    print(f"max z-score {z_max:.3f} at pixel {i}, class {l} "
          f"(mc {mc.probs[i, l]:.6f}, exact {exact.p.probs[i, l]:.6f})")
    if z_max > 3.5:
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rwprop",
        description="Random-walk label propagation on pixel lattices",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("propagate", help="propagate sparse labels to dense fields")
    p.add_argument("--labels", required=True)
    p.add_argument("--boundary", required=True)
    p.add_argument("--out-p")
    p.add_argument("--out-map")
    p.add_argument("--out-entropy")
    p.add_argument("--out-weights")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--figures", help="directory for rendered figures")
    p.set_defaults(fn=cmd_propagate)

    t = sub.add_parser("train", help="run the desk-scale training loop")
    t.add_argument("--labels")
    t.add_argument("--image", help="optional PGM for display only")
    t.add_argument("--scenario", choices=SCENARIO_NAMES)
    t.add_argument("--steps", type=int, default=500)
    t.add_argument("--lr-phi", type=float, default=0.5)
    t.add_argument("--lr-theta", type=float, default=0.5)
    t.add_argument("--alpha", type=float, default=1.0)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--link", choices=("softplus", "exp"), default="softplus")
    t.add_argument("--flow-through-weights", action="store_true")
    t.add_argument("--out-dir", required=True)
    t.add_argument("--figures", action="store_true")
    t.set_defaults(fn=cmd_train)

    for name, fn in (("gradcheck", cmd_gradcheck), ("mccheck", cmd_mccheck)):
        c = sub.add_parser(name, help=f"run the {name} oracle comparison")
        c.add_argument("--size", default="4x4")
        c.add_argument("--classes", type=int, default=2)
        c.add_argument("--seed", type=int, default=0)
        if name == "gradcheck":
            c.add_argument("--fd-step", type=float, default=1e-5)
        else:
            c.add_argument("--walks", type=int, default=100000)
        c.set_defaults(fn=fn)

    s = sub.add_parser("serve", help="run the HTTP service")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8754)
    s.set_defaults(fn=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ValidationError as e:
        _err(f"validation error: {e}")
        return EXIT_VALIDATION
    except SolverError as e:
        _err(f"numerical failure: {e}")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
