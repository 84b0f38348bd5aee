"""HTTP facade over label propagation for the interactive scribble UI.

Stateless JSON-over-HTTP: POST /api/propagate runs one solve and returns the
propagated distributions plus MAP, entropy, weight and unreached summaries;
GET /api/health is a liveness probe.  Malformed JSON is a 400, semantic
validation failures are 422, solver failures are 500.
"""

from __future__ import annotations

import json
import time

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import __version__
from .lattice import BoundaryField, ValidationError
from .loss import entropy, uncertainty_weights
from .io import parse_labels_doc
from .propagate import SolverError, propagate_labels

MAX_PIXELS = 262144  # 512 x 512; keeps interactive latency bounded


def propagate_payload(doc: dict) -> dict:
    """Run one propagation for a request document; raises ValidationError."""
    for key in ("width", "height", "numClasses"):
        if key not in doc:
            raise ValidationError(f"missing field {key!r}")
    lattice, labels = parse_labels_doc(
        {
            "width": doc.get("width"),
            "height": doc.get("height"),
            "numClasses": doc.get("numClasses"),
            "entries": doc.get("entries", []),
        }
    )
    if lattice.num_pixels > MAX_PIXELS:
        raise ValidationError(
            f"width*height = {lattice.num_pixels} exceeds limit {MAX_PIXELS}"
        )
    if not labels.entries:
        raise ValidationError("no absorbing pixels")
    raw_boundary = doc.get("boundary")
    if raw_boundary is None:
        boundary = BoundaryField.zeros(lattice)
    else:
        arr = np.asarray(raw_boundary, dtype=np.float64)
        if arr.shape != (lattice.num_pixels,):
            raise ValidationError(
                f"boundary has {arr.size} values, expected {lattice.num_pixels}"
            )
        boundary = BoundaryField(arr)
    alpha = float(doc.get("alpha", 1.0))
    if alpha < 0:
        raise ValidationError("alpha must be >= 0")

    start = time.perf_counter()
    result = propagate_labels(lattice, labels, boundary)
    solve_millis = (time.perf_counter() - start) * 1000.0

    p = result.p.probs
    return {
        "p": [float(v) for v in p.ravel()],
        "map": [int(v) for v in result.p.map_labels()],
        "entropy": [float(v) for v in entropy(p)],
        "weights": [float(v) for v in uncertainty_weights(p, alpha)],
        "unreached": [int(v) for v in result.unreached],
        "solveMillis": solve_millis,
    }


def create_app() -> FastAPI:
    app = FastAPI(title="rwprop", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origin_regex=r"https?://(localhost|127\.0\.0\.1)(:\d+)?",
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/api/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/api/propagate")
    async def propagate(request: Request):
        content_type = request.headers.get("content-type", "")
        if "application/json" not in content_type:
            return JSONResponse(
                {"error": "content-type must be application/json"}, status_code=400
            )
        body = await request.body()
        try:
            doc = json.loads(body)
        except json.JSONDecodeError as e:
            return JSONResponse({"error": f"invalid JSON: {e}"}, status_code=400)
        if not isinstance(doc, dict):
            return JSONResponse({"error": "request body must be an object"}, 400)
        try:
            return JSONResponse(propagate_payload(doc))
        except ValidationError as e:
            return JSONResponse({"error": str(e)}, status_code=422)
        except SolverError as e:
            return JSONResponse({"error": str(e)}, status_code=500)

    return app


app = create_app()
