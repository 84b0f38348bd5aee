"""File formats: RWF1 binary float fields, JSON label files, binary PGM maps.

RWF1 layout: magic "RWF1", then width/height/channels as little-endian u32,
then width*height*channels IEEE-754 float32 values, row-major with the
channel axis fastest.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .lattice import GridLattice, SparseLabels, ValidationError

RWF1_MAGIC = b"RWF1"
_HEADER = struct.Struct("<4sIII")


def write_field(path, values: np.ndarray, width: int, height: int) -> None:
    """Write a (width*height, channels) or (width*height,) field as RWF1."""
    data = np.asarray(values, dtype="<f4")
    if data.ndim == 1:
        data = data[:, None]
    if data.shape[0] != width * height:
        raise ValidationError(
            f"field has {data.shape[0]} pixels, expected {width * height}"
        )
    with open(path, "wb") as f:
        f.write(_HEADER.pack(RWF1_MAGIC, width, height, data.shape[1]))
        f.write(np.ascontiguousarray(data).tobytes())


def read_field(path) -> tuple[int, int, int, np.ndarray]:
    """Read an RWF1 file; returns (width, height, channels, (N, C) float32)."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValidationError(f"{path}: truncated RWF1 header")
    magic, width, height, channels = _HEADER.unpack_from(raw)
    if magic != RWF1_MAGIC:
        raise ValidationError(f"{path}: bad magic {magic!r}")
    expected = width * height * channels * 4
    body = raw[_HEADER.size :]
    if len(body) != expected:
        raise ValidationError(
            f"{path}: payload is {len(body)} bytes, expected {expected}"
        )
    data = np.frombuffer(body, dtype="<f4").reshape(width * height, channels)
    return width, height, channels, data


def write_labels(path, lattice: GridLattice, labels: SparseLabels) -> None:
    doc = {
        "width": lattice.width,
        "height": lattice.height,
        "numClasses": labels.num_classes,
        "entries": [
            {"x": p % lattice.width, "y": p // lattice.width, "class": c}
            for p, c in labels.entries
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def parse_labels_doc(doc: dict) -> tuple[GridLattice, SparseLabels]:
    """Validate a labels JSON document and build the in-memory types."""
    try:
        width, height = int(doc["width"]), int(doc["height"])
        num_classes = int(doc["numClasses"])
        raw_entries = doc["entries"]
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"malformed labels document: {e}") from e
    lattice = GridLattice(width, height)
    entries = []
    seen = set()
    for entry in raw_entries:
        try:
            x, y, cls = int(entry["x"]), int(entry["y"]), int(entry["class"])
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"malformed label entry {entry!r}") from e
        if not (0 <= x < width and 0 <= y < height):
            raise ValidationError(f"label entry ({x},{y}) outside {width}x{height}")
        if (x, y) in seen:
            raise ValidationError(f"duplicate label entry at ({x},{y})")
        seen.add((x, y))
        entries.append((y * width + x, cls))
    labels = SparseLabels(num_classes=num_classes, entries=tuple(entries))
    return lattice, labels


def read_labels(path) -> tuple[GridLattice, SparseLabels]:
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ValidationError(f"labels file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: invalid JSON: {e}") from e
    return parse_labels_doc(doc)


def write_pgm(path, values: np.ndarray, width: int, height: int) -> None:
    """Write per-pixel gray levels (0..255) as binary PGM (P5)."""
    data = np.asarray(values)
    if data.shape != (width * height,):
        raise ValidationError("PGM data must be one value per pixel")
    if data.min() < 0 or data.max() > 255:
        raise ValidationError("PGM values must be in [0, 255]")
    with open(path, "wb") as f:
        f.write(f"P5\n{width} {height}\n255\n".encode())
        f.write(data.astype(np.uint8).tobytes())


def read_pgm(path) -> tuple[int, int, np.ndarray]:
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    if len(parts) < 4 or parts[0] != b"P5":
        raise ValidationError(f"{path}: not a binary PGM file")
    width, height = (int(v) for v in parts[1].split())
    if parts[2] != b"255":
        raise ValidationError(f"{path}: unsupported maxval")
    data = np.frombuffer(parts[3][: width * height], dtype=np.uint8)
    if len(data) != width * height:
        raise ValidationError(f"{path}: truncated PGM payload")
    return width, height, data
