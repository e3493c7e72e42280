"""Strict JSON model files: quotient complex, covering labels, and flux.

Schema (exact; unknown keys are rejected):

    {
      "vertices":  <int>,                       # vertex count, required
      "edges":     [[src, dst, weight], ...],   # required, 0-based vertices
      "faces":     [[signed 1-based edge ids, ...], ...],   # optional
      "tau":       [[int, ...], ...],           # optional, one Z^d label per edge
      "potential": [float, ...],                # optional, one per vertex
      "flux":      [float, ...]                 # optional, radians per face
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .complexes import Complex2, CoveringData

__all__ = ["Model", "ModelError", "load_model", "loads_model", "model_to_dict"]

_ALLOWED_KEYS = {"vertices", "edges", "faces", "tau", "potential", "flux"}


class ModelError(ValueError):
    """Malformed model document (bad JSON, unknown keys, wrong shapes)."""


@dataclass(frozen=True, eq=False)
class Model:
    complex2: Complex2
    covering: CoveringData
    flux: np.ndarray


def loads_model(text: str) -> Model:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelError("model document must be a JSON object")
    unknown = sorted(set(doc) - _ALLOWED_KEYS)
    if unknown:
        raise ModelError(f"unknown keys: {', '.join(unknown)}")
    if "vertices" not in doc or "edges" not in doc:
        raise ModelError("model requires 'vertices' and 'edges'")

    vertices = doc["vertices"]
    if not isinstance(vertices, int) or vertices < 0:
        raise ModelError("'vertices' must be a nonnegative integer")

    edges = []
    if not isinstance(doc["edges"], list):
        raise ModelError("'edges' must be a list of [src, dst, weight]")
    for i, item in enumerate(doc["edges"]):
        if not (isinstance(item, list) and len(item) == 3):
            raise ModelError(f"edge {i} must be [src, dst, weight]")
        src, dst, w = item
        if not isinstance(src, int) or not isinstance(dst, int):
            raise ModelError(f"edge {i}: endpoints must be integers")
        edges.append((src, dst, float(w)))

    faces = doc.get("faces", [])
    if not isinstance(faces, list) or any(not isinstance(f, list) for f in faces):
        raise ModelError("'faces' must be a list of lists of signed edge ids")
    face_words = []
    for i, word in enumerate(faces):
        for s in word:
            if not isinstance(s, int) or s == 0:
                raise ModelError(f"face {i}: steps must be nonzero signed integers")
        face_words.append(tuple(word))

    potential = doc.get("potential")
    if potential is not None:
        if not isinstance(potential, list) or len(potential) != vertices:
            raise ModelError(f"'potential' must list {vertices} values")
        potential = [float(x) for x in potential]

    cx = Complex2(vertices, tuple(edges), tuple(face_words), potential)

    tau = doc.get("tau")
    if tau is None:
        covering = CoveringData.trivial(len(edges))
    else:
        if not isinstance(tau, list) or len(tau) != len(edges):
            raise ModelError(f"'tau' must list one label per edge ({len(edges)})")
        rank = None
        rows = []
        for i, label in enumerate(tau):
            if not isinstance(label, list) or any(not isinstance(x, int) for x in label):
                raise ModelError(f"tau[{i}] must be a list of integers")
            if rank is None:
                rank = len(label)
            elif len(label) != rank:
                raise ModelError("tau labels must all have the same length")
            rows.append(label)
        rank = rank if rank is not None else 0
        covering = CoveringData(rank, np.array(rows, dtype=int).reshape(len(edges), rank))

    flux = doc.get("flux")
    if flux is None:
        flux = np.zeros(len(face_words))
    else:
        if not isinstance(flux, list) or len(flux) != len(face_words):
            raise ModelError(f"'flux' must list one value per face ({len(face_words)})")
        flux = np.array([float(x) for x in flux])

    return Model(cx, covering, flux)


def load_model(path: str | Path) -> Model:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ModelError(f"cannot read model file: {exc}") from exc
    return loads_model(text)


def model_to_dict(model: Model) -> dict:
    """Round-trippable dict in the documented schema."""
    cx = model.complex2
    out: dict = {
        "vertices": cx.num_vertices,
        "edges": [[u, v, w] for u, v, w in cx.edges],
    }
    if cx.faces:
        out["faces"] = [list(word) for word in cx.faces]
    if model.covering.rank:
        out["tau"] = model.covering.tau.tolist()
    if np.any(cx.potentials != 0):
        out["potential"] = cx.potentials.tolist()
    if len(model.flux):
        out["flux"] = np.asarray(model.flux, dtype=float).tolist()
    return out
