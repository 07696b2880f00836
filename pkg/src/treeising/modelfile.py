"""JSON model files.

Example (mean parameterisation, the seven-vertex binary tree)::

    {
      "parameterization": "mean",
      "vertices": ["1", "2", "3", "4", "5", "6", "7"],
      "edges": [["1", "2", 0.7], ["1", "3", 0.7], ["2", "4", 0.7],
                ["2", "5", 0.7], ["3", "6", 0.7], ["3", "7", 0.7]],
      "q": 0.01,
      "root": "1"
    }

Fields:

``parameterization``
    ``"mean"`` (default), ``"natural"``, ``"canonical"`` or ``"centered"``.
``vertices``
    list of distinct labels (strings or integers, stored as strings).
``edges``
    list of ``[label, label, value]``. The value is the edge correlation
    (mean), ``eta_e`` (natural, centered) or ``theta_e`` (canonical).
``q`` / ``eta`` / ``theta`` / ``kappa``
    vertex parameters for mean / natural / canonical / centered; a number
    applies to every vertex, an object maps labels to numbers.
``root``
    optional root label (default: first vertex). Only the mean form uses it.
``log_normalizer``
    written by :func:`dump_model` for exponential forms; ignored on read.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import ModelFileError, TreeIsingError
from .model import MeanParamIsing
from .params import CanonicalParamIsing, CenteredParamIsing, NaturalParamIsing, kind_of, log_normalizer
from .tree import TreeTopology, tree_from_labels

VERTEX_FIELD = {"mean": "q", "natural": "eta", "canonical": "theta", "centered": "kappa"}
KNOWN_FIELDS = {"parameterization", "vertices", "edges", "root", "log_normalizer", *VERTEX_FIELD.values()}


def _number(x, where):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ModelFileError(f"expected a number, got {json.dumps(x)}", where)
    if not math.isfinite(x):
        raise ModelFileError("number is not finite", where)
    return float(x)


def _vertex_values(doc, key, tree: TreeTopology) -> np.ndarray:
    if key not in doc:
        raise ModelFileError("missing required field", f"field '{key}'")
    raw = doc[key]
    if isinstance(raw, dict):
        out = np.full(tree.d, np.nan)
        for label, val in raw.items():
            where = f"field '{key}.{label}'"
            try:
                v = tree.index_of(label)
            except TreeIsingError:
                raise ModelFileError("unknown vertex label", where) from None
            out[v] = _number(val, where)
        missing = [tree.labels[i] for i in np.flatnonzero(np.isnan(out))]
        if missing:
            raise ModelFileError(f"no value for vertices {missing}", f"field '{key}'")
        return out
    return np.full(tree.d, _number(raw, f"field '{key}'"))


def parse_model(doc: dict):
    """Build a model from an already-decoded JSON object."""
    if not isinstance(doc, dict):
        raise ModelFileError("top level must be an object", "field '<root>'")
    unknown = sorted(set(doc) - KNOWN_FIELDS)
    if unknown:
        raise ModelFileError(f"unknown fields {unknown}", f"field '{unknown[0]}'")
    kind = doc.get("parameterization", "mean")
    if kind not in VERTEX_FIELD:
        raise ModelFileError(f"unknown parameterization {kind!r}; choose from {sorted(VERTEX_FIELD)}", "field 'parameterization'")

    vertices = doc.get("vertices")
    if not isinstance(vertices, list) or not vertices:
        raise ModelFileError("must be a nonempty list of labels", "field 'vertices'")
    for i, lab in enumerate(vertices):
        if isinstance(lab, bool) or not isinstance(lab, (str, int)):
            raise ModelFileError("label must be a string or integer", f"field 'vertices[{i}]'")
    edges_raw = doc.get("edges", [])
    if not isinstance(edges_raw, list):
        raise ModelFileError("must be a list of [label, label, value]", "field 'edges'")
    pairs, values = [], []
    for i, e in enumerate(edges_raw):
        where = f"field 'edges[{i}]'"
        if not isinstance(e, list) or len(e) != 3:
            raise ModelFileError("expected [label, label, value]", where)
        pairs.append((e[0], e[1]))
        values.append(_number(e[2], where))
    try:
        tree = tree_from_labels(vertices, pairs)
    except ModelFileError:
        raise
    except TreeIsingError as exc:
        raise ModelFileError(str(exc), "field 'edges'") from None

    vert = _vertex_values(doc, VERTEX_FIELD[kind], tree)
    edge_vals = np.asarray(values)
    if kind == "mean":
        root = 0
        if "root" in doc:
            try:
                root = tree.index_of(doc["root"])
            except TreeIsingError:
                raise ModelFileError(f"unknown vertex label {doc['root']!r}", "field 'root'") from None
        # admissibility is checked by the caller so that it maps to its own exit code
        return MeanParamIsing.on(tree, vert, edge_vals, root=root, check=False)
    cls = {"natural": NaturalParamIsing, "canonical": CanonicalParamIsing, "centered": CenteredParamIsing}[kind]
    try:
        return cls(tree, vert, edge_vals)
    except TreeIsingError as exc:
        raise ModelFileError(str(exc), f"field '{VERTEX_FIELD[kind]}'") from None


def loads_model(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from None
    return parse_model(doc)


def load_model(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ModelFileError(exc.strerror or str(exc), str(path)) from None
    return loads_model(text)


def dump_model(model) -> dict:
    """JSON-ready dict; inverse of :func:`parse_model`."""
    kind = kind_of(model)
    tree = model.tree
    if kind == "mean":
        vert, edge = model.q, model.alpha
    elif kind == "natural":
        vert, edge = model.eta_vertex, model.eta_edge
    elif kind == "canonical":
        vert, edge = model.theta_vertex, model.theta_edge
    else:
        vert, edge = model.kappa, model.eta_edge
    doc = {
        "parameterization": kind,
        "vertices": list(tree.labels),
        "edges": [[tree.labels[u], tree.labels[v], float(a)] for (u, v), a in zip(tree.edges, edge)],
        VERTEX_FIELD[kind]: {lab: float(x) for lab, x in zip(tree.labels, vert)},
    }
    if kind == "mean":
        doc["root"] = tree.labels[model.rt.root]
    else:
        doc["log_normalizer"] = log_normalizer(model)
    return doc


def dumps_model(model) -> str:
    return json.dumps(dump_model(model), indent=2) + "\n"


def save_model(model, path) -> None:
    Path(path).write_text(dumps_model(model))
