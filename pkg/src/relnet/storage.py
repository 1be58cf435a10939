"""JSON model files and CSV stream tables."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import DataError
from .graph import RelationEdge, RelationGraph, StreamNode
from .hebbian import CrossLink
from .som import DecaySchedule, SelfOrganizingMap

FORMAT_VERSION = 1


def graph_to_dict(graph: RelationGraph) -> dict:
    return {
        "step_count": graph.step_count,
        "seed": graph.seed,
        "planned_steps": graph.planned_steps,
        "relax": {
            "lambda": graph.relax_lambda,
            "tol": graph.relax_tol,
            "max_iter": graph.relax_max_iter,
        },
        "schedules": {k: graph.schedules[k].to_dict() for k in sorted(graph.schedules)},
        "nodes": [
            {
                "name": n.name,
                "n_neurons": n.n_neurons,
                "input_dim": n.input_dim,
                "som": None if n.som is None else n.som.to_dict(),
            }
            for n in graph.nodes.values()
        ],
        "edges": [
            {"source": e.source, "target": e.target, "link": e.link.to_dict()}
            for e in graph.edges
        ],
    }


def graph_from_dict(d: dict) -> RelationGraph:
    nodes = {}
    for nd in d["nodes"]:
        som = None if nd["som"] is None else SelfOrganizingMap.from_dict(nd["som"])
        if som is not None and (som.n_neurons, som.input_dim) != (nd["n_neurons"], nd["input_dim"]):
            raise DataError(f"node {nd['name']!r}: map size disagrees with its declaration")
        nodes[nd["name"]] = StreamNode(nd["name"], nd["n_neurons"], nd["input_dim"], som=som)
    edges = []
    for ed in d["edges"]:
        link = CrossLink.from_dict(ed["link"])
        expect = (nodes[ed["source"]].n_neurons, nodes[ed["target"]].n_neurons)
        if link.shape != expect:
            raise DataError(f"edge {ed['source']}-{ed['target']}: link shape {link.shape} != {expect}")
        edges.append(RelationEdge(ed["source"], ed["target"], link))
    relax = d["relax"]
    return RelationGraph(
        nodes,
        edges,
        schedules={k: DecaySchedule(**v) for k, v in d["schedules"].items()},
        relax_lambda=relax["lambda"],
        relax_tol=relax["tol"],
        relax_max_iter=relax["max_iter"],
        seed=d["seed"],
        planned_steps=d["planned_steps"],
        step_count=d["step_count"],
    )


def dumps_model(graph: RelationGraph, config: dict | None = None) -> str:
    doc = {
        "format_version": FORMAT_VERSION,
        "config": config,
        "graph": graph_to_dict(graph),
    }
    return json.dumps(doc, separators=(",", ":"), allow_nan=False) + "\n"


def save_model(path, graph, config=None):
    Path(path).write_text(dumps_model(graph, config), encoding="utf-8")


def loads_model(text: str):
    """Parse a model document; returns ``(graph, config)``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"model file is not valid JSON: {exc}") from exc
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise DataError(f"unsupported model format_version {version!r}")
    try:
        graph = graph_from_dict(doc["graph"])
    except (KeyError, TypeError) as exc:
        raise DataError(f"model file is missing field {exc}") from exc
    return graph, doc.get("config")


def load_model(path):
    return loads_model(Path(path).read_text(encoding="utf-8"))


def _fmt(x):
    return repr(float(x))


def format_table(table: dict) -> str:
    """CSV text with a leading ``step`` column; 2-D columns are rejected."""
    names = list(table)
    cols = [np.asarray(table[n], dtype=float) for n in names]
    for n, c in zip(names, cols):
        if c.ndim != 1:
            raise DataError(f"column {n!r} is not one-dimensional")
    n_rows = len(cols[0]) if cols else 0
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["step", *names])
    for r in range(n_rows):
        writer.writerow([r, *(_fmt(c[r]) for c in cols)])
    return buf.getvalue()


def write_table(path, table):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_table(table))


def parse_table(text: str, source="<csv>") -> dict:
    """Parse CSV text into ``{column: array}``; the ``step`` column is dropped."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DataError(f"{source}: empty file") from None
    header = [h.strip() for h in header]
    if len(set(header)) != len(header):
        raise DataError(f"{source}: duplicate column names in header")
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise DataError(f"{source}: row {lineno} has {len(row)} cells, header has {len(header)}")
        try:
            values = [float(c) for c in row]
        except ValueError:
            raise DataError(f"{source}: non-numeric cell in row {lineno}") from None
        if not all(math.isfinite(v) for v in values):
            raise DataError(f"{source}: non-finite cell in row {lineno}")
        rows.append(values)
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return {h: data[:, i] for i, h in enumerate(header) if h != "step"}


def read_table(path) -> dict:
    return parse_table(Path(path).read_text(encoding="utf-8"), source=str(path))


def format_matrix(m) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in np.asarray(m, dtype=float):
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def parse_matrix(text: str) -> np.ndarray:
    rows = [[float(c) for c in row] for row in csv.reader(io.StringIO(text)) if row]
    return np.array(rows, dtype=float)
