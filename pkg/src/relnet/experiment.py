"""Experiment configuration and end-to-end recipes.

A configuration is a JSON document such as::

    {"seed": 7,
     "topology": {"preset": "pair_square"},
     "n_samples": 20000,
     "neurons": 100,
     "relax": {"lambda": 0.5}}

``topology`` is a synthetic preset name, an explicit topology
(``shape``, ``edges``, ``root_domain``) or ``{"vision": {...}}`` for the
visual-cue network.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import synth, vision
from .errors import ConfigurationError, IncompleteFrameError, RelnetError
from .graph import RelationGraph, default_schedules
from .som import DecaySchedule

log = logging.getLogger(__name__)

VISION_DEFAULTS = {
    "kind": "translating_texture",
    "velocity": [1.0, 0.0],
    "frames": 20,
    "size": [64, 64],
    "wavelength": 20.0,
    "window": 5,
    "frames_dir": None,
}
VISION_EDGES = [["I", "V"], ["I", "G"], ["FG", "V"]]
VISION_COLUMNS = {"I": ["i"], "G": ["g_mag"], "V": ["v"], "FG": ["f_par", "g_mag"]}


@dataclass
class ExperimentConfig:
    seed: int
    topology: dict
    n_samples: int = 20000
    noise_sigma: float = 0.0
    steps: int | None = None
    neurons: int = 100
    node_neurons: dict = field(default_factory=dict)
    schedules: dict = field(default_factory=dict)
    relax: dict = field(default_factory=dict)
    pair_schedule: list | None = None
    fine_tune_steps: int = 0
    columns: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigurationError("seed must be a nonnegative integer")
        if not isinstance(self.topology, dict):
            raise ConfigurationError("topology must be an object")
        if self.n_samples < 1:
            raise ConfigurationError("n_samples must be positive")
        if self.noise_sigma < 0:
            raise ConfigurationError("noise_sigma must be nonnegative")
        if self.steps is not None and self.steps < 0:
            raise ConfigurationError("steps must be nonnegative")
        if self.neurons < 1 or any(int(v) < 1 for v in self.node_neurons.values()):
            raise ConfigurationError("neuron counts must be positive")
        unknown = set(self.schedules) - {"alpha", "sigma", "eta", "beta"}
        if unknown:
            raise ConfigurationError(f"unknown schedules {sorted(unknown)}")
        for name, s in self.schedules.items():
            if not isinstance(s, dict) or any(
                not isinstance(s.get(k, 1.0), (int, float)) or s.get(k, 1.0) <= 0
                for k in ("initial", "tau")
            ):
                raise ConfigurationError(f"schedule {name!r} needs positive initial and tau")
        unknown = set(self.relax) - {"lambda", "tol", "max_iter"}
        if unknown:
            raise ConfigurationError(f"unknown relax keys {sorted(unknown)}")
        # resolve topology eagerly so that bad references fail before any work
        self.node_layout()
        for n in self.node_neurons:
            if n not in self.node_layout():
                raise ConfigurationError(f"node_neurons references unknown node {n!r}")
        if self.pair_schedule is not None:
            names = self.node_layout()
            for item in self.pair_schedule:
                edge = item.get("edge") if isinstance(item, dict) else None
                if not edge or len(edge) != 2 or any(n not in names for n in edge):
                    raise ConfigurationError(f"pair schedule entry {item!r} references unknown nodes")
            listed = {frozenset(item["edge"]) for item in self.pair_schedule}
            untrained = [e for e in self.edge_list() if frozenset(e) not in listed]
            if untrained:
                raise ConfigurationError(f"pair schedule leaves edges {untrained} untrained")

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigurationError("configuration must be a JSON object")
        if "seed" not in d:
            raise ConfigurationError("configuration needs a seed")
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"unknown configuration keys {sorted(unknown)}")
        try:
            return cls(**d)
        except RelnetError:
            raise
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigurationError(f"invalid configuration: {exc}") from exc

    @classmethod
    def load(cls, path):
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(doc)

    def to_dict(self):
        return asdict(self)

    # ---- topology --------------------------------------------------------

    @property
    def is_vision(self):
        return "vision" in self.topology

    def vision_params(self):
        params = dict(VISION_DEFAULTS)
        params.update(self.topology.get("vision") or {})
        return params

    def topology_spec(self):
        if self.is_vision:
            return None
        t = self.topology
        try:
            if "preset" in t:
                return synth.preset(t["preset"])
            return synth.TopologySpec.from_dict(t)
        except RelnetError as exc:
            raise ConfigurationError(f"invalid topology: {exc}") from exc
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(f"invalid topology: missing {exc}") from exc

    def node_layout(self):
        """``{name: input_dim}`` in graph order."""
        if self.is_vision:
            return {"I": 1, "G": 1, "V": 1, "FG": 2}
        return {n: 1 for n in self.topology_spec().nodes}

    def edge_list(self):
        if self.is_vision:
            return [tuple(e) for e in VISION_EDGES]
        return [(a, b) for a, b, _ in self.topology_spec().edges]

    def column_map(self):
        cols = dict(VISION_COLUMNS) if self.is_vision else {n: [n] for n in self.node_layout()}
        cols.update(self.columns)
        return cols

    @property
    def train_steps(self):
        if self.steps is not None:
            return self.steps
        return self.n_samples

    def resolved_pair_schedule(self):
        if self.pair_schedule is not None:
            return [(tuple(item["edge"]), int(item.get("steps", self.train_steps)))
                    for item in self.pair_schedule]
        if self.is_vision:
            return [(tuple(e), self.train_steps) for e in VISION_EDGES]
        return None


def build_graph(cfg: ExperimentConfig) -> RelationGraph:
    layout = cfg.node_layout()
    sizes = {n: (int(cfg.node_neurons.get(n, cfg.neurons)), d) for n, d in layout.items()}
    planned = cfg.train_steps
    sched = default_schedules(planned, max(n for n, _ in sizes.values()))
    for name, override in cfg.schedules.items():
        merged = sched[name].to_dict()
        merged.update(override)
        sched[name] = DecaySchedule(**merged)
    relax = cfg.relax
    return RelationGraph(
        sizes,
        cfg.edge_list(),
        schedules=sched,
        relax_lambda=relax.get("lambda", 0.5),
        relax_tol=relax.get("tol", 1e-4),
        relax_max_iter=relax.get("max_iter", 50),
        seed=cfg.seed,
        planned_steps=planned,
    )


def vision_rows(cfg: ExperimentConfig) -> dict:
    """Extracted ``(i, g_mag, v, f_par)`` rows for a vision configuration."""
    p = cfg.vision_params()
    if p["frames_dir"]:
        paths = sorted(Path(p["frames_dir"]).glob("*.pgm"))
        frames = [vision.read_pgm(q) for q in paths]
        seq = vision.FrameSequence(frames)
    else:
        seq = vision.synth_sequence(p["kind"], p["velocity"], p["frames"], tuple(p["size"]),
                                    p["wavelength"])
    return vision.extract_streams(seq, window=p["window"], seed=cfg.seed)


def generate_table(cfg: ExperimentConfig) -> dict:
    """Raw stream columns for a configuration (synthetic or vision)."""
    if cfg.is_vision:
        return vision_rows(cfg)
    return synth.generate(cfg.topology_spec(), cfg.n_samples, cfg.noise_sigma, cfg.seed)


def node_table(cfg: ExperimentConfig, columns: dict) -> dict:
    """Assemble per-node sample arrays from named columns."""
    table = {}
    layout = cfg.node_layout()
    for node, cols in cfg.column_map().items():
        if node not in layout:
            continue
        missing = [c for c in cols if c not in columns]
        if missing:
            raise IncompleteFrameError(f"data lacks column(s) {missing} for node {node!r}")
        if len(cols) != layout[node]:
            raise ConfigurationError(f"node {node!r} needs {layout[node]} column(s), got {cols}")
        arr = np.stack([np.asarray(columns[c], dtype=float) for c in cols], axis=1)
        table[node] = arr[:, 0] if layout[node] == 1 else arr
    missing = set(layout) - set(table)
    if missing:
        raise IncompleteFrameError(f"data lacks streams for nodes {sorted(missing)}")
    return table


def train(cfg: ExperimentConfig, columns: dict | None = None, report=None) -> RelationGraph:
    """Build and train the graph described by ``cfg``.

    ``report(step, {node: quantization_error})`` is called every 1000 steps
    of joint training.
    """
    if columns is None:
        columns = generate_table(cfg)
    table = node_table(cfg, columns)
    graph = build_graph(cfg)
    pairs = cfg.resolved_pair_schedule()
    if pairs is not None:
        graph.train_pairwise(table, pairs, fine_tune_steps=cfg.fine_tune_steps)
        return graph

    def progress(step, rows):
        qe = {n: graph.som(n).quantization_error(table[n][rows]) for n in graph.nodes}
        log.info("step %d %s", step, qe)
        if report is not None:
            report(step, qe)

    graph.fit(table, cfg.train_steps, callback=progress)
    return graph
