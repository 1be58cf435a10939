"""Networks of maps bound to named streams and coupled by Hebbian links.

Training adapts every map and every link on synchronised frames. After
training, unobserved streams are recovered by relaxation: observed maps
are clamped to their sensor response, activity flows across the links and
each free node keeps the strongest incoming evidence until nothing moves.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .decoding import DecodeResult, decode
from .errors import (
    ConfigurationError,
    ConnectivityError,
    IncompleteFrameError,
    InputDomainError,
    ParameterError,
    StateError,
)
from .hebbian import BACKWARD, FORWARD, CrossLink
from .som import SQRT_2PI, WARMUP_SIZE, DecaySchedule, SelfOrganizingMap

SCHEDULE_NAMES = ("alpha", "sigma", "eta", "beta")


def default_schedules(planned_steps, max_neurons):
    """Exponential decays over a planned run.

    The neighbourhood shrinks twice as fast as the rates so that tuning
    curves have time to sharpen before learning freezes.
    """
    tau = max(planned_steps, 2) / 2.0
    return {
        "alpha": DecaySchedule(0.1, 0.001, tau),
        "sigma": DecaySchedule(max_neurons / 2.0, 0.5, tau / 2.0),
        "eta": DecaySchedule(0.05, 0.001, tau),
        "beta": DecaySchedule(0.5, 0.01, tau),
    }


@dataclass
class StreamNode:
    name: str
    n_neurons: int
    input_dim: int = 1
    som: SelfOrganizingMap | None = None
    last_activity: np.ndarray | None = None
    clamped: bool = False


@dataclass
class RelationEdge:
    source: str
    target: str
    link: CrossLink

    @property
    def endpoints(self):
        return (self.source, self.target)


def _normalized(act):
    peak = act.max()
    return act / peak if peak > 0 else act


@dataclass(eq=False)
class RelationGraph:
    """Named-stream network.

    Parameters
    ----------
    nodes : dict
        ``name -> n_neurons`` or ``name -> (n_neurons, input_dim)``.
    edges : sequence of (str, str)
        Undirected relations; the first name is the link's source side.
    schedules : dict, optional
        ``alpha``, ``sigma``, ``eta``, ``beta`` decay schedules. Defaults
        follow :func:`default_schedules` with ``planned_steps``.
    seed : int
        Seeds the generator used to initialise the maps.
    """

    nodes: dict
    edges: list
    schedules: dict = None
    relax_lambda: float = 0.5
    relax_max_iter: int = 50
    relax_tol: float = 1e-4
    seed: int = 0
    planned_steps: int = 20000
    step_count: int = 0
    _warmup: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        nodes = {}
        for name, size in self.nodes.items():
            if isinstance(size, StreamNode):
                nodes[name] = size
                continue
            n, d = (size, 1) if np.isscalar(size) else tuple(size)
            nodes[name] = StreamNode(str(name), int(n), int(d))
        self.nodes = nodes
        edges = []
        seen = set()
        for e in self.edges:
            if isinstance(e, RelationEdge):
                a, b = e.endpoints
            else:
                a, b = e
            if a not in nodes or b not in nodes:
                raise ConfigurationError(f"edge ({a}, {b}) references an unknown node")
            if a == b:
                raise ConfigurationError(f"self-loop on {a!r}")
            key = frozenset((a, b))
            if key in seen:
                raise ConfigurationError(f"more than one edge between {a!r} and {b!r}")
            seen.add(key)
            if not isinstance(e, RelationEdge):
                e = RelationEdge(a, b, CrossLink(nodes[a].n_neurons, nodes[b].n_neurons))
            edges.append(e)
        self.edges = edges
        if not self._connected(set(nodes)):
            raise ConfigurationError("relation graph must be connected")
        if self.schedules is None:
            self.schedules = default_schedules(
                self.planned_steps, max(n.n_neurons for n in nodes.values())
            )
        missing = set(SCHEDULE_NAMES) - set(self.schedules)
        if missing:
            raise ConfigurationError(f"missing schedules: {sorted(missing)}")
        if not 0 <= self.relax_lambda <= 1:
            raise ParameterError("relax_lambda must lie in [0, 1]")
        if self.relax_max_iter < 1 or not self.relax_tol > 0:
            raise ParameterError("relax_max_iter must be >= 1 and relax_tol > 0")
        self._rng = np.random.default_rng(self.seed)

    # ---- structure -------------------------------------------------------

    def _connected(self, names):
        if not names:
            return True
        start = next(iter(names))
        return self._reachable({start}) >= names

    def _reachable(self, start):
        seen = set(start)
        queue = deque(start)
        while queue:
            n = queue.popleft()
            for m, _, _ in self.neighbours(n):
                if m not in seen:
                    seen.add(m)
                    queue.append(m)
        return seen

    def neighbours(self, name):
        """Yield ``(other, edge, direction)`` for edges touching ``name``.

        ``direction`` is the propagation direction from ``other`` to ``name``.
        """
        for e in self.edges:
            if e.source == name:
                yield e.target, e, BACKWARD
            elif e.target == name:
                yield e.source, e, FORWARD

    def edge(self, a, b):
        for e in self.edges:
            if {a, b} == {e.source, e.target}:
                return e
        raise ConfigurationError(f"no edge between {a!r} and {b!r}")

    def som(self, name):
        node = self.nodes.get(name)
        if node is None:
            raise ConfigurationError(f"unknown node {name!r}")
        if node.som is None:
            raise StateError(f"node {name!r} has not been initialised")
        return node.som

    @property
    def initialized(self):
        return all(n.som is not None for n in self.nodes.values())

    @property
    def trained(self):
        return self.initialized and any(e.link.step_count > 0 for e in self.edges)

    def subgraph(self, edges):
        """A graph sharing maps and links with ``self`` but only ``edges``."""
        chosen = [self.edge(a, b) for a, b in edges]
        names = []
        for e in chosen:
            for n in e.endpoints:
                if n not in names:
                    names.append(n)
        return RelationGraph(
            {n: self.nodes[n] for n in names},
            chosen,
            schedules=self.schedules,
            relax_lambda=self.relax_lambda,
            relax_max_iter=self.relax_max_iter,
            relax_tol=self.relax_tol,
            seed=self.seed,
            planned_steps=self.planned_steps,
            step_count=self.step_count,
        )

    # ---- training --------------------------------------------------------

    def _frame(self, samples, names):
        frame = {}
        for name in names:
            if name not in samples:
                raise IncompleteFrameError(f"training frame lacks stream {name!r}")
            x = np.asarray(samples[name], dtype=float).reshape(-1)
            if x.shape[0] != self.nodes[name].input_dim or not np.all(np.isfinite(x)):
                raise InputDomainError(f"bad sample for {name!r}: {samples[name]!r}")
            frame[name] = x
        return frame

    def initialize(self, warmup):
        """Seed uninitialised maps from a batch ``{name: array}``."""
        for name, node in self.nodes.items():
            if node.som is None and name in warmup:
                batch = np.asarray(warmup[name], dtype=float).reshape(-1, node.input_dim)
                node.som = SelfOrganizingMap.from_warmup(node.n_neurons, batch, self._rng)

    def _adapt_nodes(self, frame):
        acts = {}
        alpha, sigma = self.schedules["alpha"], self.schedules["sigma"]
        for name, x in frame.items():
            som = self.nodes[name].som
            k = som.step_count
            som.adapt(x, alpha.value(k), sigma.value(k))
            acts[name] = _normalized(som.activate(x))
            self.nodes[name].last_activity = acts[name]
        return acts

    def _update_edge(self, e, acts):
        k = e.link.step_count
        e.link.update(acts[e.source], acts[e.target],
                      self.schedules["eta"].value(k), self.schedules["beta"].value(k))

    def train_step(self, samples):
        """Adapt every map, then every link, on one synchronised frame.

        Until every map is seeded, frames are buffered; once the warm-up
        batch is complete the maps are seeded from it and the buffered
        frames are replayed.
        """
        frame = self._frame(samples, self.nodes)
        if not self.initialized:
            self._warmup.append(frame)
            if len(self._warmup) >= WARMUP_SIZE:
                self._flush_warmup()
            return self
        self._step(frame)
        return self

    def _flush_warmup(self):
        buffered, self._warmup = self._warmup, []
        self.initialize({n: np.array([f[n] for f in buffered]) for n in self.nodes})
        for frame in buffered:
            self._step(frame)

    def _step(self, frame):
        acts = self._adapt_nodes(frame)
        for e in self.edges:
            self._update_edge(e, acts)
        self.step_count += 1

    def fit(self, table, steps=None, callback=None, every=1000):
        """Run ``train_step`` over the rows of ``{name: array}``.

        Rows are reused cyclically when ``steps`` exceeds the table length.
        Maps are seeded from the first rows even when ``steps`` is 0.
        ``callback(k, rows)`` is called after every ``every`` steps with the
        indices of the rows used since the previous call.
        """
        columns = {n: np.asarray(table[n], dtype=float) for n in self.nodes if n in table}
        missing = set(self.nodes) - set(columns)
        if missing:
            raise IncompleteFrameError(f"table lacks streams {sorted(missing)}")
        n_rows = len(next(iter(columns.values())))
        if steps is None:
            steps = n_rows
        if not self.initialized:
            self.initialize({n: c[:WARMUP_SIZE] for n, c in columns.items()})
            self._warmup = []
        for k in range(steps):
            r = k % n_rows
            self._step(self._frame({n: c[r] for n, c in columns.items()}, self.nodes))
            if callback is not None and (k + 1) % every == 0:
                callback(k + 1, np.arange(k + 1 - every, k + 1) % n_rows)
        return self

    def train_pairwise(self, table, schedule, fine_tune_steps=0):
        """Train edges one at a time on just their two streams.

        Parameters
        ----------
        table : dict
            ``{name: array}`` with synchronised rows.
        schedule : sequence of ((str, str), int)
            Edges in training order with their step budgets.
        fine_tune_steps : int
            Joint ``fit`` steps on the assembled graph afterwards.
        """
        plan = []
        for item in schedule:
            (a, b), steps = item
            try:
                plan.append((self.edge(a, b), int(steps)))
            except ConfigurationError as exc:
                raise ConfigurationError(f"pair schedule references unknown edge ({a}, {b})") from exc
        for e, steps in plan:
            names = e.endpoints
            columns = {}
            for n in names:
                if n not in table:
                    raise IncompleteFrameError(f"table lacks stream {n!r}")
                columns[n] = np.asarray(table[n], dtype=float)
            self.initialize({n: c[:WARMUP_SIZE] for n, c in columns.items()})
            n_rows = len(columns[names[0]])
            for k in range(steps):
                r = k % n_rows
                acts = self._adapt_nodes(self._frame({n: c[r] for n, c in columns.items()}, names))
                self._update_edge(e, acts)
            self.step_count += steps
        if fine_tune_steps:
            self.fit(table, fine_tune_steps)
        return self

    # ---- relaxation ------------------------------------------------------

    def bottom_up(self, name, sample):
        """Peak-normalised sensor response of node ``name``.

        Samples far outside the learned range underflow every tuning
        curve; they then excite only the neuron with the largest
        log-activation.
        """
        som = self.som(name)
        x = np.asarray(sample, dtype=float).reshape(-1)
        act = som.activate(x)
        if act.max() > 0:
            return act / act.max()
        diff = (x - som.preferred) / som.scale
        log_act = -np.einsum("ij,ij->i", diff, diff) / (2 * som.tuning_var) - 0.5 * np.log(som.tuning_var)
        out = np.zeros(som.n_neurons)
        out[int(np.argmax(log_act))] = 1.0
        return out

    def lateral(self, name, state):
        """Element-wise maximum of the activity arriving over all links."""
        best = None
        for other, e, direction in self.neighbours(name):
            src = state.get(other)
            if src is None or not np.any(src > 0):
                continue
            msg = e.link.propagate(src, direction)
            best = msg if best is None else np.maximum(best, msg)
        if best is None:
            return np.zeros(self.nodes[name].n_neurons)
        return _normalized(best)

    def _check_ready(self):
        if not self.trained:
            raise StateError("graph has not been trained")

    def _check_names(self, names):
        for n in names:
            if n not in self.nodes:
                raise ConfigurationError(f"unknown node {n!r}")

    def _decode(self, name, act):
        som = self.som(name)
        if som.input_dim == 1 and np.any(act > 0):
            # lateral patterns are peak-normalised; restore tuning-curve scale
            i = int(np.argmax(act))
            act = act / act[i] / (SQRT_2PI * math.sqrt(som.tuning_var[i]))
        return decode(som, act)

    def relax_infer(self, observed):
        """Relaxed activities of every node given clamped observations."""
        state = {n: self.bottom_up(n, x) for n, x in observed.items()}
        free = [n for n in self.nodes if n not in observed]
        for n in free:
            state[n] = np.zeros(self.nodes[n].n_neurons)
        for _ in range(self.relax_max_iter):
            new = {n: self.lateral(n, state) for n in free}
            change = max((np.max(np.abs(new[n] - state[n])) for n in free), default=0.0)
            state.update(new)
            if change < self.relax_tol:
                break
        return state

    def infer(self, observed, query):
        """Recover the ``query`` streams from the ``observed`` ones.

        Returns ``{name: DecodeResult}``.
        """
        observed = dict(observed)
        query = list(query)
        self._check_names(list(observed) + query)
        if set(observed) & set(query):
            raise ParameterError("a stream cannot be both observed and queried")
        if not query:
            return {}
        if not observed:
            raise ParameterError("infer needs at least one observed stream")
        self._check_ready()
        reach = self._reachable(set(observed))
        lost = [q for q in query if q not in reach]
        if lost:
            raise ConnectivityError(f"streams {lost} are unreachable from the observations")
        state = self.relax_infer(observed)
        return {q: self._decode(q, state[q]) for q in query}

    def relax_denoise(self, observed):
        """Blend each sensor response with the evidence of its neighbours.

        Messages along an edge leave out what arrived over that same edge,
        so a node's own sensor reading never echoes back to it.
        """
        lam = self.relax_lambda
        bu = {n: self.bottom_up(n, observed[n]) for n in self.nodes}
        if lam >= 1:
            return bu
        incoming = {n: {} for n in self.nodes}

        def belief(n, exclude=None):
            evidence = [m for k, m in incoming[n].items() if k != exclude]
            if not evidence:
                return bu[n]
            return lam * bu[n] + (1.0 - lam) * _normalized(np.maximum.reduce(evidence))

        state = dict(bu)
        for _ in range(self.relax_max_iter):
            msgs = {}
            for e in self.edges:
                a, b = e.endpoints
                msgs[(a, b)] = _normalized(e.link.propagate(belief(a, exclude=b), FORWARD))
                msgs[(b, a)] = _normalized(e.link.propagate(belief(b, exclude=a), BACKWARD))
            for (src, dst), m in msgs.items():
                incoming[dst][src] = m
            new = {n: belief(n) for n in self.nodes}
            change = max(np.max(np.abs(new[n] - state[n])) for n in self.nodes)
            state = new
            if change < self.relax_tol:
                break
        return state

    def denoise(self, observed):
        """Reconcile a full set of observations with the learned relations."""
        self._check_names(observed)
        missing = set(self.nodes) - set(observed)
        if missing:
            raise ParameterError(f"denoise needs every stream; missing {sorted(missing)}")
        self._check_ready()
        state = self.relax_denoise(observed)
        return {n: self._decode(n, state[n]) for n in self.nodes}

    # ---- export ----------------------------------------------------------

    def relation_sweep(self, source, target, n_probes=200):
        """Decode ``target`` over evenly spaced ``source`` probes.

        Probes span the range of the source map's preferred values.
        Returns ``(probes, decoded)``.
        """
        som = self.som(source)
        if som.input_dim != 1:
            raise ConfigurationError("relation sweeps need a one-dimensional source")
        self.edge(source, target)
        probes = np.linspace(som.preferred.min(), som.preferred.max(), n_probes)
        sub = self.subgraph([(source, target)])
        decoded = np.array([float(sub.infer({source: p}, [target])[target]) for p in probes])
        return probes, decoded


def infer(graph, observed, query):
    return graph.infer(observed, query)


def denoise(graph, observed):
    return graph.denoise(observed)


def train_step(graph, samples):
    return graph.train_step(samples)


def train_pairwise(graph, source, schedule):
    return graph.train_pairwise(source, schedule)


__all__ = [
    "DecodeResult",
    "RelationEdge",
    "RelationGraph",
    "StreamNode",
    "default_schedules",
    "denoise",
    "infer",
    "train_pairwise",
    "train_step",
]
