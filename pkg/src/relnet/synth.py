"""Synchronised multimodal streams with known hidden relations.

Each topology is a set of named streams connected by analytic relations.
The root stream is sampled uniformly; every other stream is obtained by
applying relations along the generating tree, and independent Gaussian
noise is added per stream at the end.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, SpecificationError

KINDS = ("power", "polynomial", "affine", "sine", "composed")
SHAPES = ("pair", "chain", "tree", "cycle")
CYCLE_PROBES = 100
CYCLE_TOL = 1e-9


@dataclass(frozen=True)
class RelationSpec:
    """An analytic map ``y = f(x)`` defined on ``domain``.

    ``params`` by kind:

    * power -- ``[p]`` or ``[c, p]``: ``c * x**p``
    * polynomial -- ascending coefficients
    * affine -- ``[a, b]``: ``a * x + b``
    * sine -- ``[amp, freq, phase, offset]``: ``amp * sin(freq * x + phase) + offset``
    * composed -- no params; ``parts`` are applied left to right
    """

    kind: str
    params: tuple = ()
    domain: tuple = (0.0, 1.0)
    parts: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        object.__setattr__(self, "domain", tuple(float(v) for v in self.domain))
        if self.kind not in KINDS:
            raise SpecificationError(f"unknown relation kind {self.kind!r}")
        lo, hi = self.domain
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise SpecificationError(f"degenerate domain {self.domain}")
        if not all(math.isfinite(p) for p in self.params):
            raise SpecificationError("relation parameters must be finite")
        n = len(self.params)
        if self.kind == "power" and n not in (1, 2):
            raise SpecificationError("power relation takes [p] or [c, p]")
        if self.kind == "polynomial" and n == 0:
            raise SpecificationError("polynomial needs at least one coefficient")
        if self.kind == "affine" and n != 2:
            raise SpecificationError("affine relation takes [a, b]")
        if self.kind == "sine" and n != 4:
            raise SpecificationError("sine relation takes [amp, freq, phase, offset]")
        if self.kind == "composed" and not self.parts:
            raise SpecificationError("composed relation needs parts")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.kind == "power":
            c, e = (1.0, p[0]) if len(p) == 1 else p
            return c * np.power(x, e)
        if self.kind == "polynomial":
            return np.polynomial.polynomial.polyval(x, p)
        if self.kind == "affine":
            return p[0] * x + p[1]
        if self.kind == "sine":
            return p[0] * np.sin(p[1] * x + p[2]) + p[3]
        for part in self.parts:
            x = part(x)
        return x

    def to_dict(self):
        d = {"kind": self.kind, "params": list(self.params), "domain": list(self.domain)}
        if self.parts:
            d["parts"] = [part.to_dict() for part in self.parts]
        return d

    @classmethod
    def from_dict(cls, d):
        parts = tuple(cls.from_dict(p) for p in d.get("parts", ()))
        return cls(d["kind"], tuple(d.get("params", ())), tuple(d.get("domain", (0.0, 1.0))), parts)


@dataclass(frozen=True)
class TopologySpec:
    """Streams and the directed relations that generate them.

    For a cycle the last edge closes the loop; it is not used for
    generation but must compose with the others to the identity.
    """

    shape: str
    edges: tuple
    root_domain: tuple = (0.0, 1.0)
    nodes: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise SpecificationError(f"unknown topology shape {self.shape!r}")
        edges = tuple((str(a), str(b), r) for a, b, r in self.edges)
        object.__setattr__(self, "edges", edges)
        if not edges:
            raise SpecificationError("topology needs at least one edge")
        names = []
        for a, b, _ in edges:
            if a == b:
                raise SpecificationError(f"self-loop on {a!r}")
            for n in (a, b):
                if n not in names:
                    names.append(n)
        object.__setattr__(self, "nodes", tuple(names))
        pairs = [frozenset((a, b)) for a, b, _ in edges]
        if len(set(pairs)) != len(pairs):
            raise SpecificationError("duplicate edge between the same pair of streams")
        # generating structure must be a tree rooted at the first node
        gen = self.generating_edges()
        if len(gen) != len(names) - 1:
            raise SpecificationError(f"{self.shape} topology does not form a generating tree")
        self.generation_order()
        if self.shape == "cycle":
            self.check_cycle()

    @property
    def root(self):
        return self.nodes[0]

    def generating_edges(self):
        return self.edges[:-1] if self.shape == "cycle" else self.edges

    def generation_order(self):
        children = {}
        indeg = {n: 0 for n in self.nodes}
        for a, b, r in self.generating_edges():
            children.setdefault(a, []).append((b, r))
            indeg[b] += 1
        if indeg[self.root] != 0 or any(indeg[n] != 1 for n in self.nodes[1:]):
            raise SpecificationError("every non-root stream needs exactly one generating edge")
        order, queue = [], deque([self.root])
        while queue:
            a = queue.popleft()
            for b, r in children.get(a, ()):
                order.append((a, b, r))
                queue.append(b)
        if len(order) != len(self.nodes) - 1:
            raise SpecificationError("generating edges do not reach every stream")
        return order

    def check_cycle(self):
        """Compose the relations around the loop and compare with identity."""
        lo, hi = self.root_domain
        x = np.linspace(lo, hi, CYCLE_PROBES)
        y = x
        node = self.root
        remaining = list(self.edges)
        for _ in range(len(self.edges)):
            step = next(((a, b, r) for a, b, r in remaining if a == node), None)
            if step is None:
                raise SpecificationError("cycle edges do not form a directed loop")
            remaining.remove(step)
            y = step[2](y)
            node = step[1]
        if node != self.root or np.max(np.abs(y - x)) > CYCLE_TOL:
            raise SpecificationError("relations around the cycle do not compose to the identity")

    def to_dict(self):
        return {
            "shape": self.shape,
            "root_domain": list(self.root_domain),
            "edges": [{"from": a, "to": b, "relation": r.to_dict()} for a, b, r in self.edges],
        }

    @classmethod
    def from_dict(cls, d):
        edges = tuple((e["from"], e["to"], RelationSpec.from_dict(e["relation"])) for e in d["edges"])
        return cls(d["shape"], edges, tuple(d.get("root_domain", (0.0, 1.0))))


def generate(spec: TopologySpec, n: int, noise_sigma: float = 0.0, seed: int = 0) -> dict:
    """Sample ``n`` synchronised rows; returns ``{name: array}`` in node order."""
    if n <= 0:
        raise ParameterError(f"n must be positive, got {n}")
    if noise_sigma < 0:
        raise ParameterError(f"noise_sigma must be nonnegative, got {noise_sigma}")
    rng = np.random.default_rng(seed)
    lo, hi = spec.root_domain
    clean = {spec.root: rng.uniform(lo, hi, n)}
    for a, b, r in spec.generation_order():
        clean[b] = r(clean[a])
    out = {}
    for name in spec.nodes:
        noise = rng.normal(0.0, noise_sigma, n) if noise_sigma > 0 else 0.0
        out[name] = clean[name] + noise
    return out


def _rel(kind, params, domain=(0.0, 1.0), parts=()):
    return RelationSpec(kind, tuple(params), tuple(domain), tuple(parts))


SQUARE = _rel("power", [2.0])
SQRT = _rel("power", [0.5])
SINE = _rel("sine", [0.5, math.pi, 0.0, 0.5])


def preset(name: str) -> TopologySpec:
    """Shipped topologies.

    ``pair_square``, ``pair_sqrt`` and ``pair_sine`` are two-stream pairs
    over ``x ~ U[0, 1]``; ``chain`` is ``x -> x**2 -> x``; ``tree`` roots
    ``y = x**2`` and ``z = 0.5 sin(pi x) + 0.5`` at ``x``; ``cycle`` is
    ``m1 -> m1**2 -> 0.5 sqrt(m2) + 0.25 -> 2 m3 - 0.5 = m1``.
    """
    if name == "pair_square":
        return TopologySpec("pair", (("x", "y", SQUARE),))
    if name == "pair_sqrt":
        return TopologySpec("pair", (("x", "y", SQRT),))
    if name == "pair_sine":
        return TopologySpec("pair", (("x", "y", SINE),))
    if name == "chain":
        return TopologySpec("chain", (("m1", "m2", SQUARE), ("m2", "m3", SQRT)))
    if name == "tree":
        return TopologySpec("tree", (("x", "y", SQUARE), ("x", "z", SINE)))
    if name == "cycle":
        to_m3 = _rel("composed", [], parts=(SQRT, _rel("affine", [0.5, 0.25])))
        back = _rel("affine", [2.0, -0.5], domain=(0.25, 0.75))
        return TopologySpec(
            "cycle", (("m1", "m2", SQUARE), ("m2", "m3", to_m3), ("m3", "m1", back))
        )
    raise SpecificationError(f"unknown preset {name!r}")


PRESETS = ("pair_square", "pair_sqrt", "pair_sine", "chain", "tree", "cycle")
