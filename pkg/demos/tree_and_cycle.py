"""
Trees and cycles of relations
=============================

Networks need not be pairs. A tree shares one root between two leaves;
a cycle closes a loop of relations so that a stream can be reached along
two different paths.
"""

import numpy as np

from relnet import RelationGraph, generate, preset


def train(name, seed=6, n=20000):
    spec = preset(name)
    g = RelationGraph({k: 100 for k in spec.nodes}, [(a, b) for a, b, _ in spec.edges],
                      seed=seed, planned_steps=n)
    g.fit(generate(spec, n, 0.0, seed))
    return g


# %%
# Tree: ``y = x**2`` and ``z = 0.5 sin(pi x) + 0.5`` both hang off ``x``.
# Hiding a leaf, the network recovers it from whatever is still observed.
tree = train("tree")
xs = np.linspace(0, 1, 11)
for x in xs[::5]:
    z_true = 0.5 * np.sin(np.pi * x) + 0.5
    out = tree.infer({"x": x, "y": x * x}, ["z"])
    print(f"x = {x:.1f}: z = {float(out['z']):.3f} (true {z_true:.3f})")

# %%
# Only the root observed: both leaves are recovered at once.
out = tree.infer({"x": 0.3}, ["y", "z"])
print({k: round(float(v), 3) for k, v in out.items()})

# %%
# Cycle: ``m1 -> m2 = m1**2 -> m3 = 0.5 sqrt(m2) + 0.25 -> m1 = 2 m3 - 0.5``.
# ``m3`` can be read off the direct link or through ``m2``; the two arcs
# are subgraphs that share the trained maps and links.
cycle = train("cycle")
direct = cycle.subgraph([("m3", "m1")])
through = cycle.subgraph([("m1", "m2"), ("m2", "m3")])
for m1 in (0.2, 0.5, 0.8):
    a = float(direct.infer({"m1": m1}, ["m3"])["m3"])
    b = float(through.infer({"m1": m1}, ["m3"])["m3"])
    print(f"m1 = {m1}: direct {a:.3f}, via m2 {b:.3f}, true {0.5 * m1 + 0.25:.3f}")
