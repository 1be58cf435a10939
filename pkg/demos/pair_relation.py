"""
Learning a hidden relation between two streams
==============================================

Two sensors report ``x`` and ``y = x**2``. Neither the relation nor the
value ranges are given to the network; it learns both from the streams.
"""

import numpy as np

from relnet import RelationGraph, preset, generate

# %%
# Generate 20,000 synchronised samples and train two 100-neuron maps
# joined by one Hebbian link.
data = generate(preset("pair_square"), 20000, noise_sigma=0.0, seed=6)
graph = RelationGraph({"x": 100, "y": 100}, [("x", "y")], seed=6, planned_steps=20000)
graph.fit(data)

# %%
# The maps spread their neurons over the observed ranges. ``y`` is dense
# near zero because ``x**2`` piles up there, and its tuning curves are
# narrower where samples are dense.
for name in ("x", "y"):
    som = graph.som(name)
    w = np.sort(som.preferred[:, 0])
    print(f"{name}: preferred values span [{w[0]:.3f}, {w[-1]:.3f}]")
y_som = graph.som("y")
low = y_som.preferred[:, 0] < 0.25
print(f"y neurons below 0.25: {low.sum()}, mean width {np.sqrt(y_som.tuning_var[low]).mean():.4f}")
print(f"y neurons above 0.25: {(~low).sum()}, mean width {np.sqrt(y_som.tuning_var[~low]).mean():.4f}")

# %%
# The link matrix has a bright ridge along the relation: for each ``x``
# neuron the strongest partner prefers roughly the square of its value.
w = graph.edge("x", "y").link.w_cross
px = graph.som("x").preferred[:, 0]
py = graph.som("y").preferred[:, 0]
ridge = py[np.argmax(w, axis=1)]
print(f"ridge deviation from x**2 (median): {np.median(np.abs(ridge - px**2)):.4f}")

# %%
# Query the network in both directions.
for x in (0.1, 0.5, 0.9):
    y = float(graph.infer({"x": x}, ["y"])["y"])
    print(f"x = {x:.2f}  ->  y = {y:.4f}   (true {x * x:.4f})")
for y in (0.04, 0.49):
    x = float(graph.infer({"y": y}, ["x"])["x"])
    print(f"y = {y:.2f}  ->  x = {x:.4f}   (true {np.sqrt(y):.4f})")
