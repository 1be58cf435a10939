import math

import numpy as np
import pytest

from relnet import synth
from relnet.errors import (
    ConfigurationError,
    IncompleteFrameError,
    InputDomainError,
    ParameterError,
    StateError,
)
from relnet.graph import RelationGraph, default_schedules, infer
from relnet.som import DecaySchedule, winner

from conftest import train_preset


def snapshot(g):
    out = []
    for node in g.nodes.values():
        out += [node.som.preferred.copy(), node.som.tuning_var.copy()]
    for e in g.edges:
        out += [e.link.w_cross.copy(), e.link.mean_p.copy(), e.link.mean_q.copy()]
    return out


def ridge_fraction(g, a, b, f):
    e = g.edge(a, b)
    wp = g.som(e.source).preferred[:, 0]
    wq = g.som(e.target).preferred[:, 0]
    j = np.argmax(e.link.w_cross, axis=1)
    tol = 3 * (wq.max() - wq.min()) / len(wq)
    return np.mean(np.abs(wq[j] - f(wp)) < tol)


@pytest.fixture(scope="module")
def chain_graph():
    g, _ = train_preset("chain", seed=2)
    return g


class TestStructure:
    def test_rejects_bad_graphs(self):
        with pytest.raises(ConfigurationError):
            RelationGraph({"a": 5, "b": 5}, [("a", "c")])
        with pytest.raises(ConfigurationError):
            RelationGraph({"a": 5, "b": 5}, [("a", "a")])
        with pytest.raises(ConfigurationError):
            RelationGraph({"a": 5, "b": 5}, [("a", "b"), ("b", "a")])
        with pytest.raises(ConfigurationError):
            RelationGraph({"a": 5, "b": 5, "c": 5}, [("a", "b")])
        with pytest.raises(ParameterError):
            RelationGraph({"a": 5, "b": 5}, [("a", "b")], relax_lambda=1.5)

    def test_cycles_allowed(self):
        g = RelationGraph({"a": 5, "b": 5, "c": 5}, [("a", "b"), ("b", "c"), ("c", "a")])
        assert sorted(m for m, _, _ in g.neighbours("a")) == ["b", "c"]

    def test_default_schedules(self):
        s = default_schedules(20000, 100)
        assert s["alpha"].value(0) == 0.1 and s["alpha"].floor == 0.001
        assert s["sigma"].value(0) == 50.0 and s["sigma"].floor == 0.5
        assert s["eta"].value(0) == 0.05 and s["beta"].value(0) == 0.5

    def test_untrained_state(self):
        g = RelationGraph({"a": 5, "b": 5}, [("a", "b")])
        with pytest.raises(StateError):
            g.som("a")
        with pytest.raises(StateError):
            g.infer({"a": 0.1}, ["b"])


class TestTraining:
    def test_constant_samples_converge(self):
        g = RelationGraph({"a": 10, "b": 10}, [("a", "b")], planned_steps=1000)
        for _ in range(1000):
            g.train_step({"a": 0.3, "b": -2.0})
        for name, c in (("a", 0.3), ("b", -2.0)):
            som = g.som(name)
            b = winner(som.activate([c]))
            assert abs(som.preferred[b, 0] - c) < 1e-6
        assert g.step_count == 1000

    def test_warmup_buffering(self):
        g = RelationGraph({"a": 10, "b": 10}, [("a", "b")])
        for k in range(99):
            g.train_step({"a": k / 99, "b": 1 - k / 99})
        assert not g.initialized and g.step_count == 0
        g.train_step({"a": 1.0, "b": 0.0})
        assert g.initialized and g.step_count == 100

    def test_incomplete_frame(self):
        g = RelationGraph({"a": 5, "b": 5}, [("a", "b")])
        with pytest.raises(IncompleteFrameError):
            g.train_step({"a": 0.1})
        with pytest.raises(InputDomainError):
            g.train_step({"a": 0.1, "b": math.nan})
        with pytest.raises(IncompleteFrameError):
            g.fit({"a": [0.1, 0.2]})

    def test_zero_step_fit_initialises(self):
        g = RelationGraph({"a": 5, "b": 5}, [("a", "b")])
        g.fit({"a": np.linspace(0, 1, 200), "b": np.linspace(0, 1, 200)}, steps=0)
        assert g.initialized and not g.trained

    def test_ridge_on_square(self, square_graph):
        assert ridge_fraction(square_graph, "x", "y", lambda x: x**2) >= 0.8

    def test_chain_ridges(self, chain_graph):
        assert ridge_fraction(chain_graph, "m1", "m2", lambda x: x**2) >= 0.8
        assert ridge_fraction(chain_graph, "m2", "m3", np.sqrt) >= 0.8


class TestPairwise:
    def test_unknown_edge(self):
        g = RelationGraph({"a": 5, "b": 5}, [("a", "b")])
        with pytest.raises(ConfigurationError):
            g.train_pairwise({"a": [0.1], "b": [0.2]}, [(("a", "c"), 10)])

    def test_single_edge_matches_joint_training(self):
        d = synth.generate(synth.preset("pair_square"), 2000, 0.0, 4)
        g1 = RelationGraph({"x": 20, "y": 20}, [("x", "y")], seed=4, planned_steps=2000)
        g2 = RelationGraph({"x": 20, "y": 20}, [("x", "y")], seed=4, planned_steps=2000)
        g1.fit(d)
        g2.train_pairwise(d, [(("x", "y"), 2000)])
        for a, b in zip(snapshot(g1), snapshot(g2)):
            np.testing.assert_array_equal(a, b)

    def test_floor_rate_drift(self):
        g, d = train_preset("pair_square", n=20000, seed=6)
        e = g.edge("x", "y")
        before = e.link.w_cross.copy()
        floor = {
            "alpha": DecaySchedule(0.001, 0.001, 1.0),
            "sigma": DecaySchedule(0.5, 0.5, 1.0),
            "eta": DecaySchedule(0.001, 0.001, 1.0),
            "beta": DecaySchedule(0.01, 0.01, 1.0),
        }
        g.schedules = floor
        g.train_pairwise(d, [(("x", "y"), 100)])
        drift = np.linalg.norm(e.link.w_cross - before) / np.linalg.norm(before)
        assert drift < 0.01

    def test_order_independent_ridges(self):
        d = synth.generate(synth.preset("tree"), 20000, 0.0, 9)
        for order in ([("x", "y"), ("x", "z")], [("x", "z"), ("x", "y")]):
            g = RelationGraph({"x": 100, "y": 100, "z": 100}, [("x", "y"), ("x", "z")], seed=9,
                              planned_steps=20000)
            g.train_pairwise(d, [(e, 20000) for e in order])
            assert ridge_fraction(g, "x", "y", lambda x: x**2) >= 0.8
            assert ridge_fraction(g, "x", "z", lambda x: 0.5 * np.sin(np.pi * x) + 0.5) >= 0.8


class TestInfer:
    def test_square_midpoint(self, square_graph):
        res = infer(square_graph, {"x": 0.5}, ["y"])
        assert float(res["y"]) == pytest.approx(0.25, abs=0.05)
        assert res["y"].confidence > 0

    def test_round_trip_probes(self, square_graph):
        xs = np.linspace(0, 1, 200)
        ys = np.array([float(square_graph.infer({"x": x}, ["y"])["y"]) for x in xs])
        assert np.mean(np.abs(ys - xs**2) < 5 * 1.0 / 100) >= 0.9

    def test_empty_query(self, square_graph):
        assert square_graph.infer({"x": 0.2, "y": 0.04}, []) == {}

    def test_errors(self, square_graph):
        with pytest.raises(ParameterError):
            square_graph.infer({"x": 0.2}, ["x"])
        with pytest.raises(ParameterError):
            square_graph.infer({}, ["y"])
        with pytest.raises(ConfigurationError):
            square_graph.infer({"x": 0.2}, ["q"])

    def test_does_not_mutate(self, square_graph):
        before = snapshot(square_graph)
        square_graph.infer({"x": 0.3}, ["y"])
        square_graph.denoise({"x": 0.3, "y": 0.1})
        for a, b in zip(before, snapshot(square_graph)):
            np.testing.assert_array_equal(a, b)

    def test_single_iteration_with_infinite_tol(self, square_graph, monkeypatch):
        calls = []
        original = RelationGraph.lateral

        def counting(self, name, state):
            calls.append(name)
            return original(self, name, state)

        monkeypatch.setattr(RelationGraph, "lateral", counting)
        sub = square_graph.subgraph([("x", "y")])
        sub.relax_tol = math.inf
        sub.infer({"x": 0.4}, ["y"])
        assert calls == ["y"]

    def test_far_outside_sample(self, square_graph):
        res = square_graph.infer({"x": 50.0}, ["y"])
        lo, hi = square_graph.som("y").bounds()
        assert lo[0] <= float(res["y"]) <= hi[0]


class TestDenoise:
    def test_consistent_inputs_fixed_point(self, square_graph):
        for x in (0.2, 0.5, 0.8):
            out = square_graph.denoise({"x": x, "y": x**2})
            assert float(out["x"]) == pytest.approx(x, abs=0.02)
            assert float(out["y"]) == pytest.approx(x**2, abs=0.02)

    def test_lambda_one_is_decode(self, square_graph):
        sub = square_graph.subgraph([("x", "y")])
        sub.relax_lambda = 1.0
        out = sub.denoise({"x": 0.3, "y": 0.5})
        for name, v in (("x", 0.3), ("y", 0.5)):
            som = sub.som(name)
            assert float(out[name]) == pytest.approx(v, abs=2.0 / som.n_neurons)

    def test_reduces_error(self, square_graph):
        rng = np.random.default_rng(3)
        x = rng.random(200)
        y = x**2 + rng.normal(0, 0.1, 200)
        den = np.array([float(square_graph.denoise({"x": a, "y": b})["y"]) for a, b in zip(x, y)])
        assert np.sqrt(np.mean((den - x**2) ** 2)) < np.sqrt(np.mean((y - x**2) ** 2))

    def test_needs_every_stream(self, square_graph):
        with pytest.raises(ParameterError):
            square_graph.denoise({"x": 0.3})


def test_relation_sweep(square_graph):
    probes, decoded = square_graph.relation_sweep("x", "y", 50)
    assert probes.shape == decoded.shape == (50,)
    assert np.max(np.abs(decoded - probes**2)) < 0.05
