import numpy as np
import pytest

from relnet import synth
from relnet.graph import RelationGraph

ACCEPTANCE_RESULTS = []


def train_preset(name, n=20000, seed=6, neurons=100, noise=0.0):
    spec = synth.preset(name)
    data = synth.generate(spec, n, noise, seed)
    g = RelationGraph({k: neurons for k in spec.nodes}, [(a, b) for a, b, _ in spec.edges],
                      seed=seed, planned_steps=n)
    g.fit(data)
    return g, data


@pytest.fixture(scope="session")
def square_graph():
    g, _ = train_preset("pair_square")
    return g


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)
