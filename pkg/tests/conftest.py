import math

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from specind.gibbs import GibbsParams
from specind.graph_core import Graph

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@st.composite
def connected_graphs(draw, min_n=1, max_n=6):
    """Random spanning tree plus extra random edges, so always connected."""
    n = draw(st.integers(min_n, max_n))
    edges = set()
    for v in range(1, n):
        u = draw(st.integers(0, v - 1))
        edges.add((u, v))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in edges]
    if pairs:
        extra = draw(st.lists(st.sampled_from(pairs), max_size=len(pairs), unique=True))
        edges.update(extra)
    return Graph.from_edges(n, sorted(edges))


log_scale = st.floats(-2.0, 2.0, allow_nan=False)


@st.composite
def gibbs_params(draw, allow_hardcore=True):
    lb, lg, ll = draw(log_scale), draw(log_scale), draw(log_scale)
    beta, gamma = sorted((math.exp(lb), math.exp(lg)))
    if allow_hardcore and draw(st.booleans()) and draw(st.booleans()):
        beta = 0.0
    return GibbsParams(beta, gamma, math.exp(ll))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
