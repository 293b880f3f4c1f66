import math

import numpy as np
import pytest

from ctmcpaths import (
    ChainSpec,
    Constant,
    DirectedGraph,
    Sinusoid,
    UndirectedGraph,
    double,
)


@pytest.fixture
def two_state():
    """Symmetric two-state chain with unit rates both ways."""
    g = DirectedGraph(["1", "2"], [("a", "1", "2"), ("b", "2", "1")])
    return ChainSpec(g, {"a": Constant(1.0), "b": Constant(1.0)})


def two_state_exact(a: float, b: float, t: float) -> float:
    """p_1(t) for the two-state chain started at vertex 1, by eigen-decomposition.

    The generator [[-a, b], [a, -b]] has eigenvalues 0 and -(a + b) with
    stationary weight b / (a + b) on vertex 1.
    """
    total = a + b
    return b / total + (a / total) * math.exp(-total * t)


@pytest.fixture
def k2_regular():
    """Single undirected edge: the 1-regular graph on two vertices."""
    return UndirectedGraph(["u", "v"], [("e", "u", "v")])


@pytest.fixture
def triangle_regular():
    return UndirectedGraph(
        ["1", "2", "3"], [("a", "1", "2"), ("b", "2", "3"), ("c", "3", "1")]
    )


@pytest.fixture
def cube_regular():
    """The 3-cube: 8 vertices, 12 edges, 3-regular."""
    verts = [format(i, "03b") for i in range(8)]
    edges = []
    for v in verts:
        for bit in range(3):
            w = v[:bit] + str(1 - int(v[bit])) + v[bit + 1 :]
            if v < w:
                edges.append((f"{v}-{w}", v, w))
    return UndirectedGraph(verts, edges)


def unit_rate_chain(x: UndirectedGraph) -> ChainSpec:
    g = double(x)
    return ChainSpec(g, {e.id: Constant(1.0) for e in g.edges})


def random_chain(
    rng: np.random.Generator,
    max_vertices: int = 8,
    max_degree: int = 4,
    max_rate: float = 2.0,
    family: str = "constant",
) -> ChainSpec:
    """Random chain within the desk-scale family: <= max_vertices vertices,
    in/out degrees <= max_degree, every rate bounded by max_rate."""
    nv = int(rng.integers(2, max_vertices + 1))
    vs = [f"v{i}" for i in range(nv)]
    target = int(rng.integers(nv - 1, 2 * nv + 1))
    edges = []
    rates = {}
    indeg = dict.fromkeys(vs, 0)
    outdeg = dict.fromkeys(vs, 0)
    attempts = 0
    while len(edges) < target and attempts < 50 * target:
        attempts += 1
        i, j = rng.integers(0, nv, 2)
        if i == j:
            continue
        u, v = vs[i], vs[j]
        if outdeg[u] >= max_degree or indeg[v] >= max_degree:
            continue
        eid = f"e{len(edges)}"
        edges.append((eid, u, v))
        outdeg[u] += 1
        indeg[v] += 1
        if family == "constant":
            rates[eid] = Constant(float(rng.uniform(0.05, max_rate)))
        elif family == "sinusoid":
            offset = float(rng.uniform(0.1, max_rate / 2))
            amp = float(rng.uniform(0.0, min(offset, max_rate - offset)))
            rates[eid] = Sinusoid(
                offset, amp, float(rng.uniform(0.5, 4.0)), float(rng.uniform(0.0, 2 * math.pi))
            )
        else:
            raise ValueError(family)
    return ChainSpec(DirectedGraph(vs, edges), rates)
