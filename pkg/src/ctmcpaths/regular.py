"""Closed forms for unit-rate walks on regular graphs.

On an r-regular graph with unit rates the walk factors through discrete path
counting: the propagator is the path-count generating function damped by
exp(-rt), equivalently the expectation of the n-step path probability under
a Poisson(rt) number of jumps. Both forms are computed here and serve as an
independent oracle for the general series propagator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import ChainSpec
from .errors import ChainValidationError
from .graphs import UndirectedGraph, double
from .measure import choose_truncation
from .rates import Constant


@dataclass(frozen=True)
class RegularChain:
    """Unit-rate chain on the double of an r-regular undirected graph."""

    x: UndirectedGraph
    r: int
    chain: ChainSpec

    @classmethod
    def from_graph(cls, x: UndirectedGraph) -> "RegularChain":
        r = x.regularity()
        if r is None or r < 1:
            raise ChainValidationError("graph is not regular with positive degree")
        g = double(x)
        rates = {e.id: Constant(1.0) for e in g.edges}
        return cls(x, r, ChainSpec(g, rates))

    @classmethod
    def from_chain(cls, chain: ChainSpec) -> "RegularChain":
        """Recognize a unit-rate chain on the double of a regular graph.

        The edges must pair up into mutual reversals with all rates equal
        to the constant 1.
        """
        for k in chain.edge_rates():
            if not (isinstance(k, Constant) and k.rate == 1.0):
                raise ChainValidationError("not a unit-rate chain")
        g = chain.graph
        unpaired: dict[tuple[str, str], list[int]] = {}
        pairs = []
        for k, e in enumerate(g.edges):
            back = unpaired.get((e.target, e.source))
            if back:
                pairs.append((back.pop(0), k))
            else:
                unpaired.setdefault((e.source, e.target), []).append(k)
        if any(v for v in unpaired.values()):
            raise ChainValidationError("graph is not a double: unpaired directed edges")
        x = UndirectedGraph(
            g.vertices,
            [(f"u{n}", g.edges[i].source, g.edges[i].target) for n, (i, _) in enumerate(pairs)],
        )
        r = x.regularity()
        if r is None or r < 1:
            raise ChainValidationError("underlying graph is not regular")
        return cls(x, r, chain)


def path_counts(x: UndirectedGraph, n: int) -> np.ndarray:
    """Number of length-n paths in the double between each vertex pair.

    Exact integer arithmetic (entries grow like r**n); equals the n-th power
    of the undirected multi-adjacency matrix, so each row of an r-regular
    graph sums to r**n.
    """
    if n < 0:
        raise ChainValidationError("path length must be >= 0")
    size = len(x.vertices)
    index = {v: i for i, v in enumerate(x.vertices)}
    adjacency = np.zeros((size, size), dtype=object)
    for e in x.edges:
        adjacency[index[e.u], index[e.v]] += 1
        adjacency[index[e.v], index[e.u]] += 1
    power = np.eye(size, dtype=int).astype(object)
    for _ in range(n):
        power = np.dot(power, adjacency)
    return power


def poisson_pmf(r: float, t: float, n: int) -> float:
    """Probability of n events for a Poisson variable with mean r*t."""
    if n < 0:
        raise ChainValidationError("n must be >= 0")
    mean = r * t
    if mean == 0.0:
        return 1.0 if n == 0 else 0.0
    return math.exp(n * math.log(mean) - mean - math.lgamma(n + 1))


def _truncation(reg: RegularChain, t: float, epsilon: float) -> int:
    order, _ = choose_truncation(1.0, reg.r, t, epsilon)
    return order


def heat_kernel_table(reg: RegularChain, t: float, epsilon: float) -> np.ndarray:
    """exp(-rt) * sum_n counts_n * t^n / n! over all vertex pairs, truncated
    with the shared certificate machinery (R = 1, D = r)."""
    if t < 0.0:
        raise ChainValidationError("t must be >= 0")
    order = _truncation(reg, t, epsilon)
    size = len(reg.x.vertices)
    total = np.zeros((size, size))
    counts = path_counts(reg.x, 0)
    adjacency = _adjacency(reg)
    weight = math.exp(-reg.r * t)  # e^{-rt} t^n / n! at n = 0
    for n in range(order + 1):
        total += counts.astype(float) * weight
        counts = np.dot(counts, adjacency)
        weight *= t / (n + 1)
    return total


def _adjacency(reg: RegularChain) -> np.ndarray:
    index = {v: i for i, v in enumerate(reg.x.vertices)}
    a = np.zeros((len(index), len(index)), dtype=object)
    for e in reg.x.edges:
        a[index[e.u], index[e.v]] += 1
        a[index[e.v], index[e.u]] += 1
    return a


def heat_kernel(reg: RegularChain, i: str, j: str, t: float, epsilon: float) -> float:
    """Probability of being at j at time t having started at i."""
    table = heat_kernel_table(reg, t, epsilon)
    return float(table[reg.x.vertices.index(i), reg.x.vertices.index(j)])


def subordination_expectation(
    reg: RegularChain, i: str, j: str, t: float, epsilon: float
) -> float:
    """Poisson-weighted expectation of the n-step path probabilities.

    phi_n(i, j) = counts_n(i, j) / r^n is the chance a discrete walk from i
    sits at j after n jumps; weighting by the Poisson(rt) mass recovers the
    heat kernel term by term.
    """
    order = _truncation(reg, t, epsilon)
    ii = reg.x.vertices.index(i)
    jj = reg.x.vertices.index(j)
    counts = path_counts(reg.x, 0)
    adjacency = _adjacency(reg)
    total = 0.0
    for n in range(order + 1):
        phi = float(counts[ii, jj]) / float(reg.r**n)
        total += phi * poisson_pmf(reg.r, t, n)
        counts = np.dot(counts, adjacency)
    return total
