"""Chain specification: a directed multigraph with one rate function per edge.

Distributions over vertices are plain numpy vectors ordered by the graph's
vertex declaration order.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ChainValidationError
from .graphs import DirectedEdge, DirectedGraph, degree_stats
from .rates import RateFunction, Constant, Tabulated

MASS_TOLERANCE = 1e-9


class ChainSpec:
    """A continuous-time Markov chain: directed graph, per-edge rates, horizon.

    The horizon defaults to the smallest tabulated-rate horizon (infinite when
    no rate is tabulated); an explicit horizon must be covered by every
    tabulated grid.
    """

    def __init__(self, graph: DirectedGraph, rates, horizon: float | None = None):
        self.graph = graph
        rates = dict(rates)
        edge_ids = {e.id for e in graph.edges}
        missing = edge_ids - rates.keys()
        if missing:
            raise ChainValidationError(f"edges without a rate: {sorted(missing)}")
        extra = rates.keys() - edge_ids
        if extra:
            raise ChainValidationError(f"rates for unknown edges: {sorted(extra)}")
        for eid, k in rates.items():
            if not isinstance(k, RateFunction):
                raise ChainValidationError(f"rate for edge {eid!r} is not a RateFunction")
        self.rates = rates

        tab_limit = min(
            (k.horizon for k in rates.values() if isinstance(k, Tabulated)),
            default=math.inf,
        )
        if horizon is None:
            horizon = tab_limit
        horizon = float(horizon)
        if not horizon > 0.0:
            raise ChainValidationError("horizon must be positive")
        if horizon > tab_limit * (1.0 + 1e-12):
            raise ChainValidationError(
                f"horizon {horizon} exceeds a tabulated rate horizon {tab_limit}"
            )
        self.horizon = horizon
        self.degree_bound = degree_stats(graph).bound
        # rate functions aligned with graph.edges order
        self._edge_rates = tuple(rates[e.id] for e in graph.edges)

    @property
    def n_vertices(self) -> int:
        return self.graph.n_vertices

    def rate(self, edge_id: str) -> RateFunction:
        return self.rates[edge_id]

    def edge_rates(self) -> tuple[RateFunction, ...]:
        return self._edge_rates

    def rate_bound(self, t: float | None = None) -> float:
        """Largest per-edge rate supremum over [0, t] (over the horizon if None)."""
        if t is not None:
            self.check_time(t)
        return max((k.bound(t) for k in self._edge_rates), default=0.0)

    def is_homogeneous(self) -> bool:
        return all(isinstance(k, Constant) for k in self._edge_rates)

    def check_time(self, t: float) -> float:
        t = float(t)
        if not (0.0 <= t <= self.horizon * (1.0 + 1e-12)):
            raise ChainValidationError(f"time {t} outside [0, horizon={self.horizon}]")
        return t

    def out_rate(self, vidx: int, s) -> float | np.ndarray:
        """Total instantaneous rate out of the vertex with dense index vidx."""
        ks = self.graph.out_edges[vidx]
        if not ks:
            return 0.0 if np.ndim(s) == 0 else np.zeros(np.shape(s))
        total = self._edge_rates[ks[0]].value(s)
        for k in ks[1:]:
            total = total + self._edge_rates[k].value(s)
        return total

    def out_hazard(self, vidx: int, ts) -> np.ndarray:
        """Cumulative out-rate integral over [0, ts] for one vertex, vectorized."""
        ts = np.asarray(ts, dtype=float)
        total = np.zeros_like(ts)
        for k in self.graph.out_edges[vidx]:
            total = total + self._edge_rates[k].cumulative(ts)
        return total

    def __eq__(self, other):
        return (
            isinstance(other, ChainSpec)
            and self.graph == other.graph
            and self.rates == other.rates
            and self.horizon == other.horizon
        )

    def __repr__(self):
        return (
            f"ChainSpec({self.n_vertices} vertices, {len(self.graph.edges)} edges, "
            f"horizon={self.horizon})"
        )


def check_distribution(chain_or_graph, p) -> np.ndarray:
    """Validate a vertex distribution: correct length, entries >= 0, mass 1."""
    graph = getattr(chain_or_graph, "graph", chain_or_graph)
    p = np.asarray(p, dtype=float)
    if p.shape != (graph.n_vertices,):
        raise ChainValidationError(
            f"distribution has shape {p.shape}, expected ({graph.n_vertices},)"
        )
    if np.any(p < 0.0):
        raise ChainValidationError("distribution entries must be nonnegative")
    if abs(float(p.sum()) - 1.0) > MASS_TOLERANCE:
        raise ChainValidationError(f"distribution mass {p.sum()} is not 1")
    return p


def delta_distribution(chain_or_graph, vertex: str) -> np.ndarray:
    graph = getattr(chain_or_graph, "graph", chain_or_graph)
    p = np.zeros(graph.n_vertices)
    p[graph.vertex_index(vertex)] = 1.0
    return p


def uniform_distribution(chain_or_graph) -> np.ndarray:
    graph = getattr(chain_or_graph, "graph", chain_or_graph)
    n = graph.n_vertices
    if n == 0:
        raise ChainValidationError("cannot build a distribution on an empty graph")
    return np.full(n, 1.0 / n)


def embed_in_double(chain: ChainSpec) -> ChainSpec:
    """Close the chain under edge reversal, giving the added edges rate zero.

    Edges that already come in mutually reversed pairs are kept as they are,
    so a chain whose graph is a double is returned unchanged; the Markovian
    dynamics always coincide with the original chain's.
    """
    g = chain.graph
    unpaired: dict[tuple[str, str], list[int]] = {}
    paired = [False] * len(g.edges)
    for k, e in enumerate(g.edges):
        back = unpaired.get((e.target, e.source))
        if back:
            j = back.pop(0)
            paired[j] = paired[k] = True
        else:
            unpaired.setdefault((e.source, e.target), []).append(k)

    if all(paired):
        return chain

    edges = list(g.edges)
    rates = dict(chain.rates)
    existing = {e.id for e in g.edges}
    for k, e in enumerate(g.edges):
        if paired[k]:
            continue
        rid = f"{e.id}.rev"
        while rid in existing:
            rid += "'"
        existing.add(rid)
        edges.append(DirectedEdge(rid, e.target, e.source))
        rates[rid] = Constant(0.0)
    horizon = None if math.isinf(chain.horizon) else chain.horizon
    return ChainSpec(DirectedGraph(g.vertices, edges), rates, horizon)
