"""Finite directed/undirected multigraphs, the double construction, and path enumeration.

Vertices and edges carry opaque string ids; declaration order is preserved
and defines the dense index used by every matrix and vector in the package.
Loop edges are rejected; parallel edges are allowed. All graph objects are
immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ChainValidationError, ResourceLimitError

DEFAULT_PATH_LIMIT = 10_000_000


@dataclass(frozen=True)
class UndirectedEdge:
    id: str
    u: str
    v: str


@dataclass(frozen=True)
class DirectedEdge:
    id: str
    source: str
    target: str


def _check_vertices(vertices):
    vertices = tuple(vertices)
    if len(set(vertices)) != len(vertices):
        raise ChainValidationError("duplicate vertex ids", field="vertices")
    return vertices


class UndirectedGraph:
    """Undirected multigraph: vertex ids plus (edge id, {u, v}) pairs."""

    def __init__(self, vertices, edges):
        self.vertices = _check_vertices(vertices)
        built = []
        seen = set()
        vset = set(self.vertices)
        for pos, e in enumerate(edges):
            if not isinstance(e, UndirectedEdge):
                e = UndirectedEdge(*e)
            where = f"edges[{pos}]"
            if e.u == e.v:
                raise ChainValidationError(
                    f"loop edge {e.id!r} at vertex {e.u!r} is not permitted", field=where
                )
            if e.u not in vset or e.v not in vset:
                raise ChainValidationError(
                    f"edge {e.id!r} references an undeclared vertex", field=where
                )
            if e.id in seen:
                raise ChainValidationError(f"duplicate edge id {e.id!r}", field=where)
            seen.add(e.id)
            built.append(e)
        self.edges = tuple(built)

    def degree(self, v: str) -> int:
        return sum(1 for e in self.edges if v in (e.u, e.v))

    def regularity(self) -> int | None:
        """The common degree r if the graph is r-regular, else None."""
        degs = {self.degree(v) for v in self.vertices}
        return degs.pop() if len(degs) == 1 else None

    def __eq__(self, other):
        return (
            isinstance(other, UndirectedGraph)
            and self.vertices == other.vertices
            and self.edges == other.edges
        )

    def __repr__(self):
        return f"UndirectedGraph({len(self.vertices)} vertices, {len(self.edges)} edges)"


class DirectedGraph:
    """Directed multigraph with source != target on every edge."""

    def __init__(self, vertices, edges):
        self.vertices = _check_vertices(vertices)
        self._vindex = {v: k for k, v in enumerate(self.vertices)}
        built = []
        seen = set()
        for pos, e in enumerate(edges):
            if not isinstance(e, DirectedEdge):
                e = DirectedEdge(*e)
            where = f"edges[{pos}]"
            if e.source == e.target:
                raise ChainValidationError(
                    f"loop edge {e.id!r} at vertex {e.source!r} is not permitted", field=where
                )
            if e.source not in self._vindex or e.target not in self._vindex:
                raise ChainValidationError(
                    f"edge {e.id!r} references an undeclared vertex", field=where
                )
            if e.id in seen:
                raise ChainValidationError(f"duplicate edge id {e.id!r}", field=where)
            seen.add(e.id)
            built.append(e)
        self.edges = tuple(built)
        self._eindex = {e.id: k for k, e in enumerate(self.edges)}
        n = len(self.vertices)
        out_: list[list[int]] = [[] for _ in range(n)]
        in_: list[list[int]] = [[] for _ in range(n)]
        for k, e in enumerate(self.edges):
            out_[self._vindex[e.source]].append(k)
            in_[self._vindex[e.target]].append(k)
        self.out_edges = tuple(tuple(ks) for ks in out_)
        self.in_edges = tuple(tuple(ks) for ks in in_)
        self.source_index = np.array(
            [self._vindex[e.source] for e in self.edges], dtype=np.intp
        )
        self.target_index = np.array(
            [self._vindex[e.target] for e in self.edges], dtype=np.intp
        )

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def vertex_index(self, v: str) -> int:
        try:
            return self._vindex[v]
        except KeyError:
            raise ChainValidationError(f"unknown vertex {v!r}") from None

    def edge(self, edge_id: str) -> DirectedEdge:
        try:
            return self.edges[self._eindex[edge_id]]
        except KeyError:
            raise ChainValidationError(f"unknown edge {edge_id!r}") from None

    def edge_position(self, edge_id: str) -> int:
        try:
            return self._eindex[edge_id]
        except KeyError:
            raise ChainValidationError(f"unknown edge {edge_id!r}") from None

    def in_degree(self, v: str) -> int:
        return len(self.in_edges[self.vertex_index(v)])

    def out_degree(self, v: str) -> int:
        return len(self.out_edges[self.vertex_index(v)])

    def adjacency_matrix(self) -> np.ndarray:
        """Multi-adjacency counts: entry (i, j) is the number of edges i -> j."""
        a = np.zeros((self.n_vertices, self.n_vertices), dtype=np.int64)
        np.add.at(a, (self.source_index, self.target_index), 1)
        return a

    def __eq__(self, other):
        return (
            isinstance(other, DirectedGraph)
            and self.vertices == other.vertices
            and self.edges == other.edges
        )

    def __repr__(self):
        return f"DirectedGraph({len(self.vertices)} vertices, {len(self.edges)} edges)"


def double(x: UndirectedGraph) -> DirectedGraph:
    """Directed double: each undirected edge becomes a pair of opposite edges.

    Directed edge ids record the (tail vertex, undirected edge) pair as
    ``"{edge_id}@{tail}"``.
    """
    edges = []
    for e in x.edges:
        edges.append(DirectedEdge(f"{e.id}@{e.u}", e.u, e.v))
        edges.append(DirectedEdge(f"{e.id}@{e.v}", e.v, e.u))
    return DirectedGraph(x.vertices, edges)


def underlying(g: DirectedGraph) -> UndirectedGraph:
    """Forget orientations; each directed edge yields one undirected edge."""
    return UndirectedGraph(
        g.vertices, [UndirectedEdge(e.id, e.source, e.target) for e in g.edges]
    )


@dataclass(frozen=True)
class DegreeStats:
    in_degrees: dict
    out_degrees: dict
    bound: int


def degree_stats(g: DirectedGraph) -> DegreeStats:
    """Per-vertex in/out degrees and the global bound max_v max(in, out).

    The single bound serves both uses: counting paths into a terminus and
    summing escape rates out of a vertex.
    """
    ins = {v: g.in_degree(v) for v in g.vertices}
    outs = {v: g.out_degree(v) for v in g.vertices}
    bound = max((max(ins[v], outs[v]) for v in g.vertices), default=0)
    return DegreeStats(ins, outs, bound)


class Path:
    """Contiguous edge sequence in a directed graph; length 0 is a bare vertex."""

    def __init__(self, graph: DirectedGraph, edges=(), start: str | None = None):
        self.graph = graph
        self.edges = tuple(edges)
        if self.edges:
            first = graph.edge(self.edges[0])
            if start is not None and start != first.source:
                raise ChainValidationError(
                    f"path start {start!r} does not match first edge source {first.source!r}"
                )
            verts = [first.source]
            for eid in self.edges:
                e = graph.edge(eid)
                if e.source != verts[-1]:
                    raise ChainValidationError(
                        f"path is not contiguous at edge {eid!r}"
                    )
                verts.append(e.target)
            self.vertices = tuple(verts)
        else:
            if start is None:
                raise ChainValidationError("a length-0 path needs a start vertex")
            graph.vertex_index(start)
            self.vertices = (start,)

    def __len__(self):
        return len(self.edges)

    @property
    def start(self) -> str:
        return self.vertices[0]

    @property
    def terminus(self) -> str:
        return self.vertices[-1]

    def __eq__(self, other):
        return (
            isinstance(other, Path)
            and self.graph == other.graph
            and self.edges == other.edges
            and self.vertices == other.vertices
        )

    def __repr__(self):
        return f"Path({' -> '.join(self.vertices)})"


def enumerate_paths(
    g: DirectedGraph,
    n: int,
    source: str | None = None,
    terminus: str | None = None,
    limit: int = DEFAULT_PATH_LIMIT,
) -> list[Path]:
    """All length-n paths, optionally pinned at the source and/or terminus.

    Depth-first with a work ceiling: raises ResourceLimitError once the
    number of visited partial paths exceeds ``limit`` rather than exhausting
    memory on the D**n blow-up.
    """
    if n < 0:
        raise ChainValidationError("path length must be >= 0")
    if source is not None:
        g.vertex_index(source)
    if terminus is not None:
        g.vertex_index(terminus)

    if n == 0:
        starts = [v for v in g.vertices if source in (None, v) and terminus in (None, v)]
        return [Path(g, (), start=v) for v in starts]

    out = []
    visited = 0
    stack_edges: list[str] = []

    def bump():
        nonlocal visited
        visited += 1
        if visited > limit or len(out) > limit:
            raise ResourceLimitError(
                f"path enumeration exceeded the ceiling of {limit} nodes"
            )

    def forward(vidx: int, depth: int):
        if depth == n:
            if terminus in (None, g.vertices[vidx]):
                out.append(Path(g, tuple(stack_edges)))
            return
        for k in g.out_edges[vidx]:
            bump()
            stack_edges.append(g.edges[k].id)
            forward(int(g.target_index[k]), depth + 1)
            stack_edges.pop()

    def backward(vidx: int, depth: int):
        if depth == n:
            out.append(Path(g, tuple(reversed(stack_edges))))
            return
        for k in g.in_edges[vidx]:
            bump()
            stack_edges.append(g.edges[k].id)
            backward(int(g.source_index[k]), depth + 1)
            stack_edges.pop()

    if source is None and terminus is not None:
        # in-edge walk keeps the work at D**n for a pinned terminus
        backward(g.vertex_index(terminus), 0)
    else:
        for r in [source] if source is not None else list(g.vertices):
            forward(g.vertex_index(r), 0)
    return out
