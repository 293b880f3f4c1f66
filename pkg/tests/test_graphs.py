import numpy as np
import pytest

from ctmcpaths import (
    ChainValidationError,
    DirectedGraph,
    Path,
    ResourceLimitError,
    UndirectedGraph,
    degree_stats,
    double,
    enumerate_paths,
    underlying,
)


def _random_directed(rng, max_vertices=6):
    nv = int(rng.integers(2, max_vertices + 1))
    vs = [f"v{i}" for i in range(nv)]
    edges = []
    for k in range(int(rng.integers(1, 2 * nv + 1))):
        i, j = rng.integers(0, nv, 2)
        if i != j:
            edges.append((f"e{k}", vs[i], vs[j]))
    return DirectedGraph(vs, edges)


class TestDouble:
    def test_single_edge(self):
        x = UndirectedGraph(["1", "2"], [("e", "1", "2")])
        g = double(x)
        assert [(e.source, e.target) for e in g.edges] == [("1", "2"), ("2", "1")]

    def test_path_graph(self):
        x = UndirectedGraph(["1", "2", "3"], [("a", "1", "2"), ("b", "2", "3")])
        assert len(double(x).edges) == 4

    def test_triangle_degrees(self, triangle_regular):
        g = double(triangle_regular)
        assert len(g.edges) == 6
        for v in g.vertices:
            assert g.in_degree(v) == 2
            assert g.out_degree(v) == 2

    def test_edge_ids_record_tail_and_edge(self):
        x = UndirectedGraph(["1", "2"], [("e", "1", "2")])
        assert {e.id for e in double(x).edges} == {"e@1", "e@2"}


class TestUnderlying:
    def test_double_does_not_collapse_back(self, triangle_regular):
        again = underlying(double(triangle_regular))
        assert len(again.edges) == 2 * len(triangle_regular.edges)

    def test_single_directed_edge(self):
        g = DirectedGraph(["1", "2"], [("e", "1", "2")])
        x = underlying(g)
        assert len(x.edges) == 1 and {x.edges[0].u, x.edges[0].v} == {"1", "2"}

    def test_empty_edge_set(self):
        assert underlying(DirectedGraph(["1"], [])).edges == ()


class TestDegreeStats:
    def test_double_of_regular_graph(self, cube_regular):
        stats = degree_stats(double(cube_regular))
        assert stats.bound == 3
        assert all(d == 3 for d in stats.in_degrees.values())
        assert all(d == 3 for d in stats.out_degrees.values())

    def test_star(self):
        g = DirectedGraph(
            ["c", "1", "2", "3"],
            [("a", "c", "1"), ("b", "c", "2"), ("d", "c", "3")],
        )
        assert degree_stats(g).bound == 3

    def test_triangle_double(self, triangle_regular):
        assert degree_stats(double(triangle_regular)).bound == 2


class TestEnumeratePaths:
    def test_three_cycle_closed_walk(self):
        g = DirectedGraph(
            ["1", "2", "3"], [("a", "1", "2"), ("b", "2", "3"), ("c", "3", "1")]
        )
        paths = enumerate_paths(g, 3, source="1", terminus="1")
        assert len(paths) == 1
        assert paths[0].vertices == ("1", "2", "3", "1")

    def test_k2_double_round_trip(self, k2_regular):
        g = double(k2_regular)
        adjacency = g.adjacency_matrix()
        expected = int(np.linalg.matrix_power(adjacency, 2)[0, 0])
        assert len(enumerate_paths(g, 2, source="u", terminus="u")) == expected == 1

    def test_length_zero(self, k2_regular):
        g = double(k2_regular)
        paths = enumerate_paths(g, 0, terminus="u")
        assert len(paths) == 1 and paths[0].vertices == ("u",)

    def test_counts_match_adjacency_powers(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            g = _random_directed(rng)
            adjacency = g.adjacency_matrix()
            for n in range(7):
                power = np.linalg.matrix_power(adjacency, n)
                for x in g.vertices:
                    for y in g.vertices:
                        found = enumerate_paths(g, n, source=x, terminus=y)
                        i, j = g.vertex_index(x), g.vertex_index(y)
                        assert len(found) == power[i, j]

    def test_paths_are_contiguous(self):
        rng = np.random.default_rng(5)
        g = _random_directed(rng)
        for path in enumerate_paths(g, 3):
            for eid, tail, head in zip(path.edges, path.vertices, path.vertices[1:]):
                e = g.edge(eid)
                assert (e.source, e.target) == (tail, head)

    def test_terminus_only_enumeration(self, triangle_regular):
        g = double(triangle_regular)
        paths = enumerate_paths(g, 4, terminus="1")
        assert len(paths) == 2**4  # in-degree 2 at every step
        assert all(p.terminus == "1" for p in paths)

    def test_ceiling_fails_loudly(self):
        vs = [f"v{i}" for i in range(6)]
        edges = [
            (f"e{i}-{j}", vs[i], vs[j])
            for i in range(6)
            for j in range(6)
            if i != j
        ]
        g = DirectedGraph(vs, edges)
        with pytest.raises(ResourceLimitError):
            enumerate_paths(g, 12, limit=10_000)


class TestValidation:
    def test_loop_edge_rejected_undirected(self):
        with pytest.raises(ChainValidationError):
            UndirectedGraph(["1"], [("e", "1", "1")])

    def test_loop_edge_rejected_directed(self):
        with pytest.raises(ChainValidationError):
            DirectedGraph(["1"], [("e", "1", "1")])

    def test_dangling_vertex_rejected(self):
        with pytest.raises(ChainValidationError):
            DirectedGraph(["1", "2"], [("e", "1", "3")])

    def test_duplicate_edge_id_rejected(self):
        with pytest.raises(ChainValidationError):
            DirectedGraph(["1", "2"], [("e", "1", "2"), ("e", "2", "1")])

    def test_multi_edges_allowed(self):
        g = DirectedGraph(["1", "2"], [("e1", "1", "2"), ("e2", "1", "2")])
        assert g.adjacency_matrix()[0, 1] == 2

    def test_path_needs_contiguity(self):
        g = DirectedGraph(["1", "2", "3"], [("a", "1", "2"), ("b", "3", "1")])
        with pytest.raises(ChainValidationError):
            Path(g, ("a", "b"))

    def test_empty_path_needs_start(self):
        g = DirectedGraph(["1"], [])
        with pytest.raises(ChainValidationError):
            Path(g, ())
