import math

import numpy as np
import pytest

from ctmcpaths import (
    ChainSpec,
    ChainValidationError,
    Constant,
    DirectedGraph,
    Sinusoid,
    delta_distribution,
    expm_solution,
    master_matrix,
    solve_ode,
    transition_rate,
    uniform_distribution,
)
from conftest import random_chain, two_state_exact, unit_rate_chain


class TestTransitionRate:
    def test_parallel_edges_add(self):
        g = DirectedGraph(["j", "i"], [("a", "j", "i"), ("b", "j", "i")])
        chain = ChainSpec(g, {"a": Constant(1.0), "b": Constant(2.0)})
        assert transition_rate(chain, "i", "j", 0.3) == 3.0

    def test_no_edge_means_zero(self):
        g = DirectedGraph(["j", "i"], [("a", "j", "i")])
        chain = ChainSpec(g, {"a": Constant(1.0)})
        assert transition_rate(chain, "j", "i", 0.3) == 0.0

    def test_sinusoid_at_peak(self):
        g = DirectedGraph(["j", "i"], [("a", "j", "i")])
        chain = ChainSpec(g, {"a": Sinusoid(1.0, 1.0, 1.0, 0.0)})
        assert transition_rate(chain, "i", "j", math.pi / 2) == pytest.approx(2.0)

    def test_equal_vertices_rejected(self, two_state):
        with pytest.raises(ChainValidationError):
            transition_rate(two_state, "1", "1", 0.0)


class TestMasterMatrix:
    def test_two_state(self, two_state):
        h = master_matrix(two_state, 0.0)
        assert np.allclose(h, [[-1.0, 1.0], [1.0, -1.0]])

    def test_k2_double_is_negative_laplacian(self, k2_regular):
        chain = unit_rate_chain(k2_regular)
        # graph Laplacian of K2 is [[1, -1], [-1, 1]]
        assert np.allclose(master_matrix(chain, 0.0), [[-1.0, 1.0], [1.0, -1.0]])

    def test_zero_rates(self):
        g = DirectedGraph(["1", "2"], [("e", "1", "2")])
        chain = ChainSpec(g, {"e": Constant(0.0)})
        assert np.all(master_matrix(chain, 0.0) == 0.0)

    def test_columns_sum_to_zero(self):
        rng = np.random.default_rng(101)
        for _ in range(100):
            chain = random_chain(rng, family="sinusoid" if rng.random() < 0.5 else "constant")
            for s in rng.uniform(0.0, 1.0, size=10):
                h = master_matrix(chain, float(s))
                assert float(np.max(np.abs(h.sum(axis=0)))) <= 1e-12

    def test_offdiagonals_nonnegative(self):
        rng = np.random.default_rng(55)
        chain = random_chain(rng)
        h = master_matrix(chain, 0.5)
        off = h - np.diag(np.diag(h))
        assert np.all(off >= 0.0)


class TestSolveOde:
    def test_time_zero_returns_q(self, two_state):
        q = delta_distribution(two_state, "1")
        assert np.array_equal(solve_ode(two_state, q, 0.0), q)

    def test_two_state_closed_form(self, two_state):
        q = delta_distribution(two_state, "1")
        p = solve_ode(two_state, q, 1.0)
        assert p[0] == pytest.approx(two_state_exact(1.0, 1.0, 1.0), abs=1e-10)
        assert p[0] == pytest.approx(0.5676676, abs=1e-7)

    def test_asymmetric_closed_form(self):
        g = DirectedGraph(["1", "2"], [("a", "1", "2"), ("b", "2", "1")])
        chain = ChainSpec(g, {"a": Constant(0.7), "b": Constant(1.9)})
        q = delta_distribution(chain, "1")
        p = solve_ode(chain, q, 0.6)
        assert p[0] == pytest.approx(two_state_exact(0.7, 1.9, 0.6), abs=1e-12)

    def test_fourth_order_convergence(self):
        # at the default 2048 steps the error sits at rounding level, so the
        # order is measured where the discretization error is still visible
        g = DirectedGraph(["1", "2"], [("a", "1", "2"), ("b", "2", "1")])
        chain = ChainSpec(
            g,
            {"a": Sinusoid(1.5, 1.2, 6.0, 0.3), "b": Sinusoid(1.0, 0.8, 5.0, 1.1)},
        )
        q = delta_distribution(chain, "1")
        coarse = solve_ode(chain, q, 1.0, steps=16)
        mid = solve_ode(chain, q, 1.0, steps=32)
        fine = solve_ode(chain, q, 1.0, steps=64)
        d1 = float(np.max(np.abs(coarse - mid)))
        d2 = float(np.max(np.abs(mid - fine)))
        assert d2 > 0
        assert 8.0 <= d1 / d2 <= 32.0  # nominal 16x per doubling

    def test_mass_and_nonnegativity(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            chain = random_chain(rng, family="sinusoid" if rng.random() < 0.5 else "constant")
            p = solve_ode(chain, uniform_distribution(chain), 1.0)
            assert abs(float(p.sum()) - 1.0) <= 1e-9
            assert float(p.min()) >= -1e-9


class TestExpmSolution:
    def test_time_zero(self, two_state):
        q = delta_distribution(two_state, "1")
        assert np.array_equal(expm_solution(two_state, q, 0.0), q)

    def test_two_state_closed_form(self, two_state):
        q = delta_distribution(two_state, "1")
        p = expm_solution(two_state, q, 1.0)
        assert p[0] == pytest.approx(two_state_exact(1.0, 1.0, 1.0), abs=1e-13)

    def test_mass_preserved(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            chain = random_chain(rng)
            p = expm_solution(chain, uniform_distribution(chain), 1.0)
            assert abs(float(p.sum()) - 1.0) <= 1e-12

    def test_matches_ode_on_random_chains(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            chain = random_chain(rng, max_vertices=5)
            q = uniform_distribution(chain)
            gap = np.abs(expm_solution(chain, q, 1.0) - solve_ode(chain, q, 1.0))
            assert float(np.max(gap)) <= 1e-8

    def test_rejects_inhomogeneous(self):
        g = DirectedGraph(["1", "2"], [("a", "1", "2")])
        chain = ChainSpec(g, {"a": Sinusoid(1.0, 0.5, 1.0, 0.0)})
        with pytest.raises(ChainValidationError):
            expm_solution(chain, delta_distribution(chain, "1"), 1.0)
