import numpy as np
import pytest

from ctmcpaths import (
    ChainSpec,
    ChainValidationError,
    Constant,
    DirectedGraph,
    Tabulated,
    check_distribution,
    delta_distribution,
    embed_in_double,
    solve_ode,
    uniform_distribution,
)
from conftest import random_chain


class TestChainSpec:
    def test_missing_rate_rejected(self):
        g = DirectedGraph(["1", "2"], [("e", "1", "2")])
        with pytest.raises(ChainValidationError):
            ChainSpec(g, {})

    def test_unknown_rate_key_rejected(self):
        g = DirectedGraph(["1", "2"], [("e", "1", "2")])
        with pytest.raises(ChainValidationError):
            ChainSpec(g, {"e": Constant(1.0), "ghost": Constant(1.0)})

    def test_horizon_must_fit_tabulated_grids(self):
        g = DirectedGraph(["1", "2"], [("e", "1", "2")])
        with pytest.raises(ChainValidationError):
            ChainSpec(g, {"e": Tabulated(1.0, (1.0, 1.0))}, horizon=2.0)

    def test_horizon_defaults_to_tabulated_limit(self):
        g = DirectedGraph(["1", "2"], [("e", "1", "2")])
        chain = ChainSpec(g, {"e": Tabulated(1.5, (1.0, 1.0))})
        assert chain.horizon == 1.5

    def test_derived_bounds(self):
        g = DirectedGraph(["1", "2"], [("a", "1", "2"), ("b", "1", "2")])
        chain = ChainSpec(g, {"a": Constant(0.5), "b": Constant(2.0)})
        assert chain.rate_bound() == 2.0
        assert chain.degree_bound == 2  # two in-edges at vertex 2

    def test_time_outside_horizon_rejected(self):
        g = DirectedGraph(["1", "2"], [("e", "1", "2")])
        chain = ChainSpec(g, {"e": Constant(1.0)}, horizon=1.0)
        with pytest.raises(ChainValidationError):
            chain.check_time(1.5)


class TestDistributions:
    def test_delta(self, two_state):
        assert list(delta_distribution(two_state, "2")) == [0.0, 1.0]

    def test_uniform(self, two_state):
        assert list(uniform_distribution(two_state)) == [0.5, 0.5]

    def test_check_rejects_negative(self, two_state):
        with pytest.raises(ChainValidationError):
            check_distribution(two_state, np.array([1.5, -0.5]))

    def test_check_rejects_bad_mass(self, two_state):
        with pytest.raises(ChainValidationError):
            check_distribution(two_state, np.array([0.6, 0.6]))


class TestEmbedInDouble:
    def test_adds_zero_rate_reversal(self):
        g = DirectedGraph(["1", "2"], [("e", "1", "2")])
        chain = ChainSpec(g, {"e": Constant(1.0)})
        bigger = embed_in_double(chain)
        assert len(bigger.graph.edges) == 2
        assert bigger.rate("e") == Constant(1.0)
        added = [e for e in bigger.graph.edges if e.id != "e"][0]
        assert (added.source, added.target) == ("2", "1")
        assert bigger.rate(added.id) == Constant(0.0)

    def test_identity_on_doubles(self, two_state):
        assert embed_in_double(two_state) is two_state

    def test_dynamics_preserved(self):
        rng = np.random.default_rng(17)
        for _ in range(5):
            chain = random_chain(rng)
            extended = embed_in_double(chain)
            q = uniform_distribution(chain)
            p1 = solve_ode(chain, q, 0.8)
            p2 = solve_ode(extended, q, 0.8)
            assert float(np.max(np.abs(p1 - p2))) <= 1e-9
