"""The time-dependent generator matrix and two reference solvers.

Index convention: entry (i, j) of the generator carries the total rate from
vertex j into vertex i, so columns sum to zero and gains at a vertex come
from its in-edges. Both solvers below are deterministic fixed-step schemes,
kept bit-reproducible on purpose; they serve as independent oracles for the
series solution in :mod:`ctmcpaths.measure`.
"""

from __future__ import annotations

import math

import numpy as np

from .chain import ChainSpec, check_distribution
from .errors import ChainValidationError

DEFAULT_ODE_STEPS_PER_UNIT_TIME = 2048

# dense (T, V, V) stacks are precomputed below this size; larger chains
# assemble one matrix per step instead
_STACK_VERTEX_LIMIT = 64


def transition_rate(chain: ChainSpec, target: str, source: str, s: float) -> float:
    """Total instantaneous rate from ``source`` into ``target`` at time s.

    Parallel edges add up; the empty edge set contributes zero.
    """
    if target == source:
        raise ChainValidationError("transition_rate is defined for distinct vertices only")
    chain.check_time(s)
    g = chain.graph
    ti = g.vertex_index(target)
    si = g.vertex_index(source)
    total = 0.0
    for k in g.out_edges[si]:
        if g.target_index[k] == ti:
            total += float(chain.edge_rates()[k].value(s))
    return total


def master_matrix(chain: ChainSpec, s: float) -> np.ndarray:
    """Generator at time s: off-diagonal (i, j) gains from j's edges into i,
    diagonal (i, i) minus the total out-rate of i; columns sum to zero."""
    chain.check_time(s)
    return _matrices_at(chain, np.array([float(s)]))[0]


def _matrices_at(chain: ChainSpec, times: np.ndarray) -> np.ndarray:
    g = chain.graph
    n = g.n_vertices
    h = np.zeros((len(times), n, n))
    for k, rate in enumerate(chain.edge_rates()):
        vals = np.asarray(rate.value(times), dtype=float)
        si = g.source_index[k]
        ti = g.target_index[k]
        h[:, ti, si] += vals
        h[:, si, si] -= vals
    return h


def solve_ode(
    chain: ChainSpec, q: np.ndarray, t: float, steps: int | None = None
) -> np.ndarray:
    """Integrate p' = H(s) p from p(0) = q with the classical 4th-order scheme.

    Fixed step count (default 2048 per unit time) keeps results
    bit-reproducible across runs.
    """
    t = chain.check_time(t)
    p = check_distribution(chain, q).copy()
    if t == 0.0:
        return p
    if steps is None:
        steps = max(1, math.ceil(DEFAULT_ODE_STEPS_PER_UNIT_TIME * t))
    if steps < 1:
        raise ChainValidationError("steps must be >= 1")
    dt = t / steps
    half_times = np.linspace(0.0, t, 2 * steps + 1)

    if chain.n_vertices <= _STACK_VERTEX_LIMIT:
        hs = _matrices_at(chain, half_times)
        matrix = lambda m: hs[m]
    else:
        matrix = lambda m: _matrices_at(chain, half_times[m : m + 1])[0]

    for step in range(steps):
        h0 = matrix(2 * step)
        h1 = matrix(2 * step + 1)
        h2 = matrix(2 * step + 2)
        k1 = h0 @ p
        k2 = h1 @ (p + 0.5 * dt * k1)
        k3 = h1 @ (p + 0.5 * dt * k2)
        k4 = h2 @ (p + dt * k3)
        p = p + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return p


def _expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring with a truncated Taylor series."""
    norm = float(np.max(np.sum(np.abs(a), axis=0)))
    squarings = max(0, math.ceil(math.log2(norm))) if norm > 1.0 else 0
    x = a / (2.0**squarings)
    result = np.eye(a.shape[0])
    term = np.eye(a.shape[0])
    for k in range(1, 40):
        term = term @ x / k
        result = result + term
        if float(np.max(np.abs(term))) < 1e-20:
            break
    for _ in range(squarings):
        result = result @ result
    return result


def expm_solution(chain: ChainSpec, q: np.ndarray, t: float) -> np.ndarray:
    """p(t) = exp(t H) q for time-homogeneous chains (all rates constant)."""
    if not chain.is_homogeneous():
        raise ChainValidationError("matrix-exponential solver requires constant rates")
    t = chain.check_time(t)
    p = check_distribution(chain, q)
    if t == 0.0:
        return p.copy()
    h = master_matrix(chain, 0.0)
    return _expm(t * h) @ p
