"""The trajectory measure: escape rates, densities, and the series solution.

The distribution at time t is assembled order by order: the order-n term is
the probability carried by all length-n trajectories, obtained from the
order n-1 term through a one-dimensional integral with the escape-rate
integrating factor. Orders are evaluated on a shared uniform time grid with
trapezoid quadrature, using the prefix factorization
``u_i(a, b) = U_i(b) / U_i(a)`` of the escape rate, so the total cost is
O(order * grid * edges) instead of the exponential cost of nested
quadrature. Truncation is decided analytically before any computation and
the resulting tail bound is attached to every answer as a certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import ChainSpec, check_distribution, delta_distribution
from .errors import ChainValidationError, ResourceLimitError
from .graphs import DEFAULT_PATH_LIMIT, Path, enumerate_paths
from .rng import substream

DEFAULT_EPSILON = 1e-8
DEFAULT_GRID_PER_UNIT_TIME = 1024
DEFAULT_MAX_ORDER = 500

# beyond this cumulative hazard the vectorized prefix form would overflow
# exp(); fall back to the stepwise scan
_PREFIX_HAZARD_LIMIT = 300.0


@dataclass(frozen=True)
class Trajectory:
    """A contiguous path together with its ordered jump times and a duration."""

    path: Path
    jump_times: tuple[float, ...]
    duration: float

    def __post_init__(self):
        if len(self.jump_times) != len(self.path):
            raise ChainValidationError("one jump time per path edge is required")
        if self.duration < 0.0:
            raise ChainValidationError("duration must be nonnegative")
        previous = 0.0
        for tk in self.jump_times:
            if tk < previous:
                raise ChainValidationError("jump times must be nondecreasing from 0")
            previous = tk
        if self.jump_times and self.jump_times[-1] > self.duration:
            raise ChainValidationError("jump times must not exceed the duration")

    def __len__(self):
        return len(self.path)

    @property
    def terminus(self) -> str:
        return self.path.terminus

    @property
    def wait_times(self) -> tuple[float, ...]:
        bounds = (0.0,) + self.jump_times
        return tuple(b - a for a, b in zip(bounds[:-1], bounds[1:]))

    @property
    def final_residence(self) -> float:
        last = self.jump_times[-1] if self.jump_times else 0.0
        return self.duration - last


def escape_rate(chain: ChainSpec, vertex: str, a: float, b: float) -> float:
    """Probability of making no jump out of ``vertex`` during [a, b]."""
    if not 0.0 <= a <= b:
        raise ChainValidationError(f"reversed or negative interval [{a}, {b}]")
    chain.check_time(b)
    vidx = chain.graph.vertex_index(vertex)
    total = sum(
        chain.edge_rates()[k].integral(a, b) for k in chain.graph.out_edges[vidx]
    )
    return math.exp(-total)


def density(chain: ChainSpec, q: np.ndarray, trajectory: Trajectory) -> float:
    """Trajectory density: initial weight times escape factors times the rates
    evaluated at the jump times."""
    if trajectory.path.graph != chain.graph:
        raise ChainValidationError("trajectory belongs to a different graph")
    q = check_distribution(chain, q)
    chain.check_time(trajectory.duration)
    bounds = (0.0,) + trajectory.jump_times + (trajectory.duration,)
    value = float(q[chain.graph.vertex_index(trajectory.path.start)])
    for m, vertex in enumerate(trajectory.path.vertices):
        value *= escape_rate(chain, vertex, bounds[m], bounds[m + 1])
    for eid, tk in zip(trajectory.path.edges, trajectory.jump_times):
        value *= float(chain.rate(eid).value(tk))
    return value


def choose_truncation(
    rate_bound: float,
    degree_bound: float,
    t: float,
    epsilon: float,
    max_order: int = DEFAULT_MAX_ORDER,
) -> tuple[int, float]:
    """Smallest order N whose tail bound exp(x) x^(N+1) / (N+1)!, x = R*D*t,
    does not exceed epsilon; returns (N, tail bound)."""
    if rate_bound < 0.0 or degree_bound < 0.0 or t < 0.0:
        raise ChainValidationError("rate bound, degree bound, and t must be >= 0")
    if not epsilon > 0.0:
        raise ChainValidationError("epsilon must be positive")
    x = rate_bound * degree_bound * t
    if x == 0.0:
        return 0, 0.0
    log_eps = math.log(epsilon)
    log_x = math.log(x)
    for n in range(max_order + 1):
        log_tail = x + (n + 1) * log_x - math.lgamma(n + 2)
        if log_tail <= log_eps:
            return n, math.exp(log_tail)
    raise ResourceLimitError(
        f"tolerance {epsilon} unattainable within {max_order} series orders"
    )


@dataclass
class SeriesResult:
    """Series answer plus its certificate and optional per-order breakdown."""

    distribution: np.ndarray
    order: int
    tail_bound: float
    epsilon: float
    rate_bound: float
    degree_bound: int
    grid: int
    terms: np.ndarray | None = None  # (order + 1, vertices) at the final time
    grid_error: float | None = None
    grid_values: np.ndarray | None = None  # (vertices, grid + 1)
    times: np.ndarray | None = None

    @property
    def mass(self) -> float:
        return float(self.distribution.sum())


def default_grid(t: float) -> int:
    return max(1, math.ceil(DEFAULT_GRID_PER_UNIT_TIME * t))


def _order_terms(chain: ChainSpec, q: np.ndarray, t: float, order: int, m: int):
    """All order terms p^0 .. p^order on a uniform (m + 1)-point grid over [0, t].

    Returns (times, running total over orders, per-order final-time vectors).
    """
    g = chain.graph
    nv = g.n_vertices
    times = np.linspace(0.0, t, m + 1)
    rates = chain.edge_rates()
    kvals = np.empty((len(rates), m + 1))
    hazard = np.zeros((nv, m + 1))
    for k, rate in enumerate(rates):
        kvals[k] = rate.value(times)
        hazard[g.source_index[k]] += rate.cumulative(times)

    survival = np.exp(-hazard)  # U_i(s) = u_i(0, s)
    term = q[:, None] * survival
    total = term.copy()
    finals = [term[:, -1].copy()]

    if order > 0:
        src, tgt = g.source_index, g.target_index
        h = t / m
        prefix_ok = float(hazard[:, -1].max(initial=0.0)) <= _PREFIX_HAZARD_LIMIT
        growth = np.exp(hazard) if prefix_ok else None
        ratios = None if prefix_ok else np.exp(-np.diff(hazard, axis=1))
        for _ in range(order):
            psi = np.zeros((nv, m + 1))
            if len(rates):
                np.add.at(psi, tgt, kvals * term[src])
            if prefix_ok:
                lifted = psi * growth
                cum = np.zeros((nv, m + 1))
                np.cumsum(0.5 * h * (lifted[:, 1:] + lifted[:, :-1]), axis=1, out=cum[:, 1:])
                term = survival * cum
            else:
                term = _integrating_factor_scan(psi, ratios, h)
            total += term
            finals.append(term[:, -1].copy())

    return times, total, np.array(finals)


def _integrating_factor_scan(psi: np.ndarray, ratios: np.ndarray, h: float) -> np.ndarray:
    # overflow-safe form of the same trapezoid rule: every factor is <= 1
    term = np.zeros_like(psi)
    for m in range(1, psi.shape[1]):
        r = ratios[:, m - 1]
        term[:, m] = r * term[:, m - 1] + 0.5 * h * (r * psi[:, m - 1] + psi[:, m])
    return term


def series_solve(
    chain: ChainSpec,
    q: np.ndarray,
    t: float,
    epsilon: float = DEFAULT_EPSILON,
    grid: int | None = None,
    keep_terms: bool = False,
    keep_grid: bool = False,
    error_estimate: bool = False,
    max_order: int = DEFAULT_MAX_ORDER,
) -> SeriesResult:
    """Distribution at time t by the truncated series, with a tail certificate.

    Parameters
    ----------
    epsilon:
        Requested truncation mass; the order is the smallest N whose tail
        bound falls below it.
    grid:
        Number of uniform quadrature intervals on [0, t]; defaults to 1024
        per unit time.
    keep_terms / keep_grid:
        Retain the per-order final-time vectors, or the whole running
        distribution on the grid.
    error_estimate:
        Also solve on the half-resolution grid and report the largest
        entrywise deviation as a quadrature-error estimate.
    """
    q = check_distribution(chain, q)
    t = chain.check_time(t)
    rate_bound = chain.rate_bound(t)
    order, tail = choose_truncation(
        rate_bound, chain.degree_bound, t, epsilon, max_order
    )
    if t == 0.0:
        return SeriesResult(
            distribution=q.copy(),
            order=order,
            tail_bound=tail,
            epsilon=epsilon,
            rate_bound=rate_bound,
            degree_bound=chain.degree_bound,
            grid=0,
            terms=q[None, :].copy() if keep_terms else None,
            grid_error=0.0 if error_estimate else None,
            grid_values=q[:, None].copy() if keep_grid else None,
            times=np.zeros(1) if keep_grid else None,
        )
    m = default_grid(t) if grid is None else int(grid)
    if m < 1:
        raise ChainValidationError("grid must have at least one interval")
    times, total, finals = _order_terms(chain, q, t, order, m)

    grid_error = None
    if error_estimate:
        if m >= 2:
            _, coarse, _ = _order_terms(chain, q, t, order, m // 2)
            grid_error = float(np.max(np.abs(total[:, -1] - coarse[:, -1])))
        else:
            grid_error = 0.0

    return SeriesResult(
        distribution=total[:, -1].copy(),
        order=order,
        tail_bound=tail,
        epsilon=epsilon,
        rate_bound=rate_bound,
        degree_bound=chain.degree_bound,
        grid=m,
        terms=finals if keep_terms else None,
        grid_error=grid_error,
        grid_values=total if keep_grid else None,
        times=times if keep_grid else None,
    )


def fundamental_solution(
    chain: ChainSpec, vertex: str, t: float, epsilon: float = DEFAULT_EPSILON, **kwargs
) -> SeriesResult:
    """Series solution started from the point mass at ``vertex``."""
    return series_solve(chain, delta_distribution(chain, vertex), t, epsilon, **kwargs)


@dataclass
class PropagatorTable:
    """K[start, end] at a fixed time, with the series truncation certificate."""

    t: float
    vertices: tuple[str, ...]
    matrix: np.ndarray
    order: int
    tail_bound: float
    epsilon: float
    grid: int
    grid_error: float | None = None

    def entry(self, start: str, end: str) -> float:
        i = self.vertices.index(start)
        j = self.vertices.index(end)
        return float(self.matrix[i, j])


def propagator(
    chain: ChainSpec,
    t: float,
    epsilon: float = DEFAULT_EPSILON,
    grid: int | None = None,
    error_estimate: bool = False,
) -> PropagatorTable:
    """Fundamental solutions from every start vertex, stacked as rows."""
    rows = []
    worst = 0.0 if error_estimate else None
    result = None
    for v in chain.graph.vertices:
        result = fundamental_solution(
            chain, v, t, epsilon, grid=grid, error_estimate=error_estimate
        )
        rows.append(result.distribution)
        if error_estimate:
            worst = max(worst, result.grid_error)
    return PropagatorTable(
        t=t,
        vertices=chain.graph.vertices,
        matrix=np.array(rows),
        order=result.order,
        tail_bound=result.tail_bound,
        epsilon=epsilon,
        grid=result.grid,
        grid_error=worst,
    )


@dataclass(frozen=True)
class DensityIntegral:
    """Probability mass of length-n trajectories into one terminus."""

    value: float
    stderr: float | None
    length: int
    terminus: str
    method: str
    samples: int | None = None


def integrate_density(
    chain: ChainSpec,
    q: np.ndarray,
    length: int,
    terminus: str,
    t: float,
    method: str = "grid",
    grid: int | None = None,
    samples: int = 100_000,
    seed: int = 0,
    path_limit: int = DEFAULT_PATH_LIMIT,
) -> DensityIntegral:
    """Mass of the length-n summand at one terminus, by grid recursion or by
    Monte Carlo over the time simplex.

    The Monte Carlo route draws uniformly ordered jump times (the simplex has
    volume t^n / n!), averages the density over all enumerated length-n paths
    into the terminus, and scales by the volume; it is independent of the
    grid recursion and comes with a standard error.
    """
    q = check_distribution(chain, q)
    t = chain.check_time(t)
    if length < 0:
        raise ChainValidationError("length must be >= 0")
    tidx = chain.graph.vertex_index(terminus)

    if method == "grid":
        m = default_grid(t) if grid is None else int(grid)
        if t == 0.0:
            value = float(q[tidx]) if length == 0 else 0.0
            return DensityIntegral(value, None, length, terminus, method)
        _, _, finals = _order_terms(chain, q, t, length, m)
        return DensityIntegral(float(finals[length, tidx]), None, length, terminus, method)

    if method != "monte-carlo":
        raise ChainValidationError(f"unknown method {method!r}")

    if length == 0:
        value = float(q[tidx]) * math.exp(-float(chain.out_hazard(tidx, np.array([t]))[0]))
        return DensityIntegral(value, 0.0, length, terminus, method, samples)

    paths = enumerate_paths(chain.graph, length, terminus=terminus, limit=path_limit)
    rng = substream(seed, 0)
    jump_times = np.sort(rng.random((samples, length)), axis=1) * t
    totals = np.zeros(samples)
    for path in paths:
        totals += _path_density_at(chain, q, path, jump_times, t)
    volume = t**length / math.factorial(length)
    value = volume * float(totals.mean())
    stderr = volume * float(totals.std(ddof=1)) / math.sqrt(samples)
    return DensityIntegral(value, stderr, length, terminus, method, samples)


def _path_density_at(
    chain: ChainSpec, q: np.ndarray, path: Path, jump_times: np.ndarray, t: float
) -> np.ndarray:
    """Density of one path over a (samples, n) matrix of ordered jump times."""
    g = chain.graph
    vidx = [g.vertex_index(v) for v in path.vertices]
    n_samples = jump_times.shape[0]
    bounds = np.hstack(
        [np.zeros((n_samples, 1)), jump_times, np.full((n_samples, 1), t)]
    )
    hazard = np.zeros(n_samples)
    for m, v in enumerate(vidx):
        hazard += chain.out_hazard(v, bounds[:, m + 1]) - chain.out_hazard(v, bounds[:, m])
    value = float(q[vidx[0]]) * np.exp(-hazard)
    for m, eid in enumerate(path.edges):
        value = value * chain.rate(eid).value(jump_times[:, m])
    return value
