"""Exact trajectory sampling by thinning, plus empirical diagnostics.

At each vertex the next candidate event is proposed from the constant
majorant rate (the summed per-edge suprema, which the rate-bound guarantees
exist) and accepted with probability total-rate / majorant, so no time
discretization is involved. Homogeneous chains accept every proposal and the
scheme reduces to competing exponentials.

Batches are split across worker substreams keyed by (seed, worker) and
merged in (worker, index) order, so results are reproducible bit for bit
regardless of scheduling; the stream family is Philox-4x64-10.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .chain import ChainSpec, check_distribution
from .errors import AgreementError, ChainValidationError
from .graphs import Path
from .measure import Trajectory, density, series_solve
from .rng import GENERATOR_NAME, substream


def sample_trajectory(
    chain: ChainSpec, q: np.ndarray, t: float, rng: np.random.Generator
) -> Trajectory:
    """Draw one trajectory of duration t, starting from q."""
    q = check_distribution(chain, q)
    t = chain.check_time(t)
    return _sample_one(chain, _majorants(chain, t), np.cumsum(q), t, rng)


def _majorants(chain: ChainSpec, t: float) -> np.ndarray:
    g = chain.graph
    return np.array(
        [
            sum(chain.edge_rates()[k].bound(t) for k in g.out_edges[v])
            for v in range(g.n_vertices)
        ]
    )


def _sample_one(chain, majorants, q_cum, t, rng) -> Trajectory:
    g = chain.graph
    rates = chain.edge_rates()
    vidx = int(np.searchsorted(q_cum, rng.random(), side="right"))
    vidx = min(vidx, g.n_vertices - 1)
    edges: list[str] = []
    times: list[float] = []
    start = g.vertices[vidx]
    s = 0.0
    while True:
        bound = majorants[vidx]
        if bound <= 0.0:
            break
        s += rng.exponential(1.0 / bound)
        if s > t:
            break
        out = g.out_edges[vidx]
        locals_ = [float(rates[k].value(s)) for k in out]
        total = sum(locals_)
        if rng.random() * bound >= total:
            continue  # thinning rejection; clock still advances
        pick = rng.random() * total
        acc = 0.0
        choice = len(out) - 1
        for pos, rate_value in enumerate(locals_):
            acc += rate_value
            if pick < acc:
                choice = pos
                break
        k = out[choice]
        edges.append(g.edges[k].id)
        times.append(s)
        vidx = int(g.target_index[k])
    return Trajectory(Path(g, tuple(edges), start=start), tuple(times), t)


@dataclass
class SampleBatch:
    """Trajectories drawn with one seed, plus the derived histograms."""

    chain: ChainSpec
    duration: float
    seed: int
    workers: int
    trajectories: tuple[Trajectory, ...]
    rng_name: str = GENERATOR_NAME

    @property
    def count(self) -> int:
        return len(self.trajectories)

    def terminal_counts(self) -> np.ndarray:
        g = self.chain.graph
        counts = np.zeros(g.n_vertices, dtype=np.int64)
        for trajectory in self.trajectories:
            counts[g.vertex_index(trajectory.terminus)] += 1
        return counts

    def jump_count_histogram(self) -> dict[int, int]:
        return dict(sorted(Counter(len(tr) for tr in self.trajectories).items()))


def sample_batch(
    chain: ChainSpec,
    q: np.ndarray,
    t: float,
    count: int,
    seed: int = 0,
    workers: int = 1,
) -> SampleBatch:
    """Draw ``count`` trajectories, split across ``workers`` disjoint substreams."""
    q = check_distribution(chain, q)
    t = chain.check_time(t)
    if count < 1:
        raise ChainValidationError("batch count must be >= 1")
    if workers < 1:
        raise ChainValidationError("workers must be >= 1")
    majorants = _majorants(chain, t)
    q_cum = np.cumsum(q)
    base, extra = divmod(count, workers)
    trajectories: list[Trajectory] = []
    for w in range(workers):
        rng = substream(seed, w)
        share = base + (1 if w < extra else 0)
        trajectories.extend(
            _sample_one(chain, majorants, q_cum, t, rng) for _ in range(share)
        )
    return SampleBatch(chain, t, seed, workers, tuple(trajectories))


def empirical_distribution(batch: SampleBatch) -> np.ndarray:
    """Terminal-vertex frequencies, adjusted to sum to exactly 1."""
    if batch.count < 1:
        raise ChainValidationError("empty batch")
    p = batch.terminal_counts() / batch.count
    p[np.argmax(p)] += 1.0 - p.sum()  # absorb float rounding in the largest entry
    return p


def total_variation(p: np.ndarray, r: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(r)).sum())


@dataclass(frozen=True)
class DensityCheckReport:
    count: int
    min_density: float
    mean_jump_count: float
    expected_jump_count: float


def log_density_check(
    chain: ChainSpec, q: np.ndarray, batch: SampleBatch, grid: int | None = None
) -> DensityCheckReport:
    """Evaluate the trajectory density on every sample.

    A zero density means the sampler emitted a trajectory the measure
    forbids, which is reported as an AgreementError. Also compares the mean
    jump count with its integral expectation sum_i int rate_out_i(s) p_i(s) ds.
    """
    q = check_distribution(chain, q)
    worst = math.inf
    for trajectory in batch.trajectories:
        value = density(chain, q, trajectory)
        if value <= 0.0:
            raise AgreementError(
                f"sampled trajectory has zero density (edges={trajectory.path.edges})"
            )
        worst = min(worst, value)
    mean_jumps = sum(len(tr) for tr in batch.trajectories) / batch.count

    result = series_solve(chain, q, batch.duration, keep_grid=True, grid=grid)
    times = result.times
    flow = np.zeros_like(times)
    for v in range(chain.n_vertices):
        flow += np.asarray(chain.out_rate(v, times)) * result.grid_values[v]
    expected = float(np.trapezoid(flow, times)) if len(times) > 1 else 0.0
    return DensityCheckReport(batch.count, worst, mean_jumps, expected)
