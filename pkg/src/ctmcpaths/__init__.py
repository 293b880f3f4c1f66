"""Trajectory measures for continuous-time Markov chains on finite multigraphs.

The distribution at time t is built as a convergent series over trajectory
lengths, each term an integral of the trajectory density over a time
simplex, with an analytic truncation certificate attached to every answer.
Independent oracles (fixed-step ODE integration, matrix exponentials,
thinning-based sampling, and regular-graph heat kernels) validate the
series throughout the test suite.
"""

from .chain import (
    ChainSpec,
    check_distribution,
    delta_distribution,
    embed_in_double,
    uniform_distribution,
)
from .errors import AgreementError, ChainValidationError, ResourceLimitError
from .graphs import (
    DegreeStats,
    DirectedEdge,
    DirectedGraph,
    Path,
    UndirectedEdge,
    UndirectedGraph,
    degree_stats,
    double,
    enumerate_paths,
    underlying,
)
from .master import expm_solution, master_matrix, solve_ode, transition_rate
from .measure import (
    DensityIntegral,
    PropagatorTable,
    SeriesResult,
    Trajectory,
    choose_truncation,
    density,
    escape_rate,
    fundamental_solution,
    integrate_density,
    propagator,
    series_solve,
)
from .rates import Constant, PiecewiseConstant, PiecewiseLinear, RateFunction, Sinusoid, Tabulated
from .regular import (
    RegularChain,
    heat_kernel,
    heat_kernel_table,
    path_counts,
    poisson_pmf,
    subordination_expectation,
)
from .sampling import (
    SampleBatch,
    empirical_distribution,
    log_density_check,
    sample_batch,
    sample_trajectory,
    total_variation,
)
from .schema import load_document, parse_chain, serialize_chain

__version__ = "0.1.0"

__all__ = [
    "AgreementError",
    "ChainSpec",
    "ChainValidationError",
    "Constant",
    "DegreeStats",
    "DensityIntegral",
    "DirectedEdge",
    "DirectedGraph",
    "Path",
    "PiecewiseConstant",
    "PiecewiseLinear",
    "PropagatorTable",
    "RateFunction",
    "RegularChain",
    "ResourceLimitError",
    "SampleBatch",
    "SeriesResult",
    "Sinusoid",
    "Tabulated",
    "Trajectory",
    "UndirectedEdge",
    "UndirectedGraph",
    "check_distribution",
    "choose_truncation",
    "degree_stats",
    "delta_distribution",
    "density",
    "double",
    "embed_in_double",
    "empirical_distribution",
    "enumerate_paths",
    "escape_rate",
    "expm_solution",
    "fundamental_solution",
    "heat_kernel",
    "heat_kernel_table",
    "integrate_density",
    "load_document",
    "log_density_check",
    "master_matrix",
    "parse_chain",
    "path_counts",
    "poisson_pmf",
    "propagator",
    "sample_batch",
    "sample_trajectory",
    "series_solve",
    "serialize_chain",
    "solve_ode",
    "subordination_expectation",
    "total_variation",
    "transition_rate",
    "underlying",
    "uniform_distribution",
]
