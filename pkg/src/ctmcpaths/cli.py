"""Command-line surface.

Every subcommand reads a chain document, writes one result document to
stdout in a single atomic write, and exits 0 on success, 2 on parse or
validation problems, 3 when independent methods disagree beyond their
combined certificates, and 4 when a resource ceiling is hit. Output is
deterministic for a fixed argv and seed; pass --timing to append wall-clock
data (which breaks byte-identical reruns, so it is off by default).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from .chain import (
    ChainSpec,
    check_distribution,
    delta_distribution,
    embed_in_double,
    uniform_distribution,
)
from .errors import AgreementError, ChainValidationError, ResourceLimitError
from .graphs import Path, degree_stats
from .master import expm_solution, solve_ode
from .measure import (
    DEFAULT_EPSILON,
    Trajectory,
    density,
    propagator,
    series_solve,
)
from .regular import RegularChain, heat_kernel_table
from .rng import GENERATOR_NAME
from .sampling import empirical_distribution, log_density_check, sample_batch, total_variation
from .schema import (
    RESULT_FORMAT,
    distribution_csv,
    distribution_to_json,
    error_document,
    load_document,
    table_csv,
    table_to_json,
    canonical_dumps,
)

WORKERS_ENV = "CTMCPATHS_WORKERS"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctmcpaths",
        description="Trajectory measures and propagators for finite continuous-time Markov chains.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, t_required=True):
        p.add_argument("chain", help="chain JSON file, or - for stdin")
        if t_required:
            p.add_argument("--t", type=float, required=True, help="duration")
        p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON,
                       help="series truncation tolerance (default 1e-8)")
        p.add_argument("--grid", type=int, default=None,
                       help="quadrature intervals on [0, t] (default 1024 per unit time)")
        p.add_argument("--output", choices=("json", "csv"), default="json")
        p.add_argument("--timing", action="store_true",
                       help="append wall-clock timing (breaks byte-identical reruns)")

    p = sub.add_parser("validate", help="parse a chain and report its bounds")
    p.add_argument("chain")
    p.add_argument("--output", choices=("json", "csv"), default="json")
    p.add_argument("--timing", action="store_true")

    p = sub.add_parser("solve", help="distribution at time t")
    common(p)
    p.add_argument("--q", default="uniform", help="initial distribution: uniform, delta:<vertex>, or JSON map")
    p.add_argument("--method", choices=("series", "ode", "expm"), default="series")
    p.add_argument("--steps", type=int, default=None, help="ODE steps (default 2048 per unit time)")

    p = sub.add_parser("propagator", help="K(start, end, t) for all vertex pairs")
    common(p)

    p = sub.add_parser("density", help="evaluate the trajectory density")
    common(p, t_required=False)
    p.add_argument("--q", default="uniform")
    p.add_argument("--trajectory", required=True,
                   help='JSON: {"start": v, "edges": [...], "jump_times": [...], "duration": t}')

    p = sub.add_parser("sample", help="draw trajectories and compare with the series answer")
    common(p)
    p.add_argument("--q", default="uniform")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None,
                   help=f"substream count (default ${WORKERS_ENV} or 1)")

    p = sub.add_parser("heatkernel", help="closed-form propagator for unit-rate regular chains")
    common(p)

    p = sub.add_parser("compare", help="run every applicable method and check agreement")
    common(p)
    p.add_argument("--q", default="uniform")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--tolerance", type=float, default=None,
                   help="override the combined agreement tolerance")

    return parser


def _read_chain(arg: str):
    if arg == "-":
        return load_document(sys.stdin.read())
    try:
        with open(arg, "r", encoding="utf-8") as fh:
            return load_document(fh.read())
    except OSError as err:
        raise ChainValidationError(f"cannot read chain file: {err}") from None


def _initial_distribution(chain: ChainSpec, spec: str) -> np.ndarray:
    if spec == "uniform":
        return uniform_distribution(chain)
    if spec.startswith("delta:"):
        return delta_distribution(chain, spec[len("delta:"):])
    try:
        mapping = json.loads(spec)
    except json.JSONDecodeError:
        raise ChainValidationError(
            "--q must be 'uniform', 'delta:<vertex>', or a JSON map"
        ) from None
    if not isinstance(mapping, dict):
        raise ChainValidationError("--q JSON must be an object of vertex: probability")
    p = np.zeros(chain.n_vertices)
    for v, weight in mapping.items():
        p[chain.graph.vertex_index(v)] = float(weight)
    return check_distribution(chain, p)


def _q_json(chain: ChainSpec, q: np.ndarray) -> dict:
    return {v: float(q[i]) for i, v in enumerate(chain.graph.vertices)}


def _series_certificates(result) -> dict:
    cert = {
        "truncation_order": result.order,
        "truncation_tail": result.tail_bound,
        "rate_bound": result.rate_bound,
        "degree_bound": result.degree_bound,
        "grid": result.grid,
    }
    if result.grid_error is not None:
        cert["grid_error"] = result.grid_error
    return cert


# ---------------------------------------------------------------------------
# subcommand handlers: each returns (document, csv text or None)
# ---------------------------------------------------------------------------

def _cmd_validate(args):
    doc = _read_chain(args.chain)
    chain = doc.chain
    stats = degree_stats(chain.graph)
    report = {
        "vertices": len(chain.graph.vertices),
        "edges": len(chain.graph.edges),
        "directed_input": doc.directed,
        "horizon": None if math.isinf(chain.horizon) else chain.horizon,
        "rate_bound": chain.rate_bound(),
        "degree_bound": stats.bound,
        "in_degrees": stats.in_degrees,
        "out_degrees": stats.out_degrees,
        "homogeneous": chain.is_homogeneous(),
    }
    document = {
        "format": RESULT_FORMAT,
        "command": "validate",
        "input": {"chain_hash": doc.sha256},
        "report": report,
    }
    return document, None


def _cmd_solve(args):
    doc = _read_chain(args.chain)
    chain = doc.chain
    q = _initial_distribution(chain, args.q)
    document = {
        "format": RESULT_FORMAT,
        "command": "solve",
        "method": args.method,
        "input": {
            "chain_hash": doc.sha256,
            "t": args.t,
            "q": _q_json(chain, q),
        },
    }
    if args.method == "series":
        result = series_solve(
            chain, q, args.t, epsilon=args.epsilon, grid=args.grid, error_estimate=True
        )
        p = result.distribution
        document["input"]["epsilon"] = args.epsilon
        document["input"]["grid"] = result.grid
        document["certificates"] = _series_certificates(result)
    elif args.method == "ode":
        p = solve_ode(chain, q, args.t, steps=args.steps)
        if args.steps is not None:
            document["input"]["steps"] = args.steps
    else:
        p = expm_solution(chain, q, args.t)
    document["distribution"] = distribution_to_json(chain, p)
    return document, distribution_csv(chain, p) if args.output == "csv" else None


def _cmd_propagator(args):
    doc = _read_chain(args.chain)
    chain = doc.chain
    table = propagator(
        chain, args.t, epsilon=args.epsilon, grid=args.grid, error_estimate=True
    )
    document = {
        "format": RESULT_FORMAT,
        "command": "propagator",
        "method": "series",
        "input": {
            "chain_hash": doc.sha256,
            "t": args.t,
            "epsilon": args.epsilon,
            "grid": table.grid,
        },
        "certificates": {
            "truncation_order": table.order,
            "truncation_tail": table.tail_bound,
            "grid_error": table.grid_error,
        },
        "propagator": table_to_json(table.vertices, table.matrix),
    }
    csv = table_csv(table.vertices, table.matrix, args.t) if args.output == "csv" else None
    return document, csv


def _parse_trajectory(chain: ChainSpec, text: str) -> Trajectory:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as err:
        raise ChainValidationError(f"--trajectory is not valid JSON: {err.msg}") from None
    if not isinstance(obj, dict):
        raise ChainValidationError("--trajectory must be a JSON object")
    edges = obj.get("edges", [])
    times = obj.get("jump_times", [])
    if not isinstance(edges, list) or not all(isinstance(e, str) for e in edges):
        raise ChainValidationError("trajectory 'edges' must be a list of edge ids")
    if not isinstance(times, list):
        raise ChainValidationError("trajectory 'jump_times' must be a list")
    if "duration" not in obj:
        raise ChainValidationError("trajectory needs a 'duration'")
    start = obj.get("start")
    path = Path(chain.graph, tuple(edges), start=start)
    return Trajectory(path, tuple(float(x) for x in times), float(obj["duration"]))


def _cmd_density(args):
    doc = _read_chain(args.chain)
    chain = doc.chain
    q = _initial_distribution(chain, args.q)
    trajectory = _parse_trajectory(chain, args.trajectory)
    value = density(chain, q, trajectory)
    document = {
        "format": RESULT_FORMAT,
        "command": "density",
        "input": {
            "chain_hash": doc.sha256,
            "q": _q_json(chain, q),
            "trajectory": {
                "start": trajectory.path.start,
                "edges": list(trajectory.path.edges),
                "jump_times": list(trajectory.jump_times),
                "duration": trajectory.duration,
            },
        },
        "density": value,
    }
    return document, None


def _cmd_sample(args):
    doc = _read_chain(args.chain)
    chain = doc.chain
    q = _initial_distribution(chain, args.q)
    workers = args.workers
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    batch = sample_batch(chain, q, args.t, args.samples, seed=args.seed, workers=workers)
    empirical = empirical_distribution(batch)
    reference = series_solve(chain, q, args.t, epsilon=args.epsilon, grid=args.grid)
    tv = total_variation(empirical, reference.distribution)
    check = log_density_check(chain, q, batch, grid=args.grid)
    document = {
        "format": RESULT_FORMAT,
        "command": "sample",
        "method": "thinning",
        "rng": {"name": batch.rng_name, "seed": args.seed, "workers": workers},
        "input": {
            "chain_hash": doc.sha256,
            "t": args.t,
            "q": _q_json(chain, q),
            "samples": args.samples,
            "seed": args.seed,
            "epsilon": args.epsilon,
        },
        "empirical_distribution": distribution_to_json(chain, empirical),
        "series_distribution": distribution_to_json(chain, reference.distribution),
        "tv_distance_vs_series": tv,
        "histograms": {
            "terminal": {
                v: int(c)
                for v, c in zip(chain.graph.vertices, batch.terminal_counts())
            },
            "jump_count": {str(k): v for k, v in batch.jump_count_histogram().items()},
        },
        "density_check": {
            "min_density": check.min_density,
            "mean_jump_count": check.mean_jump_count,
            "expected_jump_count": check.expected_jump_count,
        },
        "certificates": _series_certificates(reference),
    }
    return document, None


def _cmd_heatkernel(args):
    doc = _read_chain(args.chain)
    # a doubled undirected document is already closed under reversal, so the
    # recognizer covers both input flavors
    reg = RegularChain.from_chain(doc.chain)
    matrix = heat_kernel_table(reg, args.t, args.epsilon)
    document = {
        "format": RESULT_FORMAT,
        "command": "heatkernel",
        "method": "path-counts",
        "input": {"chain_hash": doc.sha256, "t": args.t, "epsilon": args.epsilon},
        "regularity": reg.r,
        "propagator": table_to_json(reg.x.vertices, matrix),
    }
    csv = table_csv(reg.x.vertices, matrix, args.t) if args.output == "csv" else None
    return document, csv


def _cmd_compare(args):
    doc = _read_chain(args.chain)
    chain = doc.chain
    q = _initial_distribution(chain, args.q)
    series = series_solve(
        chain, q, args.t, epsilon=args.epsilon, grid=args.grid, error_estimate=True
    )
    answers = {"series": series.distribution}
    answers["ode"] = solve_ode(chain, q, args.t, steps=args.steps)
    if chain.is_homogeneous():
        answers["expm"] = expm_solution(chain, q, args.t)
    try:
        reg = RegularChain.from_chain(chain)
    except ChainValidationError:
        reg = None
    if reg is not None:
        kernel = heat_kernel_table(reg, args.t, args.epsilon)
        answers["heatkernel"] = q @ kernel

    names = sorted(answers)
    deviation = 0.0
    for a in names:
        for b in names:
            if a < b:
                deviation = max(deviation, float(np.max(np.abs(answers[a] - answers[b]))))
    tolerance = args.tolerance
    if tolerance is None:
        tolerance = series.tail_bound + (series.grid_error or 0.0) + 1e-6
    agree = deviation <= tolerance

    document = {
        "format": RESULT_FORMAT,
        "command": "compare",
        "input": {
            "chain_hash": doc.sha256,
            "t": args.t,
            "q": _q_json(chain, q),
            "epsilon": args.epsilon,
        },
        "methods": {name: distribution_to_json(chain, p) for name, p in answers.items()},
        "max_pairwise_deviation": deviation,
        "tolerance": tolerance,
        "agree": agree,
        "certificates": _series_certificates(series),
    }
    if not agree:
        raise _CompareFailure(document)
    return document, None


class _CompareFailure(AgreementError):
    def __init__(self, document):
        super().__init__(
            f"methods disagree: max deviation {document['max_pairwise_deviation']} "
            f"> tolerance {document['tolerance']}"
        )
        self.document = document


_HANDLERS = {
    "validate": _cmd_validate,
    "solve": _cmd_solve,
    "propagator": _cmd_propagator,
    "density": _cmd_density,
    "sample": _cmd_sample,
    "heatkernel": _cmd_heatkernel,
    "compare": _cmd_compare,
}


def run_command(argv) -> int:
    """Run one subcommand; returns the exit code after a single atomic write."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        if exit_.code in (0, None):
            return 0
        sys.stdout.write(
            canonical_dumps(error_document("(argv)", 2, "usage", "invalid arguments")) + "\n"
        )
        return 2

    started = time.perf_counter()
    command = args.command
    try:
        document, csv = _HANDLERS[command](args)
    except ChainValidationError as err:
        doc = error_document(command, 2, "validation", str(err), getattr(err, "field", None))
        sys.stdout.write(canonical_dumps(doc) + "\n")
        return 2
    except _CompareFailure as err:
        document = err.document
        document["error"] = {"code": 3, "kind": "agreement", "message": str(err)}
        sys.stdout.write(canonical_dumps(document) + "\n")
        return 3
    except AgreementError as err:
        doc = error_document(command, 3, "agreement", str(err))
        sys.stdout.write(canonical_dumps(doc) + "\n")
        return 3
    except ResourceLimitError as err:
        doc = error_document(command, 4, "resource-limit", str(err))
        sys.stdout.write(canonical_dumps(doc) + "\n")
        return 4

    if getattr(args, "timing", False):
        document["timing"] = {"seconds": time.perf_counter() - started}
    if getattr(args, "output", "json") == "csv":
        if csv is None:
            doc = error_document(
                command, 2, "validation", "csv output is only available for distributions and tables"
            )
            sys.stdout.write(canonical_dumps(doc) + "\n")
            return 2
        sys.stdout.write(csv)
    else:
        sys.stdout.write(canonical_dumps(document) + "\n")
    return 0


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
