"""Chain and result documents: versioned JSON plus CSV for tabular output.

Serialization is canonical by construction: keys are sorted, floats are
rendered with 17 significant digits, and no volatile data (timestamps,
timings) is included unless explicitly requested, so identical inputs give
byte-identical documents.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from .chain import ChainSpec
from .errors import ChainValidationError
from .graphs import DirectedEdge, DirectedGraph, UndirectedEdge, UndirectedGraph, double
from .rates import (
    Constant,
    PiecewiseConstant,
    PiecewiseLinear,
    RateFunction,
    Sinusoid,
    Tabulated,
)

CHAIN_FORMAT = "ctmc-chain/1"
RESULT_FORMAT = "ctmc-result/1"


# ---------------------------------------------------------------------------
# canonical JSON
# ---------------------------------------------------------------------------

def _format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ChainValidationError("cannot serialize a non-finite number")
    if x == math.floor(x) and abs(x) < 1e16:
        return str(int(x))
    return format(x, ".17g")


def canonical_dumps(obj) -> str:
    """Deterministic JSON: sorted keys, 17-significant-digit floats."""
    out: list[str] = []
    _dump(obj, out)
    return "".join(out)


def _dump(obj, out: list) -> None:
    if isinstance(obj, dict):
        out.append("{")
        for pos, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise ChainValidationError("document keys must be strings")
            if pos:
                out.append(",")
            out.append(json.dumps(key))
            out.append(":")
            _dump(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for pos, item in enumerate(obj):
            if pos:
                out.append(",")
            _dump(item, out)
        out.append("]")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_format_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif obj is None:
        out.append("null")
    else:
        raise ChainValidationError(f"cannot serialize value of type {type(obj).__name__}")


# ---------------------------------------------------------------------------
# rate functions
# ---------------------------------------------------------------------------

def rate_to_json(rate: RateFunction) -> dict:
    if isinstance(rate, Constant):
        return {"kind": "constant", "value": rate.rate}
    if isinstance(rate, PiecewiseConstant):
        return {
            "kind": "piecewise_constant",
            "breakpoints": list(rate.breakpoints),
            "values": list(rate.values),
        }
    if isinstance(rate, PiecewiseLinear):
        return {"kind": "piecewise_linear", "knots": list(rate.knots), "values": list(rate.values)}
    if isinstance(rate, Sinusoid):
        return {
            "kind": "sinusoid",
            "offset": rate.offset,
            "amplitude": rate.amplitude,
            "omega": rate.omega,
            "phase": rate.phase,
        }
    if isinstance(rate, Tabulated):
        return {"kind": "tabulated", "horizon": rate.horizon, "values": list(rate.values)}
    raise ChainValidationError(f"unknown rate family {type(rate).__name__}")


def _number(obj, key, where, minimum=None):
    if key not in obj:
        raise ChainValidationError(f"missing field {key!r}", field=where)
    value = obj[key]
    fld = f"{where}.{key}" if where else key
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ChainValidationError(f"field {key!r} must be a number", field=fld)
    if minimum is not None and value < minimum:
        raise ChainValidationError(f"field {key!r} must be >= {minimum}", field=fld)
    return float(value)


def _number_list(obj, key, where):
    if key not in obj or not isinstance(obj[key], list):
        raise ChainValidationError(f"field {key!r} must be a list of numbers", field=f"{where}.{key}")
    out = []
    for pos, value in enumerate(obj[key]):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ChainValidationError(
                f"entry {pos} of {key!r} must be a number", field=f"{where}.{key}[{pos}]"
            )
        out.append(float(value))
    return tuple(out)


def rate_from_json(obj, where: str = "rate") -> RateFunction:
    if not isinstance(obj, dict):
        raise ChainValidationError("rate must be an object", field=where)
    kind = obj.get("kind")
    try:
        if kind == "constant":
            return Constant(_number(obj, "value", where, minimum=0.0))
        if kind == "piecewise_constant":
            return PiecewiseConstant(_number_list(obj, "breakpoints", where), _number_list(obj, "values", where))
        if kind == "piecewise_linear":
            return PiecewiseLinear(_number_list(obj, "knots", where), _number_list(obj, "values", where))
        if kind == "sinusoid":
            return Sinusoid(
                _number(obj, "offset", where),
                _number(obj, "amplitude", where),
                _number(obj, "omega", where),
                _number(obj, "phase", where) if "phase" in obj else 0.0,
            )
        if kind == "tabulated":
            return Tabulated(_number(obj, "horizon", where), _number_list(obj, "values", where))
    except ChainValidationError as err:
        if err.field is None:
            err.field = where
        raise
    raise ChainValidationError(f"unknown rate kind {kind!r}", field=f"{where}.kind")


# ---------------------------------------------------------------------------
# chain documents
# ---------------------------------------------------------------------------

@dataclass
class ChainDocument:
    """A parsed chain plus the metadata the CLI needs."""

    chain: ChainSpec
    directed: bool
    undirected: UndirectedGraph | None
    horizon: float | None
    sha256: str

    @property
    def canonical(self) -> str:
        return serialize_chain(self.chain, horizon=self.horizon)


def parse_chain(text: str) -> ChainSpec:
    """Parse a chain document; undirected documents go through the double."""
    return load_document(text).chain


def load_document(text) -> ChainDocument:
    if isinstance(text, (bytes, str)):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as err:
            raise ChainValidationError(
                f"invalid JSON at line {err.lineno}, column {err.colno}: {err.msg}"
            ) from None
    else:
        doc = text
    if not isinstance(doc, dict):
        raise ChainValidationError("chain document must be a JSON object")
    version = doc.get("format", CHAIN_FORMAT)
    if version != CHAIN_FORMAT:
        raise ChainValidationError(f"unsupported format {version!r}", field="format")
    directed = doc.get("directed", True)
    if not isinstance(directed, bool):
        raise ChainValidationError("field 'directed' must be a boolean", field="directed")
    vertices = doc.get("vertices")
    if not isinstance(vertices, list) or not all(isinstance(v, str) for v in vertices):
        raise ChainValidationError("field 'vertices' must be a list of strings", field="vertices")
    edges = doc.get("edges")
    if not isinstance(edges, list):
        raise ChainValidationError("field 'edges' must be a list", field="edges")
    horizon = None
    if "horizon" in doc and doc["horizon"] is not None:
        horizon = _number(doc, "horizon", "", minimum=0.0)

    if directed:
        chain = _load_directed(vertices, edges, horizon)
        undirected = None
    else:
        chain, undirected = _load_undirected(vertices, edges, horizon)
    digest = hashlib.sha256(serialize_chain(chain, horizon=horizon).encode()).hexdigest()
    return ChainDocument(chain, directed, undirected, horizon, digest)


def _edge_obj(item, where):
    if not isinstance(item, dict):
        raise ChainValidationError("edge must be an object", field=where)
    eid = item.get("id")
    if not isinstance(eid, str) or not eid:
        raise ChainValidationError("edge needs a nonempty string 'id'", field=f"{where}.id")
    return eid


def _load_directed(vertices, edges, horizon):
    built = []
    rates = {}
    for pos, item in enumerate(edges):
        where = f"edges[{pos}]"
        eid = _edge_obj(item, where)
        src = item.get("source")
        tgt = item.get("target")
        if not isinstance(src, str) or not isinstance(tgt, str):
            raise ChainValidationError(
                "directed edge needs string 'source' and 'target'", field=where
            )
        built.append(DirectedEdge(eid, src, tgt))
        rates[eid] = rate_from_json(item.get("rate"), where=f"{where}.rate")
    graph = DirectedGraph(vertices, built)
    return ChainSpec(graph, rates, horizon)


def _load_undirected(vertices, edges, horizon):
    built = []
    forward = {}
    backward = {}
    for pos, item in enumerate(edges):
        where = f"edges[{pos}]"
        eid = _edge_obj(item, where)
        ends = item.get("endpoints")
        if (
            not isinstance(ends, list)
            or len(ends) != 2
            or not all(isinstance(v, str) for v in ends)
        ):
            raise ChainValidationError(
                "undirected edge needs 'endpoints': [u, v]", field=f"{where}.endpoints"
            )
        built.append(UndirectedEdge(eid, ends[0], ends[1]))
        if "rate" in item:
            forward[eid] = backward[eid] = rate_from_json(item["rate"], where=f"{where}.rate")
        elif "rate_forward" in item and "rate_backward" in item:
            forward[eid] = rate_from_json(item["rate_forward"], where=f"{where}.rate_forward")
            backward[eid] = rate_from_json(item["rate_backward"], where=f"{where}.rate_backward")
        else:
            raise ChainValidationError(
                "undirected edge needs 'rate' or both 'rate_forward' and 'rate_backward'",
                field=where,
            )
    x = UndirectedGraph(vertices, built)
    graph = double(x)
    rates = {}
    for e in x.edges:
        rates[f"{e.id}@{e.u}"] = forward[e.id]
        rates[f"{e.id}@{e.v}"] = backward[e.id]
    return ChainSpec(graph, rates, horizon), x


def serialize_chain(chain: ChainSpec, horizon: float | None = None) -> str:
    """Directed-form canonical JSON for a chain (re-parses to an equal chain)."""
    doc = {
        "format": CHAIN_FORMAT,
        "directed": True,
        "vertices": list(chain.graph.vertices),
        "edges": [
            {
                "id": e.id,
                "source": e.source,
                "target": e.target,
                "rate": rate_to_json(chain.rate(e.id)),
            }
            for e in chain.graph.edges
        ],
    }
    if horizon is None and math.isfinite(chain.horizon):
        horizon = chain.horizon
    if horizon is not None:
        doc["horizon"] = horizon
    return canonical_dumps(doc)


# ---------------------------------------------------------------------------
# result documents and CSV
# ---------------------------------------------------------------------------

def distribution_to_json(chain: ChainSpec, p: np.ndarray) -> dict:
    clamped = np.maximum(np.asarray(p, dtype=float), 0.0)  # round-off only
    return {v: float(clamped[i]) for i, v in enumerate(chain.graph.vertices)}


def distribution_csv(chain: ChainSpec, p: np.ndarray) -> str:
    clamped = np.maximum(np.asarray(p, dtype=float), 0.0)
    lines = ["vertex,probability"]
    lines += [
        f"{v},{_format_float(float(clamped[i]))}" for i, v in enumerate(chain.graph.vertices)
    ]
    return "\n".join(lines) + "\n"


def table_csv(vertices, matrix: np.ndarray, t: float) -> str:
    clamped = np.maximum(np.asarray(matrix, dtype=float), 0.0)
    lines = ["start,end,t,value"]
    for i, vi in enumerate(vertices):
        for j, vj in enumerate(vertices):
            lines.append(f"{vi},{vj},{_format_float(t)},{_format_float(float(clamped[i, j]))}")
    return "\n".join(lines) + "\n"


def table_to_json(vertices, matrix: np.ndarray) -> dict:
    clamped = np.maximum(np.asarray(matrix, dtype=float), 0.0)
    return {
        vi: {vj: float(clamped[i, j]) for j, vj in enumerate(vertices)}
        for i, vi in enumerate(vertices)
    }


def error_document(command: str, code: int, kind: str, message: str, field=None) -> dict:
    err = {"code": code, "kind": kind, "message": message}
    if field:
        err["field"] = field
    return {"format": RESULT_FORMAT, "command": command, "error": err}
