"""Time-dependent transition-rate functions.

Every family supports pointwise evaluation, an exact cumulative integral
from time zero (closed form; composite trapezoid on the stored grid for
tabulated data, which is exact for the linear interpolant), and a supremum
bound over a time window. All families are nonnegative and immutable.

Rates are defined for all times s >= 0 except ``Tabulated``, which is only
defined up to the end of its grid; chain-level operations enforce the chain
horizon on top of this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ChainValidationError

_TWO_PI = 2.0 * math.pi


def _as_times(s):
    ts = np.asarray(s, dtype=float)
    if np.any(ts < 0.0):
        raise ChainValidationError("rate queried at negative time")
    return ts


def _check_interval(a: float, b: float) -> None:
    if not (0.0 <= a <= b):
        raise ChainValidationError(f"reversed or negative interval [{a}, {b}]")


def _require_nonnegative(name: str, values) -> None:
    arr = np.asarray(values, dtype=float)
    if arr.size and (np.any(arr < 0.0) or not np.all(np.isfinite(arr))):
        raise ChainValidationError(f"{name} must be finite and nonnegative")


def _require_increasing(name: str, values) -> None:
    arr = np.asarray(values, dtype=float)
    if arr.size and np.any(np.diff(arr) <= 0.0):
        raise ChainValidationError(f"{name} must be strictly increasing")


class RateFunction:
    """Base class for rate families; subclasses implement value/cumulative/bound."""

    kind = "abstract"

    def value(self, s):
        raise NotImplementedError

    def cumulative(self, ts):
        """Integral of the rate over [0, ts], vectorized over ts."""
        raise NotImplementedError

    def integral(self, a: float, b: float) -> float:
        """Cumulative hazard over [a, b]."""
        _check_interval(a, b)
        cum = self.cumulative(np.array([a, b], dtype=float))
        return float(cum[1] - cum[0])

    def bound(self, t: float | None = None) -> float:
        """Supremum of the rate over [0, t] (over all times if t is None)."""
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(RateFunction):
    rate: float

    kind = "constant"

    def __post_init__(self):
        _require_nonnegative("constant rate", [self.rate])

    def value(self, s):
        ts = _as_times(s)
        out = np.full_like(ts, self.rate)
        return float(out) if out.ndim == 0 else out

    def cumulative(self, ts):
        return self.rate * _as_times(ts)

    def bound(self, t=None):
        return self.rate


@dataclass(frozen=True)
class PiecewiseConstant(RateFunction):
    """Right-open constant pieces: values[k] on [breakpoints[k-1], breakpoints[k]).

    ``breakpoints`` are the interior jump points; the last value extends to
    any later time.
    """

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    kind = "piecewise_constant"

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) != len(self.breakpoints) + 1:
            raise ChainValidationError(
                "piecewise-constant rate needs exactly one more value than breakpoints"
            )
        _require_nonnegative("piecewise-constant values", self.values)
        _require_nonnegative("breakpoints", self.breakpoints)
        _require_increasing("breakpoints", self.breakpoints)
        if self.breakpoints and self.breakpoints[0] == 0.0:
            raise ChainValidationError("breakpoints must be strictly positive")

    def _piece(self, ts):
        return np.searchsorted(np.asarray(self.breakpoints), ts, side="right")

    def value(self, s):
        ts = _as_times(s)
        out = np.asarray(self.values)[self._piece(ts)]
        return float(out) if out.ndim == 0 else out

    def cumulative(self, ts):
        ts = _as_times(ts)
        knots = np.concatenate([[0.0], self.breakpoints])
        vals = np.asarray(self.values)
        knot_cum = np.concatenate([[0.0], np.cumsum(vals[:-1] * np.diff(knots))])
        idx = self._piece(ts)
        return knot_cum[idx] + vals[idx] * (ts - knots[idx])

    def bound(self, t=None):
        if t is None:
            return max(self.values)
        idx = int(self._piece(_as_times(t)))
        return max(self.values[: idx + 1])


@dataclass(frozen=True)
class PiecewiseLinear(RateFunction):
    """Linear interpolation between knots, held constant outside them."""

    knots: tuple[float, ...]
    values: tuple[float, ...]

    kind = "piecewise_linear"

    def __post_init__(self):
        object.__setattr__(self, "knots", tuple(float(k) for k in self.knots))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.knots) != len(self.values) or len(self.knots) < 2:
            raise ChainValidationError("piecewise-linear rate needs >= 2 matching knots/values")
        _require_nonnegative("knot values", self.values)
        _require_nonnegative("knots", self.knots)
        _require_increasing("knots", self.knots)

    def value(self, s):
        ts = _as_times(s)
        out = np.interp(ts, self.knots, self.values)
        return float(out) if out.ndim == 0 else out

    def cumulative(self, ts):
        ts = _as_times(ts)
        kn = np.asarray(self.knots)
        va = np.asarray(self.values)
        # trapezoid between knots is exact for a linear interpolant
        seg = np.concatenate([[va[0] * kn[0]], 0.5 * (va[1:] + va[:-1]) * np.diff(kn)])
        knot_cum = np.cumsum(seg)
        idx = np.clip(np.searchsorted(kn, ts, side="right") - 1, -1, len(kn) - 1)
        below = idx < 0
        above = idx >= len(kn) - 1
        interior = ~below & ~above
        out = np.empty_like(ts)
        out[below] = va[0] * ts[below]
        out[above] = knot_cum[-1] + va[-1] * (ts[above] - kn[-1])
        if np.any(interior):
            j = idx[interior]
            tj = ts[interior]
            vt = va[j] + (va[j + 1] - va[j]) * (tj - kn[j]) / (kn[j + 1] - kn[j])
            out[interior] = knot_cum[j] + 0.5 * (va[j] + vt) * (tj - kn[j])
        return out

    def bound(self, t=None):
        if t is None:
            return max(self.values)
        t = float(_as_times(t))
        best = float(self.values[0])
        for k, v in zip(self.knots, self.values):
            if k <= t:
                best = max(best, v)
        return max(best, float(self.value(t)))


@dataclass(frozen=True)
class Sinusoid(RateFunction):
    """offset + amplitude * sin(omega * s + phase), with offset >= |amplitude|."""

    offset: float
    amplitude: float
    omega: float
    phase: float = 0.0

    kind = "sinusoid"

    def __post_init__(self):
        for name in ("offset", "amplitude", "omega", "phase"):
            if not math.isfinite(getattr(self, name)):
                raise ChainValidationError(f"sinusoid {name} must be finite")
        if self.offset < abs(self.amplitude):
            raise ChainValidationError("sinusoid offset must dominate |amplitude|")

    def value(self, s):
        ts = _as_times(s)
        out = self.offset + self.amplitude * np.sin(self.omega * ts + self.phase)
        return float(out) if out.ndim == 0 else out

    def cumulative(self, ts):
        ts = _as_times(ts)
        if self.omega == 0.0:
            return (self.offset + self.amplitude * math.sin(self.phase)) * ts
        osc = np.cos(self.omega * ts + self.phase) - math.cos(self.phase)
        return self.offset * ts - (self.amplitude / self.omega) * osc

    def bound(self, t=None):
        if self.amplitude == 0.0:
            return self.offset
        if self.omega == 0.0:
            return self.offset + self.amplitude * math.sin(self.phase)
        if t is None:
            return self.offset + abs(self.amplitude)
        t = float(_as_times(t))
        # phase interval swept on [0, t]; the peak is attained iff it contains
        # an angle where sin equals sign(amplitude)
        lo, hi = sorted((self.phase, self.omega * t + self.phase))
        target = math.pi / 2.0 if self.amplitude > 0 else -math.pi / 2.0
        k = math.ceil((lo - target) / _TWO_PI)
        if target + k * _TWO_PI <= hi:
            return self.offset + abs(self.amplitude)
        ends = self.amplitude * np.sin([lo, hi])
        return self.offset + float(np.max(ends))


@dataclass(frozen=True)
class Tabulated(RateFunction):
    """Values on a uniform grid over [0, horizon], linearly interpolated."""

    horizon: float
    values: tuple[float, ...]

    kind = "tabulated"

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not (math.isfinite(self.horizon) and self.horizon > 0.0):
            raise ChainValidationError("tabulated horizon must be positive and finite")
        if len(self.values) < 2:
            raise ChainValidationError("tabulated rate needs >= 2 grid values")
        _require_nonnegative("tabulated values", self.values)

    def _grid(self):
        return np.linspace(0.0, self.horizon, len(self.values))

    def _interp(self):
        return PiecewiseLinear(tuple(self._grid()), self.values)

    def _check_domain(self, ts):
        if np.any(ts > self.horizon * (1.0 + 1e-12) + 1e-12):
            raise ChainValidationError(
                f"tabulated rate queried beyond its horizon {self.horizon}"
            )

    def value(self, s):
        ts = _as_times(s)
        self._check_domain(ts)
        return self._interp().value(np.minimum(ts, self.horizon))

    def cumulative(self, ts):
        ts = _as_times(ts)
        self._check_domain(ts)
        return self._interp().cumulative(np.minimum(ts, self.horizon))

    def bound(self, t=None):
        if t is None:
            t = self.horizon
        return self._interp().bound(min(float(t), self.horizon))
