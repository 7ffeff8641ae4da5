"""Time grids, reference trajectories, and sliding estimation windows.

Trajectories are piecewise polynomials with analytic derivatives: each segment
stores ascending coefficients in the local variable ``t - start`` so that long
horizons do not lose precision to cancellation.  The degree-7 step profile
produced by :func:`make_smoothstep` has vanishing first, second, and third
derivatives at both ends, which keeps nominal controls that consume up to the
third output derivative continuous across segment joins.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CapabilityError,
    ConfigurationError,
    HorizonError,
    IntervalError,
    TimeOrderError,
    WarmUpError,
)

__all__ = [
    "TimeGrid",
    "SampledSeries",
    "Segment",
    "ReferenceTrajectory",
    "Window",
    "eval_trajectory",
    "make_constant",
    "make_smoothstep",
    "window_slice",
]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform sampling grid ``t0 + k*h`` for ``k = 0..n_steps``.

    Grid points are always produced as ``t0 + k*h`` (one multiply, one add)
    rather than by accumulation, so point ``k`` is bit-reproducible and free
    of drift regardless of the horizon length.
    """

    t0: float
    h: float
    n_steps: int

    def __post_init__(self):
        if not (math.isfinite(self.t0) and math.isfinite(self.h)):
            raise ConfigurationError("time grid origin and step must be finite")
        if self.h <= 0.0:
            raise ConfigurationError(f"sampling period must be positive, got h={self.h}")
        if self.n_steps < 1:
            raise ConfigurationError(f"grid needs at least one step, got n_steps={self.n_steps}")

    def t(self, k: int) -> float:
        """Time of grid point ``k``, exactly ``t0 + k*h``."""
        return self.t0 + k * self.h

    def times(self) -> np.ndarray:
        """All ``n_steps + 1`` grid points as an array."""
        return self.t0 + self.h * np.arange(self.n_steps + 1)

    @property
    def n_points(self) -> int:
        return self.n_steps + 1

    def index_of(self, t: float) -> int:
        """Index of the grid point nearest to ``t``.

        ``t`` must sit on the grid up to round-off; anything farther than a
        thousandth of a step away is rejected rather than silently snapped.
        """
        k = int(round((t - self.t0) / self.h))
        if abs(self.t(k) - t) > 1e-3 * self.h:
            raise TimeOrderError(f"t={t!r} is not a grid point of {self!r}")
        return k


@dataclass(frozen=True)
class SampledSeries:
    """A partially or fully filled signal log on a :class:`TimeGrid`.

    ``values[k]`` is the sample at ``grid.t(k)``.  The array may be shorter
    than the grid while a simulation is still filling it.
    """

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.ndim != 1:
            raise ConfigurationError("sampled series values must be one-dimensional")
        if len(v) > self.grid.n_points:
            raise ConfigurationError(
                f"series holds {len(v)} samples but the grid has only {self.grid.n_points} points"
            )
        if len(v) and not np.all(np.isfinite(v)):
            raise ConfigurationError("sampled series contains non-finite values")

    def __len__(self) -> int:
        return len(self.values)


def _polyder(coeffs: tuple[float, ...]) -> tuple[float, ...]:
    return tuple(coeffs[i] * i for i in range(1, len(coeffs)))


def _horner(coeffs: tuple[float, ...], x: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


@dataclass(frozen=True)
class Segment:
    """One polynomial piece: ascending coefficients in ``t - start``.

    ``start``/``stop`` may be ``-inf``/``+inf`` for constant head or tail
    pieces, so a trajectory can cover any simulation horizon.
    """

    start: float
    stop: float
    coeffs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not self.coeffs:
            raise ConfigurationError("polynomial segment needs at least one coefficient")
        if not self.stop > self.start:
            raise IntervalError(f"segment needs stop > start, got [{self.start}, {self.stop}]")
        if math.isinf(self.start) and len(self.coeffs) > 1:
            raise ConfigurationError("a segment starting at -inf must be constant")


@dataclass(frozen=True)
class ReferenceTrajectory:
    """Piecewise-polynomial reference with analytic derivatives.

    Parameters
    ----------
    segments : sequence of Segment
        Contiguous, increasing pieces.  Adjacent pieces must agree in value
        and in every derivative up to ``max_order - 1`` (relative 1e-9), so
        the trajectory is C^(max_order-1) at joins.
    max_order : int
        Highest derivative order callers may request (at least 3: nominal
        controls of the bundled benchmark consume the third derivative).
    """

    segments: tuple[Segment, ...]
    max_order: int = 3
    # per-segment derivative coefficient tables, built once at construction
    _dtables: tuple[tuple[tuple[float, ...], ...], ...] = field(repr=False, default=())

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise ConfigurationError("trajectory needs at least one segment")
        if self.max_order < 3:
            raise ConfigurationError(f"max_order must be >= 3, got {self.max_order}")
        for a, b in zip(segs, segs[1:]):
            if b.start != a.stop:
                raise ConfigurationError(
                    f"segments must be contiguous: piece ending at {a.stop} "
                    f"followed by piece starting at {b.start}"
                )
        tables = []
        for seg in segs:
            derivs = [seg.coeffs]
            for _ in range(self.max_order):
                derivs.append(_polyder(derivs[-1]))
            tables.append(tuple(derivs))
        object.__setattr__(self, "_dtables", tuple(tables))
        self._check_joins()

    def _check_joins(self):
        for i in range(len(self.segments) - 1):
            t_join = self.segments[i].stop
            for order in range(self.max_order):
                left = self._eval_segment(i, t_join, order)
                right = self._eval_segment(i + 1, t_join, order)
                if abs(left - right) > 1e-9 * max(1.0, abs(left), abs(right)):
                    raise ConfigurationError(
                        f"segments disagree at t={t_join} in derivative {order}: "
                        f"{left!r} vs {right!r}"
                    )

    @property
    def span(self) -> tuple[float, float]:
        """Interval covered by the segments (may reach +-inf)."""
        return self.segments[0].start, self.segments[-1].stop

    def _segment_index(self, t: float) -> int:
        lo, hi = self.span
        if t < lo or t > hi:
            raise HorizonError(f"t={t} outside trajectory span [{lo}, {hi}]")
        starts = [s.start for s in self.segments]
        i = bisect.bisect_right(starts, t) - 1
        return max(i, 0)

    def _eval_segment(self, i: int, t: float, order: int) -> float:
        seg = self.segments[i]
        tau = 0.0 if math.isinf(seg.start) else t - seg.start
        return _horner(self._dtables[i][order], tau)

    def eval(self, t: float, order: int = 0) -> float:
        """Value of the ``order``-th derivative at time ``t``."""
        if order < 0 or order > self.max_order:
            raise CapabilityError(
                f"derivative order {order} not available (max_order={self.max_order})"
            )
        return self._eval_segment(self._segment_index(t), t, order)


def eval_trajectory(trajectory: ReferenceTrajectory, t: float, order: int = 0) -> float:
    """Evaluate a reference trajectory derivative; see :meth:`ReferenceTrajectory.eval`."""
    return trajectory.eval(t, order)


def make_constant(value: float, max_order: int = 3) -> ReferenceTrajectory:
    """Trajectory identically equal to ``value`` on the whole real line."""
    return ReferenceTrajectory(
        (Segment(-math.inf, math.inf, (float(value),)),), max_order=max_order
    )


## Degree-7 step profile s(tau) = 35 tau^4 - 84 tau^5 + 70 tau^6 - 20 tau^7:
## s(0)=0, s(1)=1, and s', s'', s''' vanish at both ends.
_SMOOTHSTEP7 = (0.0, 0.0, 0.0, 0.0, 35.0, -84.0, 70.0, -20.0)


def make_smoothstep(
    y_from: float, y_to: float, t_start: float, t_end: float, max_order: int = 3
) -> ReferenceTrajectory:
    """Reference equal to ``y_from`` before ``t_start`` and ``y_to`` after ``t_end``.

    The transition is the degree-7 polynomial step whose first three
    derivatives vanish at both ends.  With ``y_from == y_to`` the result is
    simply the constant trajectory.
    """
    if not t_end > t_start:
        raise IntervalError(f"need t_end > t_start, got [{t_start}, {t_end}]")
    y_from = float(y_from)
    y_to = float(y_to)
    if y_from == y_to:
        return make_constant(y_from, max_order=max_order)
    duration = t_end - t_start
    amp = y_to - y_from
    # rescale s(tau) coefficients to the local variable (t - t_start)
    coeffs = [amp * c / duration**k for k, c in enumerate(_SMOOTHSTEP7)]
    coeffs[0] = y_from
    return ReferenceTrajectory(
        (
            Segment(-math.inf, t_start, (y_from,)),
            Segment(t_start, t_end, tuple(coeffs)),
            Segment(t_end, math.inf, (y_to,)),
        ),
        max_order=max_order,
    )


@dataclass(frozen=True)
class Window:
    """A backward-looking slice of a sampled signal, re-based to sigma in [0, T].

    ``sigma[0] == 0`` corresponds to absolute time ``t - T`` and
    ``sigma[-1] == T`` to the slice time ``t`` itself.
    """

    T: float
    sigma: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        sig = np.asarray(self.sigma, dtype=float)
        val = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "sigma", sig)
        object.__setattr__(self, "values", val)
        if self.T <= 0.0:
            raise ConfigurationError(f"window length must be positive, got T={self.T}")
        if sig.shape != val.shape or sig.ndim != 1:
            raise ConfigurationError("window sigma and values must be 1-d arrays of equal length")
        if len(sig) < 2:
            raise ConfigurationError("window needs at least two samples")
        d = np.diff(sig)
        if not np.all(d > 0.0):
            raise ConfigurationError("window sigma values must be strictly increasing")
        tol = 1e-12 * self.T
        if sig[0] != 0.0 or abs(sig[-1] - self.T) > tol or np.ptp(d) > tol:
            raise ConfigurationError("window sigma must run uniformly from 0 to T")

    def __len__(self) -> int:
        return len(self.sigma)


def window_slice(series: SampledSeries, t: float, T: float) -> Window:
    """Slice the most recent ``T`` seconds of ``series`` ending at grid time ``t``.

    Raises :class:`WarmUpError` while ``t - T`` precedes the grid origin or
    the series has not yet been filled up to ``t``; callers treat that as the
    warm-up signal.  Slicing the same ``(t, T)`` twice returns bit-identical
    windows.
    """
    grid = series.grid
    if T <= 0.0:
        raise ConfigurationError(f"window length must be positive, got T={T}")
    w = int(round(T / grid.h))
    if w < 1 or abs(w * grid.h - T) > 1e-9 * max(T, grid.h):
        raise ConfigurationError(
            f"window length T={T} is not a positive multiple of the sampling period h={grid.h}"
        )
    k = grid.index_of(t)
    if k - w < 0:
        raise WarmUpError(f"window [{t - T}, {t}] starts before the grid origin {grid.t0}")
    if len(series) < k + 1:
        raise WarmUpError(f"series holds {len(series)} samples, need {k + 1} to slice at t={t}")
    sigma = grid.h * np.arange(w + 1)
    return Window(T=w * grid.h, sigma=sigma, values=series.values[k - w : k + 1])
