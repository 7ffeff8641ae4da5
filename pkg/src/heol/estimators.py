"""Sliding-window integral estimators of the lumped disturbance F.

For the first-order ultra-local model  d(Dy)/dt = F + a*Du  the window
estimate is

    F = -(6/T^3) * Int_0^T [ (T - 2s)*Dy(s) + s*(T - s)*a(s)*Du(s) ] ds

and for the second-order model  d2(Dy)/dt2 = F + a*Du

    F = (60/T^5) * [ Int_0^T ((T-s)^2 - 4(T-s)s + s^2) * Dy(s) ds
                     - 1/2 * Int_0^T (T-s)^2 s^2 * a(s)*Du(s) ds ].

Both kernels annihilate the window's unknown initial conditions (constants
for order one, affine signals for order two), so no derivative of the
measured output is ever needed.  Integrals are evaluated with composite
Simpson weights; an odd interval count falls back to Simpson on all but the
last interval plus a trapezoid on it.

The ``Du`` kernels vanish at s = T, so the estimate at time t never needs
the control applied *at* t — the loop can estimate first and act second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import AlignmentError, ConfigurationError, InsufficientDataError
from .signals import Window

__all__ = [
    "EstimatorConfig",
    "FEstimate",
    "quadrature",
    "estimate_f_nu1",
    "estimate_f_nu2",
]

_RULES = ("simpson", "trapezoid")


@dataclass(frozen=True)
class EstimatorConfig:
    """Window length and quadrature rule for a channel's F estimator."""

    T: float
    rule: str = "simpson"

    def __post_init__(self):
        if not (math.isfinite(self.T) and self.T > 0.0):
            raise ConfigurationError(f"estimator window length must be positive, got T={self.T}")
        if self.rule not in _RULES:
            raise ConfigurationError(f"unknown quadrature rule {self.rule!r}, expected one of {_RULES}")

    def validate_against(self, h: float) -> int:
        """Check T against a sampling period; returns the interval count."""
        w = int(round(self.T / h))
        if w < 1 or abs(w * h - self.T) > 1e-9 * max(self.T, h):
            raise ConfigurationError(
                f"estimator window T={self.T} must be an integer multiple of the sampling period h={h}"
            )
        if w + 1 < 5:
            raise ConfigurationError(
                f"estimator window T={self.T} at h={h} holds {w + 1} samples; need at least 5"
            )
        return w


@dataclass(frozen=True)
class FEstimate:
    """One disturbance estimate: value, the time it refers to, and validity.

    ``valid`` is False during warm-up, when no full window exists yet and the
    value is pinned to 0 by policy.
    """

    value: float
    at_time: float | None
    valid: bool = True


def _quad_coeffs(n_intervals: int, h: float, rule: str) -> np.ndarray:
    """Quadrature weight vector for ``n_intervals + 1`` uniform samples."""
    n = n_intervals
    c = np.zeros(n + 1)
    if rule == "trapezoid":
        c[:] = h
        c[0] = c[-1] = 0.5 * h
        return c
    # composite Simpson; odd interval counts get a trapezoid on the last interval
    m = n if n % 2 == 0 else n - 1
    if m > 0:
        c[0] += h / 3.0
        c[1:m:2] += 4.0 * h / 3.0
        c[2:m:2] += 2.0 * h / 3.0
        c[m] += h / 3.0
    if m < n:
        c[n - 1] += 0.5 * h
        c[n] += 0.5 * h
    return c


_coeff_cache: dict[tuple[int, float, str], np.ndarray] = {}


def _cached_coeffs(n_intervals: int, h: float, rule: str) -> np.ndarray:
    key = (n_intervals, h, rule)
    c = _coeff_cache.get(key)
    if c is None:
        c = _quad_coeffs(n_intervals, h, rule)
        c.setflags(write=False)
        _coeff_cache[key] = c
    return c


def quadrature(window: Window, weight: Callable[[np.ndarray], np.ndarray], rule: str = "simpson") -> float:
    """Integrate ``weight(sigma) * values`` over the window."""
    if rule not in _RULES:
        raise ConfigurationError(f"unknown quadrature rule {rule!r}, expected one of {_RULES}")
    n = len(window) - 1
    if n < 2:
        raise InsufficientDataError(f"quadrature needs at least 3 samples, got {len(window)}")
    h = window.T / n
    c = _cached_coeffs(n, h, rule)
    return float(np.dot(c, weight(window.sigma) * window.values))


def _check_aligned(dy_window: Window, adu_window: Window):
    if len(dy_window) != len(adu_window) or dy_window.T != adu_window.T:
        raise AlignmentError(
            f"windows differ in geometry: {len(dy_window)} samples over T={dy_window.T} vs "
            f"{len(adu_window)} over T={adu_window.T}"
        )
    if np.max(np.abs(dy_window.sigma - adu_window.sigma)) > 1e-12 * dy_window.T:
        raise AlignmentError("windows are not sampled on the same sigma grid")


def estimate_f_nu1(
    dy_window: Window | None,
    adu_window: Window | None,
    at_time: float | None = None,
    rule: str = "simpson",
) -> FEstimate:
    """Disturbance estimate for a first-order channel.

    Passing ``None`` windows marks warm-up: the estimate is 0 and flagged
    invalid.  Constant offsets on ``dy`` are annihilated by the kernel.
    """
    if dy_window is None or adu_window is None:
        return FEstimate(0.0, at_time, valid=False)
    _check_aligned(dy_window, adu_window)
    T = dy_window.T
    iy = quadrature(dy_window, lambda s: T - 2.0 * s, rule)
    iu = quadrature(adu_window, lambda s: s * (T - s), rule)
    return FEstimate(-6.0 / T**3 * (iy + iu), at_time, valid=True)


def estimate_f_nu2(
    dy_window: Window | None,
    adu_window: Window | None,
    at_time: float | None = None,
    rule: str = "simpson",
) -> FEstimate:
    """Disturbance estimate for a second-order channel.

    Affine components of ``dy`` (initial value and slope) are annihilated by
    the kernel.  ``None`` windows mark warm-up as in :func:`estimate_f_nu1`.
    """
    if dy_window is None or adu_window is None:
        return FEstimate(0.0, at_time, valid=False)
    _check_aligned(dy_window, adu_window)
    T = dy_window.T
    iy = quadrature(dy_window, lambda s: (T - s) ** 2 - 4.0 * (T - s) * s + s**2, rule)
    iu = quadrature(adu_window, lambda s: (T - s) ** 2 * s**2, rule)
    return FEstimate(60.0 / T**5 * (iy - 0.5 * iu), at_time, valid=True)


## Fused kernels for the simulation hot path: weight * quadrature coefficients
## collapse each estimate into two dot products.  Same coefficient vectors as
## the public functions, so the two paths agree to accumulation round-off.


class FusedEstimator:
    """Precomputed estimator for fixed window geometry (order, T, n, rule)."""

    def __init__(self, order: int, T: float, n_intervals: int, rule: str = "simpson"):
        if order not in (1, 2):
            raise ConfigurationError(f"estimator order must be 1 or 2, got {order}")
        if n_intervals + 1 < 5:
            raise ConfigurationError(
                f"estimator window needs at least 5 samples, got {n_intervals + 1}"
            )
        self.order = order
        self.T = T
        h = T / n_intervals
        s = h * np.arange(n_intervals + 1)
        c = _cached_coeffs(n_intervals, h, rule)
        if order == 1:
            self._wy = -6.0 / T**3 * c * (T - 2.0 * s)
            self._wu = -6.0 / T**3 * c * (s * (T - s))
        else:
            self._wy = 60.0 / T**5 * c * ((T - s) ** 2 - 4.0 * (T - s) * s + s**2)
            self._wu = -30.0 / T**5 * c * ((T - s) ** 2 * s**2)
        self._wy.setflags(write=False)
        self._wu.setflags(write=False)

    def estimate(self, dy_values: np.ndarray, adu_values: np.ndarray, at_time: float) -> FEstimate:
        value = float(np.dot(self._wy, dy_values) + np.dot(self._wu, adu_values))
        return FEstimate(value, at_time, valid=True)
