"""Plant models, the fixed-step integrator, and the bundled benchmark system.

The benchmark is a two-input, two-output flat system

    dx1/dt = x1 + x1^2 u1
    dx2/dt = x3
    dx3/dt = x4
    dx4/dt = -x4 + x3 + x2 + x1 u1 u2
    y1 = x1,  y2 = x2

whose flat outputs are the measured outputs themselves.  Note the y2 chain
is open-loop unstable (characteristic factor (s+1)^2 (s-1)), which is what
makes the closed-loop scenarios interesting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, DivergenceError
from .homeostat import ImplicitFlatRelation, perturbed_nominal_u2  # noqa: F401  (re-export)
from .signals import ReferenceTrajectory

__all__ = [
    "PlantModel",
    "MismatchSpec",
    "SimState",
    "rk4_step",
    "example_plant",
    "benchmark_relations",
    "initial_state",
    "perturbed_nominal_u2",
]

#: state magnitude beyond which a run is declared divergent
TRUST_REGION = 1e9


@dataclass(frozen=True)
class PlantModel:
    """Continuous-time plant ``dx/dt = f(t, x, u)``, ``y = output(x)``."""

    n_states: int
    n_controls: int
    n_outputs: int
    f: Callable[[float, np.ndarray, np.ndarray], np.ndarray]
    output: Callable[[np.ndarray], np.ndarray]

    def __post_init__(self):
        if min(self.n_states, self.n_controls, self.n_outputs) < 1:
            raise ConfigurationError("plant dimensions must all be at least 1")


@dataclass(frozen=True)
class MismatchSpec:
    """Deliberate plant/controller discrepancies for robustness runs.

    ``output_scaling[i]`` scales output i's contribution to the initial
    state; ``control_perturbation`` names a registered replacement for a
    nominal-control formula (None leaves feedforward exact).
    """

    output_scaling: tuple[float, ...] = (1.0, 1.0)
    control_perturbation: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "output_scaling", tuple(float(s) for s in self.output_scaling))
        for s in self.output_scaling:
            if not (math.isfinite(s) and s > 0.0):
                raise ConfigurationError(f"initial scaling factors must be positive, got {s}")


@dataclass
class SimState:
    """Integrator state: current time, state vector, last applied control."""

    t: float
    x: np.ndarray
    u: np.ndarray | None = None


def rk4_step(
    model: PlantModel, t: float, x: np.ndarray, u: np.ndarray, h: float
) -> np.ndarray:
    """One classical Runge-Kutta step of length ``h`` with ``u`` held constant.

    The same ``u`` array is passed to all four stage evaluations (zero-order
    hold).  A non-finite result raises :class:`DivergenceError` naming ``t``.
    """
    if h <= 0.0:
        raise ConfigurationError(f"integrator step must be positive, got h={h}")
    f = model.f
    half = 0.5 * h
    k1 = f(t, x, u)
    k2 = f(t + half, x + half * k1, u)
    k3 = f(t + half, x + half * k2, u)
    k4 = f(t + h, x + h * k3, u)
    x_new = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(x_new)):
        raise DivergenceError(f"non-finite derivative evaluation near t={t:.6g}")
    return x_new


def example_plant() -> PlantModel:
    """The bundled two-input flat benchmark plant."""

    def f(t, x, u):
        x1, x2, x3, x4 = x
        u1, u2 = u
        return np.array(
            [
                x1 + x1 * x1 * u1,
                x3,
                x4,
                -x4 + x3 + x2 + x1 * u1 * u2,
            ]
        )

    def output(x):
        return np.array([x[0], x[1]])

    return PlantModel(n_states=4, n_controls=2, n_outputs=2, f=f, output=output)


def benchmark_relations(analytic_partials: bool = False) -> tuple[ImplicitFlatRelation, ImplicitFlatRelation]:
    """Implicit input/output relations of the benchmark plant.

    E1(y1', y1, u1) = y1' - y1 - y1^2 u1
    E2(y2''', ..., y2, y1', y1, u2) = y2''' + y2'' - y2' - y2 - y1 u1 u2,
    with u1 eliminated through the first relation (u1 = (y1' - y1)/y1^2).

    With ``analytic_partials`` the relations carry closed-form partials;
    otherwise ``derive_channel`` falls back to finite differences.
    """

    def e1_residual(table, u):
        y1, dy1 = table[0, 0], table[0, 1]
        return dy1 - y1 - y1 * y1 * u

    def e1_partials(table, u):
        y1 = table[0, 0]
        d = np.zeros_like(table)
        d[0, 0] = -1.0 - 2.0 * y1 * u
        d[0, 1] = 1.0
        return d, -y1 * y1

    def e2_residual(table, u):
        y1, dy1 = table[0, 0], table[0, 1]
        u1 = (dy1 - y1) / (y1 * y1)
        return table[1, 3] + table[1, 2] - table[1, 1] - table[1, 0] - y1 * u1 * u

    def e2_partials(table, u):
        y1, dy1 = table[0, 0], table[0, 1]
        d = np.zeros_like(table)
        d[0, 0] = u * dy1 / (y1 * y1)
        d[0, 1] = -u / y1
        d[1, 0] = -1.0
        d[1, 1] = -1.0
        d[1, 2] = 1.0
        d[1, 3] = 1.0
        return d, -(dy1 - y1) / y1

    e1 = ImplicitFlatRelation(
        n_outputs=2,
        orders=(1, 0),
        control_index=0,
        residual=e1_residual,
        partials=e1_partials if analytic_partials else None,
    )
    e2 = ImplicitFlatRelation(
        n_outputs=2,
        orders=(1, 3),
        control_index=1,
        residual=e2_residual,
        partials=e2_partials if analytic_partials else None,
    )
    return e1, e2


def initial_state(
    references: Sequence[ReferenceTrajectory],
    mismatch: MismatchSpec,
    t0: float = 0.0,
) -> np.ndarray:
    """Benchmark initial state seeded from the references at ``t0``.

    The measured outputs start at ``scaling_i * y_i*(t0)``; the hidden chain
    states start on the reference derivatives (x3 = dy2*/dt, x4 = d2y2*/dt2),
    so an unscaled start lies exactly on the reference trajectory.
    """
    y1_ref, y2_ref = references
    s = mismatch.output_scaling
    if len(s) != 2:
        raise ConfigurationError(f"benchmark mismatch needs 2 scaling factors, got {len(s)}")
    return np.array(
        [
            s[0] * y1_ref.eval(t0, 0),
            s[1] * y2_ref.eval(t0, 0),
            y2_ref.eval(t0, 1),
            y2_ref.eval(t0, 2),
        ]
    )
