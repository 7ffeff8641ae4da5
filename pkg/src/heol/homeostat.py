"""Ultra-local channel models derived from implicit input/output relations.

A flat system's input/output behaviour around a reference trajectory is
summarised per control channel by a *homeostat*:

    d^order(Dy)/dt^order = F(t) + alpha(t) * Du

where ``Dy`` and ``Du`` are deviations from the reference, ``F`` lumps every
neglected effect, and ``alpha`` is the tangent gain read off the implicit
relation E(y, dy/dt, ..., u) = 0:

    order = smallest derivative order of the regulated output on which E
            actually depends along the reference,
    alpha = - (dE/du) / (dE/dy^(order))   evaluated on the reference.

``derive_channel`` automates both steps with analytic partials when the
relation provides them and central finite differences otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    DegenerateRelationError,
    FlatnessSingularityError,
    IntervalError,
    SingularChannelError,
)
from .signals import ReferenceTrajectory

__all__ = [
    "ImplicitFlatRelation",
    "HomeostatChannel",
    "FlatIoProfile",
    "build_reference_table",
    "finite_diff_partial",
    "derive_channel",
    "nominal_u1",
    "nominal_u2",
    "perturbed_nominal_u2",
    "validate_flat_io",
]

#: magnitudes below this count as zero when probing partials and gains
ZERO_THRESHOLD = 1e-9


@dataclass(frozen=True)
class FlatIoProfile:
    """Counts of flat outputs and controls; the library assumes square systems."""

    n_outputs: int
    n_controls: int


def validate_flat_io(profile: FlatIoProfile) -> None:
    """Enforce the square-system assumption (one channel per control)."""
    if profile.n_outputs != profile.n_controls:
        raise ConfigurationError(
            f"need as many flat outputs as controls: got {profile.n_outputs} outputs "
            f"vs {profile.n_controls} controls"
        )
    if profile.n_outputs < 1:
        raise ConfigurationError("need at least one output/control pair")


@dataclass(frozen=True)
class ImplicitFlatRelation:
    """One scalar relation E(y-derivatives, u_j) = 0 tying outputs to control j.

    Parameters
    ----------
    n_outputs : int
        Number of flat outputs the derivative table carries.
    orders : tuple of int
        Highest derivative of each output that ``residual`` reads.
    control_index : int
        Which control enters this relation.
    residual : callable(table, u) -> float
        ``table[l][k]`` is the k-th derivative of output l.
    partials : callable(table, u) -> (d_table, d_u), optional
        Analytic partial derivatives matching ``residual``; finite
        differences are used when absent.
    """

    n_outputs: int
    orders: tuple[int, ...]
    control_index: int
    residual: Callable[[np.ndarray, float], float]
    partials: Callable[[np.ndarray, float], tuple[np.ndarray, float]] | None = None

    def __post_init__(self):
        if self.n_outputs < 1:
            raise ConfigurationError("relation needs at least one output")
        if len(self.orders) != self.n_outputs:
            raise ConfigurationError(
                f"orders has {len(self.orders)} entries for {self.n_outputs} outputs"
            )
        if any(o < 0 for o in self.orders):
            raise ConfigurationError("derivative orders must be non-negative")
        if not 0 <= self.control_index < self.n_outputs:
            raise ConfigurationError(
                f"control index {self.control_index} out of range for {self.n_outputs} channels"
            )

    @property
    def table_shape(self) -> tuple[int, int]:
        return self.n_outputs, max(self.orders) + 1


@dataclass(frozen=True)
class HomeostatChannel:
    """Derived ultra-local model of one control channel.

    ``alpha(t)`` is guaranteed finite and nonzero at the probe times used
    during derivation; it re-checks at every evaluation.
    """

    output_index: int
    order: int
    alpha: Callable[[float], float]
    references: tuple[ReferenceTrajectory, ...]


def build_reference_table(
    references: Sequence[ReferenceTrajectory], t: float, orders: Sequence[int]
) -> np.ndarray:
    """Derivative table of the references at time ``t``.

    Entry ``[l, k]`` holds the k-th derivative of reference l for
    ``k <= orders[l]``; unused entries stay zero.
    """
    table = np.zeros((len(references), max(orders) + 1))
    for l, ref in enumerate(references):
        for k in range(orders[l] + 1):
            table[l, k] = ref.eval(t, k)
    return table


def finite_diff_partial(
    relation: ImplicitFlatRelation,
    which: str | tuple[int, int],
    table: np.ndarray,
    u: float,
    step: float | None = None,
) -> float:
    """Central-difference partial of the residual at ``(table, u)``.

    ``which`` is ``"u"`` for the control slot or a pair ``(output, order)``
    for a derivative-table slot.  The default step is
    ``max(1e-6, 1e-6 * |x|)`` around the current coordinate value ``x``.
    """
    if which == "u":
        x = u
        d = step if step is not None else max(1e-6, 1e-6 * abs(x))
        return (relation.residual(table, x + d) - relation.residual(table, x - d)) / (2.0 * d)
    l, k = which
    if not (0 <= l < relation.n_outputs and 0 <= k <= relation.orders[l]):
        raise ConfigurationError(
            f"partial ({l}, {k}) outside the relation's table of orders {relation.orders}"
        )
    x = table[l, k]
    d = step if step is not None else max(1e-6, 1e-6 * abs(x))
    hi = table.copy()
    lo = table.copy()
    hi[l, k] = x + d
    lo[l, k] = x - d
    return (relation.residual(hi, u) - relation.residual(lo, u)) / (2.0 * d)


def _partial(relation, which, table, u):
    if relation.partials is not None:
        d_table, d_u = relation.partials(table, u)
        if which == "u":
            return float(d_u)
        l, k = which
        return float(np.asarray(d_table)[l, k])
    return finite_diff_partial(relation, which, table, u)


def derive_channel(
    relation: ImplicitFlatRelation,
    references: Sequence[ReferenceTrajectory],
    horizon: tuple[float, float],
    order_override: int | None = None,
    output_index: int | None = None,
    nominal_control: Callable[[float], float] | None = None,
    n_probe: int = 32,
) -> HomeostatChannel:
    """Derive the homeostat order and gain of one channel along a reference.

    The regulated output defaults to the output sharing the relation's
    control index.  ``order_override`` pins the model order instead of using
    the smallest derivative the relation depends on; ``nominal_control``
    supplies the u value at which partials are evaluated (0 when omitted,
    which is exact for relations affine in u).

    Raises
    ------
    DegenerateRelationError
        if no output derivative up to the relation's declared order matters.
    SingularChannelError
        if ``dE/dy^(order)`` vanishes or alpha is (numerically) zero at a
        probe time, naming that time.
    """
    t_lo, t_hi = horizon
    if not t_hi > t_lo:
        raise IntervalError(f"horizon needs t_hi > t_lo, got [{t_lo}, {t_hi}]")
    if len(references) != relation.n_outputs:
        raise ConfigurationError(
            f"relation expects {relation.n_outputs} references, got {len(references)}"
        )
    out = relation.control_index if output_index is None else output_index
    if not 0 <= out < relation.n_outputs:
        raise ConfigurationError(f"output index {out} out of range")

    refs = tuple(references)
    u_of_t = nominal_control if nominal_control is not None else (lambda t: 0.0)
    probes = np.linspace(t_lo, t_hi, max(int(n_probe), 32))
    tables = [build_reference_table(refs, t, relation.orders) for t in probes]
    u_vals = [u_of_t(t) for t in probes]

    if order_override is not None:
        if not 1 <= order_override <= relation.orders[out]:
            raise ConfigurationError(
                f"order override {order_override} outside 1..{relation.orders[out]} "
                f"for output {out}"
            )
        order = order_override
    else:
        order = 0
        for k in range(1, relation.orders[out] + 1):
            mags = [abs(_partial(relation, (out, k), tb, uv)) for tb, uv in zip(tables, u_vals)]
            if max(mags) > ZERO_THRESHOLD:
                order = k
                break
        if order == 0:
            raise DegenerateRelationError(
                f"residual does not depend on any derivative of output {out} "
                f"up to order {relation.orders[out]} along the reference"
            )

    def alpha(t: float) -> float:
        table = build_reference_table(refs, t, relation.orders)
        u = u_of_t(t)
        den = _partial(relation, (out, order), table, u)
        if abs(den) <= ZERO_THRESHOLD:
            raise SingularChannelError(
                f"dE/dy{out + 1}^({order}) vanishes at t={t:.6g}; channel degenerated there"
            )
        a = -_partial(relation, "u", table, u) / den
        if abs(a) <= ZERO_THRESHOLD:
            raise SingularChannelError(
                f"channel gain alpha is zero at t={t:.6g}; control does not act there"
            )
        return a

    for t in probes:  # fail at derivation time, naming the first bad instant
        alpha(float(t))

    return HomeostatChannel(output_index=out, order=order, alpha=alpha, references=refs)


def nominal_u1(y1_ref: ReferenceTrajectory, t: float) -> float:
    """Feedforward control of the benchmark's first channel.

    Inverts  dy1/dt = y1 + y1^2 u1  along the reference:
    ``u1 = (dy1*/dt - y1*) / y1*^2``.  Degenerates where y1* crosses zero.
    """
    y1 = y1_ref.eval(t, 0)
    if abs(y1) <= ZERO_THRESHOLD:
        raise FlatnessSingularityError(
            f"y1* = {y1!r} at t={t:.6g}: first-channel inversion degenerates at y1 = 0"
        )
    return (y1_ref.eval(t, 1) - y1) / (y1 * y1)


def nominal_u2(y1_ref: ReferenceTrajectory, y2_ref: ReferenceTrajectory, t: float) -> float:
    """Feedforward control of the benchmark's second channel.

    Inverts  y2''' + y2'' - y2' - y2 = y1 u1 u2  along the references; needs
    the third derivative of y2* and degenerates where ``y1* u1*`` vanishes
    (i.e. where dy1*/dt = y1*).
    """
    beta = y1_ref.eval(t, 0) * nominal_u1(y1_ref, t)
    if abs(beta) <= ZERO_THRESHOLD:
        raise FlatnessSingularityError(
            f"y1*·u1* = {beta!r} at t={t:.6g}: second-channel inversion degenerates there"
        )
    num = y2_ref.eval(t, 3) + y2_ref.eval(t, 2) - y2_ref.eval(t, 1) - y2_ref.eval(t, 0)
    return num / beta


def perturbed_nominal_u2(y1_ref: ReferenceTrajectory, y2_ref: ReferenceTrajectory, t: float) -> float:
    """Deliberately mis-weighted variant of :func:`nominal_u2`.

    The first- and zeroth-order reference terms carry coefficients 1.1 and
    0.9 instead of 1, modelling a plant/controller coefficient mismatch the
    closed loop has to absorb.
    """
    beta = y1_ref.eval(t, 0) * nominal_u1(y1_ref, t)
    if abs(beta) <= ZERO_THRESHOLD:
        raise FlatnessSingularityError(
            f"y1*·u1* = {beta!r} at t={t:.6g}: second-channel inversion degenerates there"
        )
    num = (
        y2_ref.eval(t, 3)
        + y2_ref.eval(t, 2)
        - 1.1 * y2_ref.eval(t, 1)
        - 0.9 * y2_ref.eval(t, 0)
    )
    return num / beta
