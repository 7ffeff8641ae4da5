"""Derive per-channel deviation models from the implicit benchmark relations.

Each output of the two-input benchmark satisfies an implicit relation
E(y, dy/dt, ..., u) = 0. Probing that relation with finite differences along
the reference trajectory yields, per channel, the lowest derivative order
that the control actually reaches and the tangent gain alpha(t) in front of
the control deviation. For this plant both admit closed forms, so we can
check the numerics against them.
"""

import numpy as np

from heol.homeostat import derive_channel, nominal_u1, nominal_u2
from heol.plant import benchmark_relations
from heol.signals import make_smoothstep

refs = (
    make_smoothstep(1.0, 2.0, 10.0, 40.0),
    make_smoothstep(1.0, 2.0, 50.0, 80.0),
)
horizon = (0.0, 150.0)
e1, e2 = benchmark_relations()

chan1 = derive_channel(e1, refs, horizon)
print(f"channel 1: derivative order {chan1.order}, regulates output {chan1.output_index + 1}")

u2_star = lambda t: nominal_u2(refs[0], refs[1], t)
chan2 = derive_channel(
    e2, refs, horizon, order_override=2, output_index=1, nominal_control=u2_star
)
print(f"channel 2: derivative order {chan2.order}, regulates output {chan2.output_index + 1}")

print("\ntangent gains vs. their closed forms:")
print(f"{'t':>6} {'alpha1':>12} {'y1*^2':>12} {'alpha2':>12} {'dy1*/y1*-1':>12}")
for t in np.linspace(0.0, 150.0, 7):
    t = float(t)
    a1, a1_closed = chan1.alpha(t), refs[0].eval(t, 0) ** 2
    a2, a2_closed = chan2.alpha(t), refs[0].eval(t, 1) / refs[0].eval(t, 0) - 1.0
    print(f"{t:6.1f} {a1:12.6f} {a1_closed:12.6f} {a2:12.6f} {a2_closed:12.6f}")

print("\nnominal feedforward obtained by inverting the relations on the reference:")
for t in (0.0, 25.0, 65.0, 100.0):
    u1 = nominal_u1(refs[0], t)
    u2 = nominal_u2(refs[0], refs[1], t)
    print(f"  t = {t:5.1f}: u1* = {u1:10.6f}, u2* = {u2:10.6f}")
