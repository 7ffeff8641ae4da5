"""Build smooth reference trajectories and inspect their derivatives.

A reference here is a piecewise-polynomial function of time that the
controller can query for values *and* derivatives. The smoothstep factory
joins a degree-7 polynomial to constant plateaus so that derivatives up to
order 3 are continuous — which matters because the second benchmark channel
differentiates its reference three times.
"""

import numpy as np

from heol.signals import make_constant, make_smoothstep

step = make_smoothstep(1.0, 2.0, 10.0, 40.0)
flat = make_constant(1.0)

print("smoothstep 1 -> 2 over [10, 40]")
print(f"{'t':>6} {'y*':>10} {'dy*':>12} {'d2y*':>12} {'d3y*':>12}")
for t in (5.0, 10.0, 17.5, 25.0, 32.5, 40.0, 60.0):
    row = [step.eval(t, k) for k in range(4)]
    print(f"{t:6.1f} {row[0]:10.6f} {row[1]:12.3e} {row[2]:12.3e} {row[3]:12.3e}")

# the transition midpoint sits halfway between the plateaus
mid = step.eval(25.0, 0)
print(f"\nmidpoint value: {mid} (off (1 + 2) / 2 by {abs(mid - 1.5):.1e})")

# derivatives vanish where the polynomial meets the plateaus
for t in (10.0, 40.0):
    derivs = [step.eval(t, k) for k in (1, 2, 3)]
    print(f"derivatives at t = {t}: {derivs} (all exactly zero)")

# constants report zero for every derivative order
print(f"\nconstant reference: y*(3) = {flat.eval(3.0, 0)}, dy*(3) = {flat.eval(3.0, 1)}")

# a dense sample, useful as a sanity plot if you pipe it into your plotter
ts = np.linspace(0.0, 50.0, 11)
print("\nt, y* samples:", ", ".join(f"({t:.0f}, {step.eval(float(t), 0):.4f})" for t in ts))
