"""What goes wrong when two channels regulate the same output.

Scenario validation rejects duplicate channel outputs by default, because a
square system needs every output regulated. Setting `allow_shared_outputs`
opts into the literal configuration anyway — here both channels point at the
first output, the second output's unstable chain is left to itself, and the
trust-region guard aborts the run once the state blows up.
"""

import dataclasses

from heol.errors import ConfigurationError, DivergenceError
from heol.scenarios import builtin_scenario, run_scenario, validate_scenario

base = builtin_scenario("paper-sec4")
shared_channels = (
    base.channels[0],
    dataclasses.replace(base.channels[1], output=0),
)

strict = dataclasses.replace(base, name="shared-strict", channels=shared_channels)
try:
    validate_scenario(strict)
except ConfigurationError as exc:
    print(f"default validation refuses it:\n  {exc}")

literal = dataclasses.replace(
    base, name="shared-literal", channels=shared_channels, allow_shared_outputs=True
)
validate_scenario(literal)
print("\nwith allow_shared_outputs the scenario validates; running it...")
try:
    run_scenario(literal)
except DivergenceError as exc:
    print(f"  {exc}")
