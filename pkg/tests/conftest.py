"""Shared scenario builders for the test suite."""

import numpy as np
import pytest

from heol import ChannelSpec, MismatchSpec, Scenario, Timing


def ultralocal_scenario(
    k_p,
    *,
    name="ultralocal-test",
    drift=0.0,
    dy0=0.5,
    duration=4.0,
    order=1,
    k_d=None,
    h=0.01,
    estimator_T=0.3,
    control_mode="closed-loop",
    noise_std=0.0,
    noise_seed=0,
):
    """Scenario wrapping the exact ultra-local plant d^order(y)/dt^order = f + u.

    The reference is constant 1.0 and the initial output is scaled so that
    the run starts with a deviation of ``dy0``.
    """
    return Scenario(
        name=name,
        plant="ultralocal",
        plant_params={"order": order, "f": drift, "gain": 1.0},
        timing=Timing(duration=duration, h=h),
        references=({"type": "constant", "value": 1.0},),
        channels=(
            ChannelSpec(
                output=0,
                order=order,
                alpha_source="constant",
                alpha_value=1.0,
                estimator_T=estimator_T,
                k_p=k_p,
                k_d=k_d,
                nominal="zero",
            ),
        ),
        mismatch=MismatchSpec(output_scaling=(1.0 + dy0,)),
        control_mode=control_mode,
        noise_std=noise_std,
        noise_seed=noise_seed,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20260825)
