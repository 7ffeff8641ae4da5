"""Scenario configuration, the simulation loop, metrics, and exports."""

import dataclasses
import json
from pathlib import Path

import numpy as np
import pytest

from heol.errors import (
    ConfigurationError,
    DivergenceError,
    EmptyLogError,
    FlatnessSingularityError,
)
from heol.plant import MismatchSpec
from heol.scenarios import (
    ChannelSpec,
    Scenario,
    SimLog,
    Timing,
    builtin_names,
    builtin_scenario,
    compute_metrics,
    csv_header,
    export_csv,
    export_metrics,
    load_scenario,
    run_scenario,
    scenario_from_dict,
    scenario_to_dict,
    validate_scenario,
)
from heol.signals import TimeGrid

from conftest import ultralocal_scenario

REPO = Path(__file__).resolve().parents[1]


def make_log(dy_column):
    """Synthetic single-channel SimLog with the given deviation column."""
    dy = np.asarray(dy_column, dtype=float).reshape(-1, 1)
    n = len(dy)
    grid = TimeGrid(0.0, 0.01, max(n - 1, 1))
    y_ref = np.ones((n, 1))
    zeros = np.zeros((n, 1))
    return SimLog(
        scenario_name="synthetic",
        grid=grid,
        channel_outputs=(0,),
        channel_T=(0.3,),
        t=grid.times()[:n],
        y=y_ref + dy,
        y_ref=y_ref,
        u=zeros.copy(),
        u_nom=zeros.copy(),
        dy=dy,
        du=zeros.copy(),
        f_est=zeros.copy(),
        f_valid=np.zeros((n, 1), dtype=bool),
        clamped=np.zeros((n, 1), dtype=bool),
    )


# ------------------------------------------------------------- configuration


def test_timing_grid_requires_integer_step_count():
    assert Timing(duration=1.5, h=0.01).grid().n_steps == 150
    with pytest.raises(ConfigurationError):
        Timing(duration=1.0, h=0.3).grid()
    with pytest.raises(ConfigurationError):
        Timing(duration=-1.0, h=0.01)
    with pytest.raises(ConfigurationError):
        Timing(duration=1.0, h=0.01, substeps=0)


def test_channel_spec_requires_exactly_one_gain_source():
    with pytest.raises(ConfigurationError):
        ChannelSpec(output=0, order=1, k_p=1.0, pole=-1.0)
    with pytest.raises(ConfigurationError):
        ChannelSpec(output=0, order=1)  # neither gains nor pole


def test_channel_spec_alpha_source_validation():
    with pytest.raises(ConfigurationError):
        ChannelSpec(output=0, order=1, k_p=1.0, alpha_source="formula")  # no tag
    with pytest.raises(ConfigurationError):
        ChannelSpec(output=0, order=1, k_p=1.0, alpha_source="constant")  # no value
    with pytest.raises(ConfigurationError):
        ChannelSpec(output=0, order=1, k_p=1.0, alpha_source="magic")
    with pytest.raises(ConfigurationError):
        ChannelSpec(output=0, k_p=1.0, alpha_source="constant", alpha_value=1.0)  # no order
    with pytest.raises(ConfigurationError):
        ChannelSpec(output=0, order=1, pole=-1.0, pole_multiplicity=3)


def test_scenario_field_validation():
    base = ultralocal_scenario(1.0)
    with pytest.raises(ConfigurationError):
        dataclasses.replace(base, control_mode="open")
    with pytest.raises(ConfigurationError):
        dataclasses.replace(base, noise_std=-0.1)
    with pytest.raises(ConfigurationError):
        dataclasses.replace(base, rms_fraction=0.0)


def test_validate_scenario_checks_structure():
    base = ultralocal_scenario(1.0)
    validate_scenario(base)

    with pytest.raises(ConfigurationError):
        validate_scenario(dataclasses.replace(base, plant="no-such-plant"))

    two_channels = dataclasses.replace(base, channels=base.channels * 2)
    with pytest.raises(ConfigurationError) as err:
        validate_scenario(two_channels)
    assert "1" in str(err.value) and "2" in str(err.value)  # p = m rule, both counts

    bad_output = dataclasses.replace(
        base, channels=(dataclasses.replace(base.channels[0], output=3),)
    )
    with pytest.raises(ConfigurationError):
        validate_scenario(bad_output)


def test_validate_scenario_checks_registry_tags():
    base = builtin_scenario("paper-sec4")
    bad_alpha = dataclasses.replace(
        base,
        channels=(
            dataclasses.replace(base.channels[0], alpha_tag="no-such-formula"),
            base.channels[1],
        ),
    )
    with pytest.raises(ConfigurationError):
        validate_scenario(bad_alpha)

    bad_nominal = dataclasses.replace(
        base,
        channels=(dataclasses.replace(base.channels[0], nominal="no-such-ff"), base.channels[1]),
    )
    with pytest.raises(ConfigurationError):
        validate_scenario(bad_nominal)

    bad_perturb = dataclasses.replace(
        base, mismatch=MismatchSpec(output_scaling=(1.1, 1.0), control_perturbation="nope")
    )
    with pytest.raises(ConfigurationError):
        validate_scenario(bad_perturb)


def test_shared_outputs_need_explicit_opt_in():
    base = builtin_scenario("paper-sec4")
    ch = (base.channels[0], dataclasses.replace(base.channels[1], output=0))
    shared = dataclasses.replace(base, channels=ch)
    with pytest.raises(ConfigurationError):
        validate_scenario(shared)
    validate_scenario(dataclasses.replace(shared, allow_shared_outputs=True))


def test_builtin_registry():
    names = builtin_names()
    assert "paper-sec4" in names
    assert "paper-sec4-nominal" in names
    for name in names:
        validate_scenario(builtin_scenario(name))
    with pytest.raises(ConfigurationError):
        builtin_scenario("no-such-scenario")


# -------------------------------------------------------------- simulation


def test_run_produces_one_record_per_grid_point():
    log = run_scenario(ultralocal_scenario(1.0, duration=2.0))
    assert len(log.t) == 201
    assert log.y.shape == (201, 1)
    assert log.u.shape == (201, 1)
    assert np.all(np.diff(log.t) > 0)
    assert log.t[0] == 0.0 and log.t[-1] == pytest.approx(2.0, abs=1e-12)


def test_closed_loop_absorbs_initial_deviation():
    log = run_scenario(ultralocal_scenario(2.0, dy0=0.5, drift=1.0, duration=6.0))
    assert abs(log.dy[0, 0]) == pytest.approx(0.5, abs=1e-12)
    assert np.max(np.abs(log.dy[-50:, 0])) < 1e-3


def test_runs_are_bit_deterministic():
    s = ultralocal_scenario(1.0, duration=3.0)
    a, b = run_scenario(s), run_scenario(s)
    for name in ("t", "y", "y_ref", "u", "u_nom", "dy", "du", "f_est", "f_valid", "clamped"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))


def test_prefix_truncation_reproduces_log_prefix():
    s_full = ultralocal_scenario(1.0, duration=6.0, drift=2.0)
    s_half = dataclasses.replace(s_full, timing=Timing(duration=3.0, h=0.01))
    full, half = run_scenario(s_full), run_scenario(s_half)
    n = len(half.t)
    for name in ("t", "y", "u", "dy", "du", "f_est"):
        np.testing.assert_array_equal(getattr(full, name)[:n], getattr(half, name))


def test_noise_is_seeded_and_reproducible():
    s = ultralocal_scenario(1.0, duration=2.0, noise_std=1e-3, noise_seed=42)
    a, b = run_scenario(s), run_scenario(s)
    np.testing.assert_array_equal(a.y, b.y)

    other = dataclasses.replace(s, noise_seed=43)
    assert not np.array_equal(run_scenario(other).y, a.y)

    # noise draws are consumed per record, so prefixes still reproduce
    half = dataclasses.replace(s, timing=Timing(duration=1.0, h=0.01))
    np.testing.assert_array_equal(run_scenario(half).y, a.y[:101])


def test_substep_refinement_changes_little_on_smooth_dynamics():
    coarse = run_scenario(ultralocal_scenario(1.0, duration=2.0, drift=1.0))
    fine = run_scenario(
        dataclasses.replace(
            ultralocal_scenario(1.0, duration=2.0, drift=1.0),
            timing=Timing(duration=2.0, h=0.01, substeps=4),
        )
    )
    assert np.max(np.abs(coarse.y - fine.y)) < 1e-8


def test_zero_mismatch_benchmark_tracks_to_integration_error():
    base = builtin_scenario("paper-sec4")
    clean = dataclasses.replace(
        base,
        name="paper-sec4-clean",
        mismatch=MismatchSpec(output_scaling=(1.0, 1.0), control_perturbation=None),
    )
    log = run_scenario(clean)
    assert np.max(np.abs(log.dy)) <= 1e-4


def test_reference_crossing_zero_names_channel_and_time():
    base = builtin_scenario("paper-sec4")
    crossing = dataclasses.replace(
        base,
        name="crossing",
        timing=Timing(duration=5.0, h=0.01),
        references=(
            {"type": "smoothstep", "from": 1.0, "to": -1.0, "t_start": 1.0, "t_end": 3.0},
            {"type": "constant", "value": 1.0},
        ),
        mismatch=MismatchSpec(output_scaling=(1.0, 1.0), control_perturbation=None),
    )
    with pytest.raises(FlatnessSingularityError) as err:
        run_scenario(crossing)
    msg = str(err.value)
    assert msg.startswith("channel 1 at t=2")


def test_literal_shared_output_reading_diverges():
    # Pointing both channels at the first output leaves the unstable second
    # chain unregulated; the trust-region guard must catch the blow-up.
    base = builtin_scenario("paper-sec4")
    ch = (base.channels[0], dataclasses.replace(base.channels[1], output=0))
    literal = dataclasses.replace(
        base, name="literal-reading", channels=ch, allow_shared_outputs=True
    )
    with pytest.raises(DivergenceError) as err:
        run_scenario(literal)
    assert "trust region" in str(err.value)


# ------------------------------------------------------------------ metrics


def test_metrics_of_zero_deviation():
    m = compute_metrics(make_log(np.zeros(100)))
    assert m.rms_tail_dy == (0.0,)
    assert m.max_abs_dy == (0.0,)


def test_metrics_of_constant_deviation():
    m = compute_metrics(make_log(np.full(10, 2.0)))
    assert m.rms_tail_dy[0] == pytest.approx(2.0, abs=1e-15)
    assert m.max_abs_dy[0] == 2.0


def test_metrics_tail_spike():
    dy = np.zeros(500)
    dy[-1] = 3.0
    m = compute_metrics(make_log(dy))
    assert m.tail_records == 100
    assert m.rms_tail_dy[0] == pytest.approx(0.3, abs=1e-12)
    assert m.max_abs_dy[0] == 3.0


def test_metrics_reject_empty_log():
    with pytest.raises(EmptyLogError):
        compute_metrics(make_log(np.zeros(0)))


# ------------------------------------------------------------------- export


def test_csv_header_column_order():
    assert csv_header(2, 2) == [
        "t",
        "y1", "y1_ref", "y2", "y2_ref",
        "u1", "u1_nom", "u2", "u2_nom",
        "dy1", "dy2", "du1", "du2",
        "F1_est", "F2_est",
        "F1_valid", "F2_valid",
        "clamp1", "clamp2",
    ]


def test_csv_empty_log_writes_header_only(tmp_path):
    path = export_csv(make_log(np.zeros(0)), tmp_path / "empty.csv")
    lines = path.read_text().splitlines()
    assert lines == [",".join(csv_header(1, 1))]


def test_csv_single_record_is_two_lines(tmp_path):
    path = export_csv(make_log([0.25]), tmp_path / "one.csv")
    assert len(path.read_text().splitlines()) == 2


def test_csv_round_trips_at_full_precision(tmp_path):
    log = run_scenario(ultralocal_scenario(1.0, duration=1.0, drift=0.3))
    path = export_csv(log, tmp_path / "run.csv")
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    n_float = 1 + 4 + 2  # t, y/y_ref/u/u_nom, dy/du ... then f_est, then flags
    for row_text in lines[1:]:
        row = row_text.split(",")
        assert len(row) == len(header)
        for tok in row[:-2]:  # all but the boolean flags
            assert format(float(tok), ".17g") == tok
        assert row[-2] in ("0", "1") and row[-1] in ("0", "1")
    # spot-check a value against the in-memory log
    k = len(lines) // 2
    assert float(lines[k].split(",")[1]) == log.y[k - 1, 0]


def test_metrics_file_is_flat_key_value_text(tmp_path):
    log = run_scenario(ultralocal_scenario(1.0, duration=1.0))
    path = export_metrics(compute_metrics(log), tmp_path / "m.txt")
    text = path.read_text()
    for key in ("n_records", "rms_tail_dy1", "max_abs_dy1", "max_abs_du1", "warmup_T1"):
        assert f"{key} = " in text


# ------------------------------------------------------------ serialisation


def test_builtin_scenarios_round_trip_through_dict():
    for name in builtin_names():
        s = builtin_scenario(name)
        assert scenario_from_dict(scenario_to_dict(s)) == s


def test_comment_keys_are_ignored():
    d = scenario_to_dict(builtin_scenario("paper-sec4"))
    d["# purpose"] = "regression workload"
    d["timing"]["# note"] = "matches the published run"
    d["channels"][0]["# why"] = "first output, first-order model"
    assert scenario_from_dict(d) == builtin_scenario("paper-sec4")


def test_missing_and_malformed_keys_are_configuration_errors():
    good = scenario_to_dict(builtin_scenario("paper-sec4"))
    for key in ("name", "plant", "timing", "references", "channels"):
        bad = {k: v for k, v in good.items() if k != key}
        with pytest.raises(ConfigurationError):
            scenario_from_dict(bad)
    mangled = json.loads(json.dumps(good))
    mangled["timing"]["duration"] = "hundred and fifty"
    with pytest.raises(ConfigurationError):
        scenario_from_dict(mangled)


def test_load_scenario_from_file(tmp_path):
    s = ultralocal_scenario(1.0)
    path = tmp_path / "s.json"
    path.write_text(json.dumps(scenario_to_dict(s)))
    assert load_scenario(path) == s

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigurationError):
        load_scenario(bad)

    arr = tmp_path / "arr.json"
    arr.write_text("[1, 2]")
    with pytest.raises(ConfigurationError):
        load_scenario(arr)

    with pytest.raises(ConfigurationError):
        load_scenario(tmp_path / "missing.json")


def test_shipped_example_config_matches_builtin():
    shipped = load_scenario(REPO / "demos" / "paper_sec4.json")
    assert shipped == builtin_scenario("paper-sec4")
