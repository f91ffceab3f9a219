"""Sweep harness tests: determinism, aggregation, and artifacts."""

import pytest

from skybridge.association import Direction
from skybridge.errors import IoFailure
from skybridge.harness import (RunOverrides, SweepResult, SweepSpec,
                               SweptParameter, emit_csv, emit_plot, run_point,
                               run_sweep)
from skybridge.placement import PlacementParams
from skybridge.scenario import Mode, build_scenario, paper_config


def _small_spec(placement=False):
    return SweepSpec(
        swept_parameter=SweptParameter.USER_TX_POWER,
        values_dbm=(10.0, 30.0, 50.0),
        modes=(Mode.INTEGRATED,),
        backhaul_bandwidth_cases_hz=(20e6, 2e9),
        direction=Direction.UPLINK,
        replications=2,
        base_seed=1,
        optimize_placement=placement,
        placement=PlacementParams(initial_radius_m=30_000.0,
                                  candidates_per_round=2,
                                  min_radius_m=10_000.0, max_rounds=1),
    )


def test_spec_validation():
    with pytest.raises(ValueError):
        _small_spec().__class__(
            swept_parameter=SweptParameter.USER_TX_POWER, values_dbm=(),
            modes=(Mode.INTEGRATED,), backhaul_bandwidth_cases_hz=(20e6,),
            direction=Direction.UPLINK)
    with pytest.raises(ValueError):
        _small_spec().__class__(
            swept_parameter=SweptParameter.USER_TX_POWER,
            values_dbm=(30.0, 10.0), modes=(Mode.INTEGRATED,),
            backhaul_bandwidth_cases_hz=(20e6,), direction=Direction.UPLINK)


def test_run_point_overrides_power():
    sc = build_scenario(paper_config(num_users=30, seed=1))
    low = run_point(sc, Direction.UPLINK, Mode.INTEGRATED,
                    RunOverrides(user_tx_power_dbm=0.0))
    high = run_point(sc, Direction.UPLINK, Mode.INTEGRATED,
                     RunOverrides(user_tx_power_dbm=40.0))
    assert high.mean_rate_bps > low.mean_rate_bps


def test_rows_ordered_and_complete():
    spec = _small_spec()
    result = run_sweep(spec, paper_config(num_users=25))
    keys = [(r.mode, r.backhaul_hz, r.swept_dbm) for r in result.rows]
    expected = [(m, c, v) for m in spec.modes
                for c in spec.backhaul_bandwidth_cases_hz
                for v in spec.values_dbm]
    assert keys == expected


def test_mean_is_replication_average():
    spec = _small_spec()
    result = run_sweep(spec, paper_config(num_users=25), keep_results=True)
    row = result.rows[0]
    reps = [result.point_results[(row.mode, row.backhaul_hz, row.swept_dbm, r)]
            for r in range(spec.replications)]
    assert row.mean_rate_bps == pytest.approx(
        sum(p.mean_rate_bps for p in reps) / len(reps), rel=1e-12)


def test_thread_count_does_not_change_rows(tmp_path):
    spec = _small_spec(placement=True)
    cfg = paper_config(num_users=25)
    serial = run_sweep(spec, cfg, max_workers=1)
    threaded = run_sweep(spec, cfg, max_workers=4)
    assert serial.rows == threaded.rows
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    emit_csv(serial, a)
    emit_csv(threaded, b)
    assert a.read_bytes() == b.read_bytes()


def test_csv_round_trips_floats(tmp_path):
    spec = _small_spec()
    result = run_sweep(spec, paper_config(num_users=20))
    path = tmp_path / "out.csv"
    emit_csv(result, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "mode,backhaul_hz,swept_dbm,mean_rate_bps,min_rate_bps,utility"
    assert len(lines) == 1 + len(result.rows)
    for line, row in zip(lines[1:], result.rows):
        fields = line.split(",")
        assert fields[0] == row.mode.value
        assert float(fields[3]) == row.mean_rate_bps  # repr round-trip exact


def test_emit_rejects_empty():
    empty = SweepResult(spec=_small_spec(), rows=())
    with pytest.raises(IoFailure):
        emit_csv(empty, "/tmp/never-written.csv")
    with pytest.raises(IoFailure):
        emit_plot(empty, "/tmp/never-written.svg")


def test_plot_artifact(tmp_path):
    spec = _small_spec()
    result = run_sweep(spec, paper_config(num_users=20))
    path = tmp_path / "curves.svg"
    emit_plot(result, path)
    body = path.read_text()
    assert body.startswith("<?xml")
    assert "Integrated" in body
