"""Scenario construction, validation, and determinism."""

import dataclasses

import pytest

from skybridge.errors import InvalidConfig
from skybridge.scenario import (Mode, NodeKind, SubArea, build_scenario,
                                paper_config, validate)
from conftest import tiny_config, tiny_scenario


def test_paper_layout_counts():
    sc = build_scenario(paper_config(num_users=100, seed=1))
    assert len(sc.users) == 100
    assert len(sc.by_kind(NodeKind.HAP)) == 8
    assert len(sc.by_kind(NodeKind.GROUND_BASE_STATION)) == 30
    assert len(sc.by_kind(NodeKind.TETHERED_BALLOON)) == 30
    assert len(sc.by_kind(NodeKind.SATELLITE)) == 1
    assert len(sc.gateways) == 4
    assert validate(sc) == []


def test_paper_user_fractions():
    cfg = paper_config(num_users=1000, seed=3)
    sc = build_scenario(cfg)
    in_a = sum(1 for u in sc.users
               if 55e3 <= u.position[0] <= 125e3 and u.position[1] <= 70e3)
    in_b = sum(1 for u in sc.users
               if 55e3 <= u.position[0] <= 125e3 and u.position[1] >= 110e3)
    assert in_a == 400
    assert in_b == 300
    assert len(sc.users) - in_a - in_b == 300


def test_city_infrastructure_confined_to_first_subarea():
    sc = build_scenario(paper_config(seed=2))
    for kind in (NodeKind.GROUND_BASE_STATION, NodeKind.TETHERED_BALLOON):
        for s in sc.by_kind(kind):
            x, y, _ = s.position
            assert 55e3 <= x <= 125e3 and 0 <= y <= 70e3


def test_altitude_bands():
    sc = tiny_scenario()
    tb = sc.by_kind(NodeKind.TETHERED_BALLOON)[0]
    hap = sc.by_kind(NodeKind.HAP)[0]
    assert 0 < tb.position[2] < hap.position[2] < sc.satellite.position[2]


def test_only_tbs_carry_batteries():
    sc = tiny_scenario(gbs=2, tb=2)
    for s in sc.stations:
        if s.kind == NodeKind.TETHERED_BALLOON:
            assert s.battery is not None
            assert s.battery.level_j == s.battery.capacity_j
        else:
            assert s.battery is None


def test_ids_unique_across_stations_and_gateways():
    sc = build_scenario(paper_config(seed=1))
    ids = [s.id for s in sc.stations] + [g.id for g in sc.gateways]
    assert len(ids) == len(set(ids))


def test_same_seed_same_scenario():
    a = build_scenario(paper_config(num_users=50, seed=9))
    b = build_scenario(paper_config(num_users=50, seed=9))
    assert a.users == b.users
    assert a.stations == b.stations
    assert a.gateways == b.gateways


def test_different_seed_moves_users():
    a = build_scenario(paper_config(num_users=50, seed=1))
    b = build_scenario(paper_config(num_users=50, seed=2))
    assert a.users != b.users


def test_gateways_on_boundary():
    cfg = paper_config()
    sc = build_scenario(cfg)
    w, h = cfg.area_size
    for g in sc.gateways:
        x, y = g.position
        assert x in (0.0, w) or y in (0.0, h)


def test_fractions_must_sum_to_one():
    cfg = tiny_config()
    bad = dataclasses.replace(
        cfg, subareas=(dataclasses.replace(cfg.subareas[0], user_fraction=0.7),))
    with pytest.raises(InvalidConfig):
        build_scenario(bad)


def test_subarea_outside_area_rejected():
    cfg = tiny_config(area_m=1000.0)
    bad = dataclasses.replace(
        cfg, subareas=(SubArea((0.0, 2000.0, 0.0, 1000.0), 1.0, 0, 0),))
    with pytest.raises(InvalidConfig) as e:
        build_scenario(bad)
    assert "subareas[0].bounds" in str(e.value)


def test_validate_flags_tampering():
    sc = tiny_scenario()
    tb = sc.by_kind(NodeKind.TETHERED_BALLOON)[0]
    moved = sc.with_station_position(tb.id, (1e6, 1e6, -5.0))
    rules = {v.rule for v in validate(moved)}
    assert "OutOfBounds" in rules
    assert "NonPositiveAltitude" in rules


def test_validate_flags_missing_battery():
    sc = tiny_scenario()
    stations = tuple(
        dataclasses.replace(s, battery=None)
        if s.kind == NodeKind.TETHERED_BALLOON else s
        for s in sc.stations)
    broken = dataclasses.replace(sc, stations=stations)
    assert any(v.rule == "MissingBattery" for v in validate(broken))


def test_with_station_power_rewrites_one_kind():
    sc = tiny_scenario(haps=2)
    out = sc.with_station_power(NodeKind.HAP, 10.0)
    for s in out.stations:
        if s.kind == NodeKind.HAP:
            assert s.peak_tx_power_dbm == 10.0
        else:
            assert s.peak_tx_power_dbm == sc.station(s.id).peak_tx_power_dbm


def test_with_user_power():
    sc = tiny_scenario(num_users=3)
    out = sc.with_user_power(5.0)
    assert all(u.peak_tx_power_dbm == 5.0 for u in out.users)
    assert all(u.peak_tx_power_dbm == 20.0 for u in sc.users)


def test_mode_values_round_trip():
    for m in Mode:
        assert Mode(m.value) is m
