"""Allocation tests: splits, water-filling, sharing, utilities, and the
full pipeline bookkeeping."""

import math

import pytest

from skybridge.allocation import (AllocationParams, UtilityMetric, allocate,
                                  effective_user_rate, equal_bandwidth_split,
                                  share_backhaul, utility, waterfill_power)
from skybridge.association import Direction, solve_access_greedy, solve_backhaul
from skybridge.scenario import NodeKind, build_scenario, paper_config
from conftest import tiny_scenario


def test_equal_split():
    assert equal_bandwidth_split(20e6, 4) == 5e6
    assert equal_bandwidth_split(20e6, 4, overhead_fraction=0.1) == pytest.approx(4.5e6)
    with pytest.raises(ValueError):
        equal_bandwidth_split(20e6, 0)


def test_overhead_fraction_bounds():
    with pytest.raises(ValueError):
        AllocationParams(control_overhead_fraction=0.6)
    with pytest.raises(ValueError):
        AllocationParams(control_overhead_fraction=-0.1)


def test_waterfill_power_oracle():
    p = waterfill_power([2.0, 1.0], 1.0)
    assert list(p) == pytest.approx([0.75, 0.25], rel=1e-12)


def test_share_backhaul_oracle():
    s = share_backhaul(9.0, [1.0, 5.0, 10.0])
    assert list(s) == pytest.approx([1.0, 4.0, 4.0], rel=1e-12)


def test_effective_rate_is_bottleneck():
    assert effective_user_rate(10.0, [7.0, 12.0]) == 7.0
    assert effective_user_rate(5.0, []) == 5.0
    with pytest.raises(ValueError):
        effective_user_rate(-1.0, [])


def test_utility_metrics():
    rates = [1e6, 2e6, 4e6]
    assert utility(rates, UtilityMetric.SUM_RATE) == pytest.approx(7e6)
    assert utility(rates, UtilityMetric.MIN_RATE) == 1e6
    assert utility(rates, UtilityMetric.PROPORTIONAL_FAIR) == pytest.approx(2e6)
    # a dead user does not zero the geometric mean
    assert utility([0.0, 1e6], UtilityMetric.PROPORTIONAL_FAIR) == pytest.approx(1e3)
    with pytest.raises(ValueError):
        utility([], UtilityMetric.SUM_RATE)


def _solve(sc, direction, ap=None):
    ap = ap or AllocationParams()
    bh = solve_backhaul(sc)
    acc = solve_access_greedy(sc, direction, bh, ap)
    return allocate(sc, direction, acc, bh, ap), acc, bh


def test_allocate_covers_every_user():
    sc = build_scenario(paper_config(num_users=40, seed=1))
    result, acc, _ = _solve(sc, Direction.UPLINK)
    assert set(result.per_user) == {u.id for u in sc.users}
    for uid, alloc in result.per_user.items():
        if acc.assignment[uid] is None:
            assert alloc.effective_rate_bps == 0.0
            assert alloc.bottleneck_hop == "unserved"
        else:
            assert alloc.effective_rate_bps <= alloc.access_rate_bps + 1e-9


def test_station_band_fully_divided():
    sc = build_scenario(paper_config(num_users=40, seed=1))
    result, acc, _ = _solve(sc, Direction.UPLINK)
    by_station = {}
    for uid, sid in acc.served().items():
        by_station.setdefault(sid, []).append(uid)
    for sid, uids in by_station.items():
        kind = sc.station(sid).kind
        total = sum(result.per_user[u].bandwidth_hz for u in uids)
        expected = {NodeKind.TETHERED_BALLOON: 10e6}.get(kind, 20e6)
        assert total == pytest.approx(expected, rel=1e-9)


def test_uplink_users_at_peak_power():
    sc = build_scenario(paper_config(num_users=20, seed=2))
    result, acc, _ = _solve(sc, Direction.UPLINK)
    for uid, sid in acc.served().items():
        assert result.per_user[uid].tx_power_dbm == 20.0


def test_downlink_station_power_conserved():
    sc = build_scenario(paper_config(num_users=40, seed=3))
    result, acc, _ = _solve(sc, Direction.DOWNLINK)
    by_station = {}
    for uid, sid in acc.served().items():
        by_station.setdefault(sid, []).append(uid)
    for sid, uids in by_station.items():
        peak_w = 10.0 ** ((sc.station(sid).peak_tx_power_dbm - 30.0) / 10.0)
        used_w = sum(10.0 ** ((result.per_user[u].tx_power_dbm - 30.0) / 10.0)
                     for u in uids
                     if result.per_user[u].tx_power_dbm > -math.inf)
        assert used_w == pytest.approx(peak_w, rel=1e-9)


def test_backhaul_load_within_capacity():
    from skybridge.association import station_chain_capacity
    sc = build_scenario(paper_config(num_users=60, seed=1))
    ap = AllocationParams(backhaul_bandwidth_hz=20e6)
    result, acc, bh = _solve(sc, Direction.UPLINK, ap)
    for sid, load in result.station_backhaul_load_bps.items():
        cap = station_chain_capacity(sc, bh, sid, Direction.UPLINK,
                                     sc.config.channel, 20e6)
        assert load <= cap * (1.0 + 1e-9)


def test_shared_link_never_oversubscribed():
    from skybridge.association import backhaul_chain, link_capacity_bps
    sc = build_scenario(paper_config(num_users=80, seed=5))
    ap = AllocationParams(backhaul_bandwidth_hz=20e6)
    result, acc, bh = _solve(sc, Direction.UPLINK, ap)
    link_load = {}
    for uid, sid in acc.served().items():
        for link in backhaul_chain(sc, bh, sid):
            key = (link.child_id, link.parent_id)
            link_load[key] = link_load.get(key, 0.0) + \
                result.per_user[uid].effective_rate_bps
            link_load.setdefault(("cap", key), link_capacity_bps(
                sc, link, Direction.UPLINK, sc.config.channel, 20e6))
    for key, load in link_load.items():
        if key[0] == "cap":
            continue
        assert load <= link_load[("cap", key)] * (1.0 + 1e-9)


def test_wider_backhaul_never_hurts():
    sc = build_scenario(paper_config(num_users=60, seed=1))
    narrow, _, _ = _solve(sc, Direction.UPLINK,
                          AllocationParams(backhaul_bandwidth_hz=20e6))
    wide, _, _ = _solve(sc, Direction.UPLINK,
                        AllocationParams(backhaul_bandwidth_hz=2e9))
    assert wide.mean_rate_bps >= narrow.mean_rate_bps


def test_control_overhead_shrinks_rates():
    sc = tiny_scenario(num_users=6, gbs=2, tb=2, area_m=10_000.0)
    plain, _, _ = _solve(sc, Direction.UPLINK, AllocationParams())
    taxed, _, _ = _solve(sc, Direction.UPLINK,
                         AllocationParams(control_overhead_fraction=0.5))
    assert taxed.mean_rate_bps < plain.mean_rate_bps


def test_mean_min_properties():
    sc = build_scenario(paper_config(num_users=30, seed=1))
    result, _, _ = _solve(sc, Direction.UPLINK)
    rates = [a.effective_rate_bps for a in result.per_user.values()]
    assert result.mean_rate_bps == pytest.approx(sum(rates) / len(rates))
    assert result.min_rate_bps == min(rates)
    assert result.utility_value == pytest.approx(sum(rates))
