"""Bandwidth/power allocation and bottlenecked rate evaluation.

Spectrum is modeled as continuously divisible: every station splits its
access band equally among its associates (minus a control-link
reservation).  Uplink users transmit at peak power on their single
link; downlink stations water-fill their peak power across their users.
Back-haul links divide their capacity max-min fairly, hop by hop from
the core outward, and each user's effective rate is the minimum of its
access rate and every share along its chain.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

from skybridge import kernels
from skybridge.association import (Direction, backhaul_chain,
                                   link_capacity_bps)
from skybridge.channel import snr_per_hz
from skybridge.scenario import NodeKind

DEFAULT_ACCESS_BANDWIDTH_HZ = {
    NodeKind.GROUND_BASE_STATION: 20e6,
    NodeKind.TETHERED_BALLOON: 10e6,
    NodeKind.HAP: 20e6,
    NodeKind.SATELLITE: 20e6,
}


class UtilityMetric(Enum):
    SUM_RATE = "sum_rate"
    MIN_RATE = "min_rate"
    PROPORTIONAL_FAIR = "proportional_fair"


@dataclass(frozen=True)
class AllocationParams:
    access_bandwidth_hz: dict = field(
        default_factory=lambda: dict(DEFAULT_ACCESS_BANDWIDTH_HZ))
    backhaul_bandwidth_cases_hz: tuple = (20e6, 200e6, 2e9)
    utility_metric: UtilityMetric = UtilityMetric.SUM_RATE
    control_overhead_fraction: float = 0.0
    # Active back-haul bandwidth case; None keeps per-station defaults.
    backhaul_bandwidth_hz: float = None

    def __post_init__(self):
        if not 0.0 <= self.control_overhead_fraction <= 0.5:
            raise ValueError("control_overhead_fraction outside [0, 0.5]")


@dataclass(frozen=True)
class UserAllocation:
    bandwidth_hz: float
    tx_power_dbm: float
    access_rate_bps: float
    effective_rate_bps: float
    bottleneck_hop: str  # "access", "unserved", or "link:<child>-><parent>"


@dataclass(frozen=True)
class AllocationResult:
    direction: Direction
    per_user: dict          # user_id -> UserAllocation
    station_backhaul_load_bps: dict  # station_id -> carried bit/s
    utility_value: float

    @property
    def mean_rate_bps(self):
        if not self.per_user:
            return 0.0
        return sum(a.effective_rate_bps for a in self.per_user.values()) / len(self.per_user)

    @property
    def min_rate_bps(self):
        if not self.per_user:
            return 0.0
        return min(a.effective_rate_bps for a in self.per_user.values())


def equal_bandwidth_split(station_band_hz, n_users, overhead_fraction=0.0):
    """Per-user share of a station's access band after the control-link
    reservation."""
    if n_users < 1:
        raise ValueError("need at least one user")
    return (1.0 - overhead_fraction) * station_band_hz / n_users


def waterfill_power(gains_over_noise, total_power_w):
    """Water-filling over parallel channels; see kernels.waterfill."""
    return kernels.waterfill(gains_over_noise, total_power_w)


def effective_user_rate(access_rate_bps, chain_shares_bps):
    """Bottleneck along the access link plus every back-haul hop."""
    if access_rate_bps < 0 or any(s < 0 for s in chain_shares_bps):
        raise ValueError("rates must be non-negative")
    rate = access_rate_bps
    for share in chain_shares_bps:
        rate = min(rate, share)
    return rate


def share_backhaul(link_capacity_bps_, demands_bps):
    """Max-min fair division of one link's capacity."""
    return kernels.maxmin_share(link_capacity_bps_, demands_bps)


def utility(rates_bps, metric):
    """Rate utility over a user population.  The proportional-fair
    geometric mean clamps dead users at 1 bit/s so a single zero does
    not annihilate the metric."""
    rates = list(rates_bps)
    if not rates:
        raise ValueError("empty rate list")
    if metric == UtilityMetric.SUM_RATE:
        return sum(rates)
    if metric == UtilityMetric.MIN_RATE:
        return min(rates)
    if metric == UtilityMetric.PROPORTIONAL_FAIR:
        log_sum = sum(math.log(max(r, 1.0)) for r in rates)
        return math.exp(log_sum / len(rates))
    raise ValueError(f"unknown metric {metric}")


def _access_rate(scenario, user, station, direction, band_hz, params,
                 tx_power_dbm):
    """Shannon rate of one served access link at an allocated band."""
    if direction == Direction.UPLINK:
        g_hz = snr_per_hz(user, station, tx_power_dbm, params,
                          params.rf_access_freq_hz)
    else:
        g_hz = snr_per_hz(station, user, tx_power_dbm, params,
                          params.rf_access_freq_hz)
    ref = band_hz if band_hz > 0 else 1.0
    snr = g_hz / ref
    return band_hz * math.log2(1.0 + min(snr, params.snr_cap))


def allocate(scenario, direction, access, backhaul, params):
    """Full allocation pass over one direction.

    Returns per-user bandwidth, power, access rate, and the effective
    (back-haul-bottlenecked) rate, plus the configured utility.
    """
    ch = scenario.config.channel
    served = access.served()
    by_station = {}
    for uid, sid in served.items():
        by_station.setdefault(sid, []).append(uid)
    for uids in by_station.values():
        uids.sort()

    user_by_id = {u.id: u for u in scenario.users}
    bandwidth = {}
    tx_power = {}
    access_rate = {}

    for sid, uids in by_station.items():
        station = scenario.station(sid)
        band = equal_bandwidth_split(
            params.access_bandwidth_hz[station.kind], len(uids),
            params.control_overhead_fraction)
        if direction == Direction.UPLINK:
            for uid in uids:
                user = user_by_id[uid]
                bandwidth[uid] = band
                tx_power[uid] = user.peak_tx_power_dbm
                access_rate[uid] = _access_rate(
                    scenario, user, station, direction, band, ch,
                    user.peak_tx_power_dbm)
        else:
            # Station water-fills its peak power over its users' channels.
            gains = []
            for uid in uids:
                user = user_by_id[uid]
                g_hz = snr_per_hz(station, user, 0.0, ch, ch.rf_access_freq_hz)
                # linear SNR per allocated watt at the user's band share
                gains.append(g_hz * 1000.0 / band if band > 0 else g_hz * 1000.0)
            total_w = 10.0 ** ((station.peak_tx_power_dbm - 30.0) / 10.0)
            powers_w = kernels.waterfill(gains, total_w)
            for uid, g, p_w in zip(uids, gains, powers_w):
                bandwidth[uid] = band
                tx_power[uid] = (10.0 * math.log10(p_w) + 30.0) if p_w > 0 else -math.inf
                snr = g * p_w
                access_rate[uid] = band * math.log2(1.0 + min(snr, ch.snr_cap))

    # Back-haul sharing, hop by hop from the core outward.
    chains = {sid: backhaul_chain(scenario, backhaul, sid) for sid in by_station}
    link_users = {}
    link_order = {}
    for sid, uids in by_station.items():
        for link in chains[sid]:
            key = (link.child_id, link.parent_id)
            link_users.setdefault(key, []).extend(uids)
            link_order[key] = link
    demand = dict(access_rate)
    bottleneck = {uid: "access" for uid in served}
    for key in sorted(link_users, key=lambda k: (link_order[k].depth, k)):
        link = link_order[key]
        uids = sorted(link_users[key])
        cap = link_capacity_bps(scenario, link, direction, ch,
                                params.backhaul_bandwidth_hz)
        if math.isinf(cap):
            continue
        shares = kernels.maxmin_share(cap, [demand[u] for u in uids])
        for u, share in zip(uids, shares):
            if share < demand[u]:
                demand[u] = share
                bottleneck[u] = f"link:{link.child_id}->{link.parent_id}"

    per_user = {}
    load = {}
    for u in scenario.users:
        uid = u.id
        if uid in served:
            eff = demand[uid]
            per_user[uid] = UserAllocation(
                bandwidth_hz=bandwidth[uid],
                tx_power_dbm=tx_power[uid],
                access_rate_bps=access_rate[uid],
                effective_rate_bps=eff,
                bottleneck_hop=bottleneck[uid],
            )
            sid = served[uid]
            load[sid] = load.get(sid, 0.0) + eff
        else:
            per_user[uid] = UserAllocation(0.0, -math.inf, 0.0, 0.0, "unserved")

    rates = [per_user[u.id].effective_rate_bps for u in scenario.users]
    util = utility(rates, params.utility_metric) if rates else 0.0
    return AllocationResult(
        direction=direction,
        per_user=per_user,
        station_backhaul_load_bps=load,
        utility_value=util,
    )
