"""Access-link and back-haul-link association solvers.

Topology rules: uplink access goes to GBSs or TBs (Integrated mode),
downlink access can come from HAPs, GBSs, or TBs; the two baseline
modes restrict access to the satellite, or the satellite plus HAPs.
Each HAP is back-hauled by exactly one gateway or the satellite, with a
per-parent cap; TBs relay through their best HAP; GBSs use fiber when a
gateway is close enough, otherwise a HAP.
"""

import itertools
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from skybridge import channel, kernels
from skybridge.channel import Medium, best_medium, optimal_alignment
from skybridge.errors import InfeasibleCap, InstanceTooLarge
from skybridge.scenario import Mode, NodeKind

DEFAULT_FIBER_RADIUS_M = 10_000.0

# Core-outward depth of each back-haul hop kind.
_DEPTH_FIBER = 0
_DEPTH_HAP_PARENT = 1
_DEPTH_RELAY = 2


class Direction(Enum):
    UPLINK = "uplink"
    DOWNLINK = "downlink"


# Access candidate station kinds per (mode, direction).
ACCESS_KINDS = {
    (Mode.SAT_ONLY, Direction.UPLINK): (NodeKind.SATELLITE,),
    (Mode.SAT_ONLY, Direction.DOWNLINK): (NodeKind.SATELLITE,),
    (Mode.SAT_PLUS_HAPS, Direction.UPLINK): (NodeKind.SATELLITE, NodeKind.HAP),
    (Mode.SAT_PLUS_HAPS, Direction.DOWNLINK): (NodeKind.SATELLITE, NodeKind.HAP),
    (Mode.INTEGRATED, Direction.UPLINK): (
        NodeKind.GROUND_BASE_STATION, NodeKind.TETHERED_BALLOON),
    (Mode.INTEGRATED, Direction.DOWNLINK): (
        NodeKind.HAP, NodeKind.GROUND_BASE_STATION, NodeKind.TETHERED_BALLOON),
}


@dataclass(frozen=True)
class BackhaulLink:
    """One hop of a back-haul chain.  `child`/`parent` are node ids;
    fiber links have the gateway as both endpoints."""
    child_id: int
    parent_id: int
    medium: Medium
    depth: int


@dataclass(frozen=True)
class AccessAssociation:
    direction: Direction
    assignment: dict  # user_id -> station_id, or None for unserved

    def served(self):
        return {u: s for u, s in self.assignment.items() if s is not None}


@dataclass(frozen=True)
class BackhaulAssociation:
    parent: dict        # station_id -> parent node id
    medium: dict        # station_id -> Medium of the link to its parent
    alignment: dict     # (tx_id, rx_id) -> (azimuth, elevation) for FSO links
    fiber_gbs: frozenset  # GBS ids wired straight to a gateway


def enumerate_access_candidates(scenario, direction, mode):
    """All (user_id, station_id) pairs the mode/direction permit."""
    kinds = ACCESS_KINDS[(mode, direction)]
    stations = [s for s in scenario.stations if s.kind in kinds]
    return [(u.id, s.id) for u in scenario.users for s in stations]


def _backhaul_rate(child, parent, params):
    """Full-band child->parent rate used to rank parent choices."""
    budget = best_medium(child, parent, params,
                         child.backhaul_bandwidth_rf_hz,
                         child.backhaul_bandwidth_fso_hz)
    return budget


def solve_backhaul(scenario, params=None, fiber_radius_m=DEFAULT_FIBER_RADIUS_M):
    """Assign every aerial/terrestrial station a back-haul parent.

    HAPs pick the gateway or satellite with the best full-band rate,
    processed in descending order of regret (best-rate margin over the
    runner-up) under the per-parent cap.  TBs pick their best HAP; GBSs
    take fiber when a gateway is within `fiber_radius_m`, else their
    best HAP.
    """
    if params is None:
        params = scenario.config.channel
    cap = scenario.config.max_haps_per_backhaul
    if cap < 1:
        raise InfeasibleCap("max_haps_per_backhaul < 1")
    haps = scenario.by_kind(NodeKind.HAP)
    gateways = list(scenario.gateways)
    sat = scenario.satellite
    parents = gateways + [sat]
    if len(haps) > cap * len(parents):
        raise InfeasibleCap(
            f"{len(haps)} HAPs exceed {cap} x {len(parents)} parent slots")

    parent_map = {}
    medium_map = {}
    alignment = {}

    # HAP -> {gateway | satellite}
    options = {}
    for hap in haps:
        budgets = [(p.id, _backhaul_rate(hap, p, params)) for p in parents]
        budgets.sort(key=lambda t: t[0])
        options[hap.id] = budgets

    def margin(hap_id):
        rates = sorted((b.max_rate_at_full_band_bps for _, b in options[hap_id]),
                       reverse=True)
        if len(rates) == 1:
            return rates[0]
        return rates[0] - rates[1]

    load = {p.id: 0 for p in parents}
    for hap in sorted(haps, key=lambda h: (-margin(h.id), h.id)):
        best_pid, best_budget = None, None
        for pid, budget in options[hap.id]:
            if load[pid] >= cap:
                continue
            if best_budget is None or budget.max_rate_at_full_band_bps > \
                    best_budget.max_rate_at_full_band_bps:
                best_pid, best_budget = pid, budget
        if best_pid is None:
            raise InfeasibleCap("no parent slot left for HAP "
                                f"{hap.id} under cap {cap}")
        parent_map[hap.id] = best_pid
        medium_map[hap.id] = best_budget.medium
        load[best_pid] += 1

    # TB -> best HAP; GBS -> fiber gateway or best HAP
    fiber = set()
    node_by_id = {s.id: s for s in scenario.stations}
    node_by_id.update({g.id: g for g in gateways})
    for kind in (NodeKind.TETHERED_BALLOON, NodeKind.GROUND_BASE_STATION):
        for st in scenario.by_kind(kind):
            if kind == NodeKind.GROUND_BASE_STATION:
                near = [g for g in gateways
                        if channel.distance_m(st, g) <= fiber_radius_m]
                if near:
                    g = min(near, key=lambda g: (channel.distance_m(st, g), g.id))
                    parent_map[st.id] = g.id
                    medium_map[st.id] = Medium.FIBER
                    fiber.add(st.id)
                    continue
            best_hid, best_budget = None, None
            for hap in haps:
                budget = _backhaul_rate(st, hap, params)
                if best_budget is None or budget.max_rate_at_full_band_bps > \
                        best_budget.max_rate_at_full_band_bps:
                    best_hid, best_budget = hap.id, budget
            if best_hid is None:
                continue  # no HAPs in the scenario; station stays unbackhauled
            parent_map[st.id] = best_hid
            medium_map[st.id] = best_budget.medium

    for child_id, parent_id in parent_map.items():
        if medium_map[child_id] != Medium.FSO:
            continue
        tx = node_by_id[child_id]
        rx = node_by_id[parent_id]
        alignment[(child_id, parent_id)] = optimal_alignment(
            channel._position3(tx), channel._position3(rx))
        alignment[(parent_id, child_id)] = optimal_alignment(
            channel._position3(rx), channel._position3(tx))

    return BackhaulAssociation(parent=parent_map, medium=medium_map,
                               alignment=alignment, fiber_gbs=frozenset(fiber))


def backhaul_chain(scenario, backhaul, station_id):
    """Hops from a serving station toward the core, ordered core-first.

    A fiber hop carries the gateway's wired capacity; chains ending at
    the satellite stop there (its core connection is not modeled as a
    constraint)."""
    station = scenario.station(station_id)
    if station.kind == NodeKind.SATELLITE:
        return []
    gateway_ids = {g.id for g in scenario.gateways}
    links = []
    node_id = station_id
    depth_for_kind = {
        NodeKind.TETHERED_BALLOON: _DEPTH_RELAY,
        NodeKind.GROUND_BASE_STATION: _DEPTH_RELAY,
        NodeKind.HAP: _DEPTH_HAP_PARENT,
    }
    while node_id in backhaul.parent:
        parent_id = backhaul.parent[node_id]
        if backhaul.medium[node_id] == Medium.FIBER:
            # wired GBS: only the gateway's core fiber constrains it
            links.append(BackhaulLink(parent_id, parent_id, Medium.FIBER,
                                      _DEPTH_FIBER))
            break
        kind = scenario.station(node_id).kind
        links.append(BackhaulLink(node_id, parent_id, backhaul.medium[node_id],
                                  depth_for_kind[kind]))
        if parent_id in gateway_ids:
            links.append(BackhaulLink(parent_id, parent_id, Medium.FIBER,
                                      _DEPTH_FIBER))
            break
        node_id = parent_id
        if scenario.station(node_id).kind == NodeKind.SATELLITE:
            break
    links.sort(key=lambda l: l.depth)
    return links


def link_capacity_bps(scenario, link, direction, params,
                      backhaul_bandwidth_hz=None):
    """Capacity of one back-haul hop for a traffic direction.

    Uplink traffic flows child -> parent; downlink parent -> child.  An
    explicit `backhaul_bandwidth_hz` (the sweep's bandwidth case)
    overrides the per-station RF and FSO back-haul bands.
    """
    gateway_ids = {g.id for g in scenario.gateways}
    if link.medium == Medium.FIBER:
        return scenario.gateway(link.parent_id).fiber_rate_bps
    child = scenario.station(link.child_id)
    parent = (scenario.gateway(link.parent_id)
              if link.parent_id in gateway_ids else scenario.station(link.parent_id))
    tx, rx = (child, parent) if direction == Direction.UPLINK else (parent, child)
    rf_band = backhaul_bandwidth_hz or child.backhaul_bandwidth_rf_hz
    fso_band = backhaul_bandwidth_hz or child.backhaul_bandwidth_fso_hz
    budget = best_medium(tx, rx, params, rf_band, fso_band)
    return budget.max_rate_at_full_band_bps


def station_chain_capacity(scenario, backhaul, station_id, direction, params,
                           backhaul_bandwidth_hz=None):
    """Min capacity along the station's whole chain (inf for a direct
    core connection, i.e. the satellite)."""
    chain = backhaul_chain(scenario, backhaul, station_id)
    if not chain:
        station = scenario.station(station_id)
        if station.kind == NodeKind.SATELLITE:
            return math.inf
        return 0.0  # aerial station with no back-haul path carries nothing
    return min(link_capacity_bps(scenario, l, direction, params,
                                 backhaul_bandwidth_hz) for l in chain)


def _tb_user_cap(station, params=None):
    """How many users this TB's stored energy can serve for one slot.
    tb_consumption is affine in the user count, so invert it directly."""
    if station.battery is None:
        return np.iinfo(np.int64).max
    from skybridge.energy import EnergyParams
    p = params or EnergyParams()
    p_tx_w = 10.0 ** ((station.peak_tx_power_dbm - 30.0) / 10.0)
    budget_w = station.battery.level_j / p.slot_duration_s \
        - p.p_operating_w - p_tx_w
    return max(0, int(budget_w // p.p_per_user_w)) if budget_w > 0 else 0


def access_matrices(scenario, direction, mode, alloc_params):
    """Vectorized inputs for the greedy kernel: candidate stations,
    full-band SNR matrix, usable bands, and candidacy mask."""
    kinds = ACCESS_KINDS[(mode, direction)]
    stations = [s for s in scenario.stations if s.kind in kinds]
    users = scenario.users
    params = scenario.config.channel
    n_u, n_s = len(users), len(stations)

    ux = np.array([u.position[0] for u in users])
    uy = np.array([u.position[1] for u in users])
    sx = np.array([s.position[0] for s in stations])
    sy = np.array([s.position[1] for s in stations])
    sz = np.array([s.position[2] for s in stations])
    dist = np.sqrt((ux[:, None] - sx) ** 2 + (uy[:, None] - sy) ** 2 + sz ** 2)
    np.maximum(dist, 1.0, out=dist)

    cls_excess = np.empty(n_s)
    gain = np.empty(n_s)
    band = np.empty(n_s)
    for j, s in enumerate(stations):
        lc = {
            NodeKind.GROUND_BASE_STATION: channel.LinkClass.USER_GBS,
            NodeKind.TETHERED_BALLOON: channel.LinkClass.USER_TB,
            NodeKind.HAP: channel.LinkClass.USER_HAP,
            NodeKind.SATELLITE: channel.LinkClass.USER_SAT,
        }[s.kind]
        cls_excess[j] = params.excess_loss_db[lc]
        gain[j] = (s.antenna_gain_rx_dbi if direction == Direction.UPLINK
                   else s.antenna_gain_tx_dbi)
        band[j] = (1.0 - alloc_params.control_overhead_fraction) * \
            alloc_params.access_bandwidth_hz[s.kind]

    pl = 20.0 * np.log10(4.0 * math.pi * dist * params.rf_access_freq_hz
                         / channel.SPEED_OF_LIGHT) + cls_excess
    if direction == Direction.UPLINK:
        tx_dbm = np.array([u.peak_tx_power_dbm for u in users])[:, None]
    else:
        tx_dbm = np.array([s.peak_tx_power_dbm for s in stations])[None, :]
    rx_dbm = tx_dbm + gain[None, :] - pl
    g_hz = 10.0 ** ((rx_dbm - params.noise_density_dbm_hz) / 10.0)
    snr_full = g_hz / band[None, :]
    cand = np.ones((n_u, n_s), dtype=np.uint8)
    return stations, snr_full, band, cand


def solve_access_greedy(scenario, direction, backhaul, alloc_params,
                        mode=None):
    """Bottleneck-aware greedy user association.

    Users are processed in descending order of their best single-user
    rate; each takes the station maximizing min(access-rate estimate,
    back-haul share), both under an equal split among the station's
    current associates plus one.  TBs with drained batteries are
    excluded; users whose best estimate misses their QoS floor stay
    unserved.
    """
    if mode is None:
        mode = scenario.config.mode
    params = scenario.config.channel
    stations, snr_full, band, cand = access_matrices(
        scenario, direction, mode, alloc_params)
    backhaul_cap = np.array([
        station_chain_capacity(scenario, backhaul, s.id, direction, params,
                               alloc_params.backhaul_bandwidth_hz)
        for s in stations])
    qos = np.array([u.qos_min_rate_bps for u in scenario.users])
    max_users = np.array([_tb_user_cap(s) for s in stations], dtype=np.int64)
    assignment, _ = kernels.greedy_assign(
        snr_full, cand, band, backhaul_cap, qos, max_users,
        direction == Direction.UPLINK)
    mapping = {}
    for i, u in enumerate(scenario.users):
        j = int(assignment[i])
        mapping[u.id] = stations[j].id if j >= 0 else None
    return AccessAssociation(direction=direction, assignment=mapping)


def solve_access_exact(scenario, direction, backhaul, alloc_params,
                       mode=None):
    """Exhaustive oracle for small instances: tries every assignment
    vector (including unserved), scoring each with the full allocation
    pipeline.  Ties break to the lexicographically smallest vector."""
    from skybridge.allocation import allocate

    if mode is None:
        mode = scenario.config.mode
    kinds = ACCESS_KINDS[(mode, direction)]
    stations = sorted((s for s in scenario.stations if s.kind in kinds),
                      key=lambda s: s.id)
    users = scenario.users
    if len(users) > 10 or len(stations) > 6:
        raise InstanceTooLarge(
            f"{len(users)} users x {len(stations)} stations")

    choices = [s.id for s in stations] + [None]
    best_util = -math.inf
    best_map = None
    for combo in itertools.product(choices, repeat=len(users)):
        mapping = {u.id: sid for u, sid in zip(users, combo)}
        assoc = AccessAssociation(direction=direction, assignment=mapping)
        result = allocate(scenario, direction, assoc, backhaul, alloc_params)
        if result.utility_value > best_util:
            best_util = result.utility_value
            best_map = mapping
    return AccessAssociation(direction=direction, assignment=best_map)


def verify_access(scenario, assoc, mode=None):
    """Invariant checks shared by the solvers' tests; returns a list of
    human-readable violations."""
    if mode is None:
        mode = scenario.config.mode
    out = []
    allowed = set(ACCESS_KINDS[(mode, assoc.direction)])
    user_ids = {u.id for u in scenario.users}
    if set(assoc.assignment) != user_ids:
        out.append("assignment does not cover exactly the user set")
    for uid, sid in assoc.assignment.items():
        if sid is None:
            continue
        st = scenario.station(sid)
        if st.kind not in allowed:
            out.append(f"user {uid} on {st.kind} not allowed in "
                       f"{mode.value}/{assoc.direction.value}")
    return out


def verify_backhaul(scenario, backhaul):
    out = []
    cap = scenario.config.max_haps_per_backhaul
    gateway_ids = {g.id for g in scenario.gateways}
    sat_id = scenario.satellite.id
    load = {}
    for hap in scenario.by_kind(NodeKind.HAP):
        pid = backhaul.parent.get(hap.id)
        if pid is None:
            out.append(f"HAP {hap.id} has no parent")
            continue
        if pid not in gateway_ids and pid != sat_id:
            out.append(f"HAP {hap.id} parent {pid} is not gateway/satellite")
        load[pid] = load.get(pid, 0) + 1
    for pid, n in load.items():
        if n > cap:
            out.append(f"parent {pid} carries {n} HAPs > cap {cap}")
    hap_ids = {h.id for h in scenario.by_kind(NodeKind.HAP)}
    for tb in scenario.by_kind(NodeKind.TETHERED_BALLOON):
        pid = backhaul.parent.get(tb.id)
        if hap_ids and pid not in hap_ids:
            out.append(f"TB {tb.id} parent {pid} is not a HAP")
    for gbs in scenario.by_kind(NodeKind.GROUND_BASE_STATION):
        pid = backhaul.parent.get(gbs.id)
        if gbs.id in backhaul.fiber_gbs:
            if pid not in gateway_ids:
                out.append(f"fiber GBS {gbs.id} parent {pid} is not a gateway")
        elif hap_ids and pid not in hap_ids:
            out.append(f"GBS {gbs.id} parent {pid} is not a HAP")
    return out
