"""Network entities and seeded scenario construction.

A scenario is an immutable snapshot of the world: one satellite, HAPs in
the stratosphere, tethered balloons (TBs) in the troposphere, ground
base stations (GBSs), fiber gateways on the area boundary, and ground
users spread over configurable sub-areas.  Construction is fully
deterministic for a fixed (config, seed).
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np

from skybridge.errors import InvalidConfig
from skybridge.energy import BatteryState, DEFAULT_TB_BATTERY_J


class NodeKind(Enum):
    SATELLITE = "satellite"
    HAP = "hap"
    TETHERED_BALLOON = "tb"
    GROUND_BASE_STATION = "gbs"
    GATEWAY = "gateway"
    USER = "user"


class Mode(Enum):
    SAT_ONLY = "SatOnly"
    SAT_PLUS_HAPS = "SatPlusHaps"
    INTEGRATED = "Integrated"


# Altitude bands: troposphere (TB) < stratosphere (HAP) < exosphere (satellite).
DEFAULT_ALTITUDES_M = {"tb": 1_000.0, "hap": 20_000.0, "satellite": 500_000.0}

# Radio calibration per station kind.  These are toolkit calibration
# choices (no channel constants are published for this system); the
# comparative experiments depend on their orderings, not exact values.
PEAK_TX_DBM = {
    NodeKind.SATELLITE: 50.0,
    NodeKind.HAP: 43.0,
    NodeKind.TETHERED_BALLOON: 33.0,
    NodeKind.GROUND_BASE_STATION: 43.0,
}
ANTENNA_GAIN_DBI = {
    NodeKind.SATELLITE: 20.0,
    NodeKind.HAP: 20.0,
    NodeKind.TETHERED_BALLOON: 10.0,
    NodeKind.GROUND_BASE_STATION: 10.0,
    NodeKind.GATEWAY: 20.0,
    NodeKind.USER: 0.0,
}
# Receive-side gains.  The HAP uplink receiver is wide-area and
# interference-limited (one beam covers a ~40 km footprint), modeled as
# a strongly reduced effective receive gain; its directional downlink
# transmit beam keeps the full gain.
ANTENNA_GAIN_RX_DBI = dict(ANTENNA_GAIN_DBI)
ANTENNA_GAIN_RX_DBI[NodeKind.HAP] = -30.0
HAS_FSO = {
    NodeKind.SATELLITE: True,
    NodeKind.HAP: True,
    NodeKind.TETHERED_BALLOON: True,
    NodeKind.GROUND_BASE_STATION: False,
}
DEFAULT_BACKHAUL_RF_HZ = 20e6
DEFAULT_BACKHAUL_FSO_HZ = 2e9
DEFAULT_USER_TX_DBM = 20.0
DEFAULT_FIBER_RATE_BPS = 10e9
GATEWAY_TX_DBM = 46.0  # fixed gateway radio for downlink back-haul


@dataclass(frozen=True)
class Station:
    id: int
    kind: NodeKind
    position: tuple  # (x m, y m, altitude m)
    peak_tx_power_dbm: float
    antenna_gain_tx_dbi: float
    antenna_gain_rx_dbi: float
    has_fso: bool
    battery: Optional[BatteryState] = None
    backhaul_bandwidth_rf_hz: float = DEFAULT_BACKHAUL_RF_HZ
    backhaul_bandwidth_fso_hz: float = DEFAULT_BACKHAUL_FSO_HZ


@dataclass(frozen=True)
class GroundUser:
    id: int
    position: tuple  # (x m, y m); altitude 0
    qos_min_rate_bps: float = 0.0
    peak_tx_power_dbm: float = DEFAULT_USER_TX_DBM


@dataclass(frozen=True)
class Gateway:
    id: int
    position: tuple  # (x m, y m)
    has_fso: bool = True
    fiber_rate_bps: float = DEFAULT_FIBER_RATE_BPS


@dataclass(frozen=True)
class SubArea:
    bounds: tuple  # (xmin, xmax, ymin, ymax) m
    user_fraction: float
    gbs_count: int
    tb_count: int


@dataclass(frozen=True)
class ScenarioConfig:
    area_size: tuple  # (width m, height m)
    subareas: tuple
    num_users: int
    num_haps: int
    num_gateways: int
    altitudes_m: dict
    channel: object  # ChannelParams; held opaquely to avoid an import cycle
    max_haps_per_backhaul: int
    mode: Mode
    seed: int


@dataclass(frozen=True)
class Violation:
    rule: str
    entity: str
    detail: str

    def __str__(self):
        return f"{self.rule}({self.entity}): {self.detail}"


@dataclass
class Scenario:
    config: ScenarioConfig
    stations: tuple
    users: tuple
    gateways: tuple
    _station_index: dict = field(default=None, repr=False, compare=False)

    def station(self, station_id):
        if self._station_index is None:
            self._station_index = {s.id: s for s in self.stations}
        return self._station_index[station_id]

    def gateway(self, gateway_id):
        for g in self.gateways:
            if g.id == gateway_id:
                return g
        raise KeyError(gateway_id)

    def by_kind(self, kind):
        return [s for s in self.stations if s.kind == kind]

    @property
    def satellite(self):
        return self.by_kind(NodeKind.SATELLITE)[0]

    def with_station_position(self, station_id, position):
        """Return a copy with one station moved (placement support)."""
        stations = tuple(
            replace(s, position=position) if s.id == station_id else s
            for s in self.stations
        )
        return Scenario(self.config, stations, self.users, self.gateways)

    def with_station_power(self, kind, peak_tx_power_dbm):
        """Return a copy with every station of `kind` re-powered."""
        stations = tuple(
            replace(s, peak_tx_power_dbm=peak_tx_power_dbm) if s.kind == kind else s
            for s in self.stations
        )
        return Scenario(self.config, stations, self.users, self.gateways)

    def with_user_power(self, peak_tx_power_dbm):
        users = tuple(
            replace(u, peak_tx_power_dbm=peak_tx_power_dbm) for u in self.users
        )
        return Scenario(self.config, self.stations, users, self.gateways)


def paper_config(num_users=100, seed=1, mode=Mode.INTEGRATED, channel=None):
    """The published desk-scale layout: 180 km x 180 km, three sub-areas
    (city / after-disaster / rural), 30 GBSs + 30 TBs in the city
    sub-area, 8 HAPs."""
    if channel is None:
        from skybridge.channel import ChannelParams
        channel = ChannelParams()
    area = (180_000.0, 180_000.0)
    sub_a = SubArea(bounds=(55_000.0, 125_000.0, 0.0, 70_000.0),
                    user_fraction=0.40, gbs_count=30, tb_count=30)
    sub_b = SubArea(bounds=(55_000.0, 125_000.0, 110_000.0, 180_000.0),
                    user_fraction=0.30, gbs_count=0, tb_count=0)
    # Sub-area C is "the remaining area": an L-shaped region decomposed
    # into three disjoint rectangles, its 30% user share split
    # proportionally to rectangle area.
    c_rects = (
        (0.0, 55_000.0, 0.0, 180_000.0),        # western strip
        (125_000.0, 180_000.0, 0.0, 180_000.0),  # eastern strip
        (55_000.0, 125_000.0, 70_000.0, 110_000.0),  # band between A and B
    )
    c_areas = [(x1 - x0) * (y1 - y0) for x0, x1, y0, y1 in c_rects]
    c_total = sum(c_areas)
    sub_c = tuple(
        SubArea(bounds=r, user_fraction=0.30 * a / c_total, gbs_count=0, tb_count=0)
        for r, a in zip(c_rects, c_areas)
    )
    return ScenarioConfig(
        area_size=area,
        subareas=(sub_a, sub_b) + sub_c,
        num_users=num_users,
        num_haps=8,
        num_gateways=4,
        altitudes_m=dict(DEFAULT_ALTITUDES_M),
        channel=channel,
        max_haps_per_backhaul=3,
        mode=mode,
        seed=seed,
    )


def _check_config(config):
    frac = sum(sa.user_fraction for sa in config.subareas)
    if abs(frac - 1.0) > 1e-9:
        raise InvalidConfig("subareas.user_fraction", f"fractions sum to {frac}, expected 1.0")
    w, h = config.area_size
    if w <= 0 or h <= 0:
        raise InvalidConfig("area_size", "must be positive")
    for i, sa in enumerate(config.subareas):
        xmin, xmax, ymin, ymax = sa.bounds
        if not (0 <= xmin < xmax <= w and 0 <= ymin < ymax <= h):
            raise InvalidConfig(f"subareas[{i}].bounds", f"{sa.bounds} outside area {config.area_size}")
        if sa.user_fraction < 0:
            raise InvalidConfig(f"subareas[{i}].user_fraction", "negative")
    if config.num_users < 0:
        raise InvalidConfig("num_users", "negative")
    if config.num_haps < 0:
        raise InvalidConfig("num_haps", "negative")
    if config.num_gateways < 1:
        raise InvalidConfig("num_gateways", "need at least one gateway")


def _user_counts(config):
    """floor(fraction * U) per sub-area, remainder into the last one."""
    counts = [int(math.floor(sa.user_fraction * config.num_users))
              for sa in config.subareas]
    counts[-1] += config.num_users - sum(counts)
    return counts


def _hap_grid(config):
    n = config.num_haps
    w, h = config.area_size
    alt = config.altitudes_m["hap"]
    cols = max(1, math.ceil(math.sqrt(n)))
    rows = max(1, math.ceil(n / cols))
    positions = []
    for k in range(n):
        i, j = divmod(k, cols)
        positions.append(((j + 0.5) * w / cols, (i + 0.5) * h / rows, alt))
    return positions


def _gateway_positions(config):
    """Evenly spaced along the rectangular boundary, starting at the origin."""
    w, h = config.area_size
    perimeter = 2 * (w + h)
    positions = []
    for k in range(config.num_gateways):
        t = k * perimeter / config.num_gateways
        if t < w:
            positions.append((t, 0.0))
        elif t < w + h:
            positions.append((w, t - w))
        elif t < 2 * w + h:
            positions.append((w - (t - w - h), h))
        else:
            positions.append((0.0, perimeter - t))
    return positions


def _make_station(sid, kind, position):
    battery = None
    if kind == NodeKind.TETHERED_BALLOON:
        battery = BatteryState.full(DEFAULT_TB_BATTERY_J)
    return Station(
        id=sid,
        kind=kind,
        position=position,
        peak_tx_power_dbm=PEAK_TX_DBM[kind],
        antenna_gain_tx_dbi=ANTENNA_GAIN_DBI[kind],
        antenna_gain_rx_dbi=ANTENNA_GAIN_RX_DBI[kind],
        has_fso=HAS_FSO[kind],
        battery=battery,
    )


def build_scenario(config):
    """Build a deterministic scenario from `config`.

    Users, GBSs, and TBs are placed uniformly at random inside their
    sub-areas; HAPs start on a uniform grid (the placement optimizer
    refines them); gateways sit evenly spaced on the boundary; the
    satellite hovers over the area center.
    """
    _check_config(config)
    rng = np.random.default_rng(config.seed)
    w, h = config.area_size

    users = []
    uid = 0
    for sa, count in zip(config.subareas, _user_counts(config)):
        xmin, xmax, ymin, ymax = sa.bounds
        xs = rng.uniform(xmin, xmax, count)
        ys = rng.uniform(ymin, ymax, count)
        for x, y in zip(xs, ys):
            users.append(GroundUser(id=uid, position=(float(x), float(y))))
            uid += 1

    stations = []
    sid = 0
    stations.append(_make_station(
        sid, NodeKind.SATELLITE, (w / 2, h / 2, config.altitudes_m["satellite"])))
    sid += 1
    for pos in _hap_grid(config):
        stations.append(_make_station(sid, NodeKind.HAP, pos))
        sid += 1
    for kind, key in ((NodeKind.GROUND_BASE_STATION, "gbs_count"),
                      (NodeKind.TETHERED_BALLOON, "tb_count")):
        for sa in config.subareas:
            count = getattr(sa, key)
            xmin, xmax, ymin, ymax = sa.bounds
            xs = rng.uniform(xmin, xmax, count)
            ys = rng.uniform(ymin, ymax, count)
            alt = 0.0 if kind == NodeKind.GROUND_BASE_STATION else config.altitudes_m["tb"]
            for x, y in zip(xs, ys):
                stations.append(_make_station(sid, kind, (float(x), float(y), alt)))
                sid += 1

    gateways = []
    for pos in _gateway_positions(config):
        gateways.append(Gateway(id=sid, position=pos))
        sid += 1

    return Scenario(config=config, stations=tuple(stations),
                    users=tuple(users), gateways=tuple(gateways))


def validate(scenario):
    """Check every type invariant; returns a list of violations (empty
    when the scenario is well-formed)."""
    out = []
    cfg = scenario.config
    w, h = cfg.area_size

    sats = scenario.by_kind(NodeKind.SATELLITE)
    if len(sats) != 1:
        out.append(Violation("SatelliteCount", "scenario", f"found {len(sats)}, expected 1"))

    seen = set()
    for s in scenario.stations:
        if s.id in seen:
            out.append(Violation("DuplicateId", f"Station {s.id}", "station id reused"))
        seen.add(s.id)
    seen = set()
    for u in scenario.users:
        if u.id in seen:
            out.append(Violation("DuplicateId", f"User {u.id}", "user id reused"))
        seen.add(u.id)
        if u.qos_min_rate_bps < 0:
            out.append(Violation("NegativeQos", f"User {u.id}", f"{u.qos_min_rate_bps}"))
        if not math.isfinite(u.peak_tx_power_dbm):
            out.append(Violation("NonFinitePower", f"User {u.id}", f"{u.peak_tx_power_dbm}"))
        x, y = u.position
        if not (0 <= x <= w and 0 <= y <= h):
            out.append(Violation("OutOfBounds", f"User {u.id}", f"{u.position}"))
    seen = set()
    for g in scenario.gateways:
        if g.id in seen:
            out.append(Violation("DuplicateId", f"Gateway {g.id}", "gateway id reused"))
        seen.add(g.id)
        if g.fiber_rate_bps <= 0:
            out.append(Violation("NonPositiveFiberRate", f"Gateway {g.id}", f"{g.fiber_rate_bps}"))

    hap_alts = [s.position[2] for s in scenario.by_kind(NodeKind.HAP)]
    sat_alt = sats[0].position[2] if sats else math.inf
    for s in scenario.stations:
        kind = s.kind
        x, y, alt = s.position
        if kind in (NodeKind.SATELLITE, NodeKind.HAP, NodeKind.TETHERED_BALLOON) and alt <= 0:
            out.append(Violation("NonPositiveAltitude", f"Station {s.id}", f"{alt}"))
        if kind != NodeKind.SATELLITE and not (0 <= x <= w and 0 <= y <= h):
            out.append(Violation("OutOfBounds", f"Station {s.id}", f"{s.position}"))
        if kind == NodeKind.TETHERED_BALLOON:
            if s.battery is None:
                out.append(Violation("MissingBattery", f"Station {s.id}", "TB without battery"))
            if hap_alts and alt >= min(hap_alts):
                out.append(Violation("AltitudeOrdering", f"Station {s.id}",
                                     f"TB at {alt} m not below HAP band"))
        elif s.battery is not None:
            out.append(Violation("UnexpectedBattery", f"Station {s.id}", str(kind)))
        if kind == NodeKind.HAP and alt >= sat_alt:
            out.append(Violation("AltitudeOrdering", f"Station {s.id}",
                                 f"HAP at {alt} m not below satellite"))
    return out
