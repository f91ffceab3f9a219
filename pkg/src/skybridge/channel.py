"""RF and FSO link budgets, Shannon rates, and hybrid medium selection.

All computations are pure functions of positions and parameters; there
is no fading or other randomness, so identical inputs give bit-identical
outputs.  RF uses free-space pathloss plus a per-link-class excess term;
FSO combines geometric spreading, Gaussian pointing loss, and a fixed
atmospheric attenuation coefficient.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from skybridge.errors import AccessPairNotAllowed, UnknownLinkClass
from skybridge.scenario import (ANTENNA_GAIN_DBI, GATEWAY_TX_DBM, Gateway,
                                GroundUser, NodeKind, Station)

SPEED_OF_LIGHT = 299_792_458.0


class Medium(Enum):
    RF = "rf"
    FSO = "fso"
    FIBER = "fiber"  # wired gateway attachment; not a radio medium


class LinkClass(Enum):
    USER_GBS = "user_gbs"
    USER_TB = "user_tb"
    USER_HAP = "user_hap"
    USER_SAT = "user_sat"
    RELAY_HAP = "relay_hap"      # GBS or TB <-> HAP
    HAP_GATEWAY = "hap_gateway"
    HAP_SAT = "hap_sat"


ACCESS_CLASSES = frozenset({LinkClass.USER_GBS, LinkClass.USER_TB,
                            LinkClass.USER_HAP, LinkClass.USER_SAT})

# Default per-class excess losses, dB.  Calibrated so aerial platforms
# keep their line-of-sight advantage over terrestrial NLoS links and the
# direct-to-satellite link stays orders of magnitude below the relayed
# paths (the comparative experiments check orderings, not absolutes).
DEFAULT_EXCESS_DB = {
    LinkClass.USER_GBS: 20.0,
    LinkClass.USER_TB: 10.0,
    LinkClass.USER_HAP: 2.0,
    LinkClass.USER_SAT: 35.0,
    LinkClass.RELAY_HAP: 0.0,
    LinkClass.HAP_GATEWAY: 0.0,
    LinkClass.HAP_SAT: 0.0,
}


@dataclass(frozen=True)
class ChannelParams:
    rf_access_freq_hz: float = 2e9
    rf_backhaul_freq_hz: float = 6e9
    noise_density_dbm_hz: float = -174.0
    excess_loss_db: dict = field(default_factory=lambda: dict(DEFAULT_EXCESS_DB))
    fso_wavelength_m: float = 1550e-9
    fso_divergence_rad: float = 1e-3
    fso_rx_aperture_m: float = 0.1
    fso_atm_attenuation_db_km: float = 0.43
    fso_optics_efficiency: float = 0.8
    fso_tx_power_dbm: float = 30.0
    # Linear SNR produced per watt of received optical power; folds the
    # receiver noise floor into one knob.
    fso_rx_sensitivity_snr_ref: float = 1e12
    snr_cap: float = 1e3


@dataclass(frozen=True)
class LinkBudget:
    distance_m: float
    medium: Medium
    pathloss_db: float
    rx_power_dbm: float
    snr: float
    rate_per_hz: float
    max_rate_at_full_band_bps: float


def _position3(node):
    p = node.position
    if len(p) == 3:
        return p
    return (p[0], p[1], 0.0)


def distance_m(a, b):
    ax, ay, az = _position3(a)
    bx, by, bz = _position3(b)
    return math.sqrt((ax - bx) ** 2 + (ay - by) ** 2 + (az - bz) ** 2)


_LINK_TABLE = {}
for _ka, _kb, _lc in (
    (NodeKind.USER, NodeKind.GROUND_BASE_STATION, LinkClass.USER_GBS),
    (NodeKind.USER, NodeKind.TETHERED_BALLOON, LinkClass.USER_TB),
    (NodeKind.USER, NodeKind.HAP, LinkClass.USER_HAP),
    (NodeKind.USER, NodeKind.SATELLITE, LinkClass.USER_SAT),
    (NodeKind.GROUND_BASE_STATION, NodeKind.HAP, LinkClass.RELAY_HAP),
    (NodeKind.TETHERED_BALLOON, NodeKind.HAP, LinkClass.RELAY_HAP),
    (NodeKind.HAP, NodeKind.GATEWAY, LinkClass.HAP_GATEWAY),
    (NodeKind.HAP, NodeKind.SATELLITE, LinkClass.HAP_SAT),
):
    _LINK_TABLE[(_ka, _kb)] = _lc
    _LINK_TABLE[(_kb, _ka)] = _lc


def link_class(a, b):
    """Classify a node pair under the supported topology; order-free."""
    try:
        return _LINK_TABLE[(_kind(a), _kind(b))]
    except KeyError:
        raise UnknownLinkClass(f"{_kind(a)} <-> {_kind(b)}") from None


def _kind(node):
    if isinstance(node, GroundUser):
        return NodeKind.USER
    if isinstance(node, Gateway):
        return NodeKind.GATEWAY
    return node.kind


def rf_pathloss_db(dist_m, frequency_hz, excess_db=0.0):
    """Free-space pathloss plus a per-class excess term."""
    if dist_m <= 0:
        raise ValueError("distance must be positive")
    if frequency_hz <= 0:
        raise ValueError("frequency must be positive")
    return 20.0 * math.log10(4.0 * math.pi * dist_m * frequency_hz / SPEED_OF_LIGHT) + excess_db


def shannon_rate(bandwidth_hz, snr, snr_cap=math.inf):
    if bandwidth_hz < 0 or snr < 0:
        raise ValueError("bandwidth and snr must be non-negative")
    return bandwidth_hz * math.log2(1.0 + min(snr, snr_cap))


def snr_per_hz(tx, rx, tx_power_dbm, params, frequency_hz):
    """Linear SNR x Hz for an RF pair: receive power over the noise
    density.  Divide by an actual bandwidth to get the link SNR."""
    lc = link_class(tx, rx)
    excess = params.excess_loss_db[lc]
    dist = distance_m(tx, rx)
    pl = rf_pathloss_db(dist, frequency_hz, excess)
    g_tx = _tx_gain(tx)
    g_rx = _rx_gain(rx)
    rx_dbm = tx_power_dbm + g_tx + g_rx - pl
    return 10.0 ** ((rx_dbm - params.noise_density_dbm_hz) / 10.0)


def _tx_gain(node):
    if isinstance(node, GroundUser):
        return 0.0
    if isinstance(node, Gateway):
        return ANTENNA_GAIN_DBI[NodeKind.GATEWAY]
    return node.antenna_gain_tx_dbi


def _rx_gain(node):
    if isinstance(node, GroundUser):
        return 0.0
    if isinstance(node, Gateway):
        return ANTENNA_GAIN_DBI[NodeKind.GATEWAY]
    return node.antenna_gain_rx_dbi


def rf_link_budget(tx, rx, tx_power_dbm, bandwidth_hz, params):
    """Full RF budget for a pair; zero bandwidth uses a 1 Hz reference
    for the SNR and reports zero rate."""
    lc = link_class(tx, rx)
    excess = params.excess_loss_db[lc]
    dist = distance_m(tx, rx)
    freq = params.rf_access_freq_hz if lc in ACCESS_CLASSES else params.rf_backhaul_freq_hz
    pl = rf_pathloss_db(dist, freq, excess)
    rx_dbm = tx_power_dbm + _tx_gain(tx) + _rx_gain(rx) - pl
    ref_band = bandwidth_hz if bandwidth_hz > 0 else 1.0
    noise_dbm = params.noise_density_dbm_hz + 10.0 * math.log10(ref_band)
    snr = 10.0 ** ((rx_dbm - noise_dbm) / 10.0)
    rate_hz = math.log2(1.0 + min(snr, params.snr_cap))
    return LinkBudget(
        distance_m=dist,
        medium=Medium.RF,
        pathloss_db=pl,
        rx_power_dbm=rx_dbm,
        snr=snr,
        rate_per_hz=rate_hz,
        max_rate_at_full_band_bps=bandwidth_hz * rate_hz,
    )


def fso_geometric_loss(divergence_rad, dist_m, rx_aperture_m):
    """Fraction of transmitted optical power captured by the receive
    aperture, clamped to 1 at short range."""
    if divergence_rad <= 0 or dist_m <= 0 or rx_aperture_m <= 0:
        raise ValueError("all inputs must be positive")
    return min(1.0, (rx_aperture_m / (divergence_rad * dist_m)) ** 2)


def fso_pointing_loss(misalignment_rad, divergence_rad):
    """Gaussian pointing loss; 1.0 at perfect alignment."""
    if divergence_rad <= 0:
        raise ValueError("divergence must be positive")
    if misalignment_rad < 0:
        raise ValueError("misalignment must be non-negative")
    return math.exp(-2.0 * (misalignment_rad / divergence_rad) ** 2)


def fso_link_budget(tx_pos, rx_pos, misalignment_rad, bandwidth_hz, params):
    dx = rx_pos[0] - tx_pos[0]
    dy = rx_pos[1] - tx_pos[1]
    dz = rx_pos[2] - tx_pos[2]
    dist = math.sqrt(dx * dx + dy * dy + dz * dz)
    if dist <= 0:
        raise ValueError("distance must be positive")
    geo = fso_geometric_loss(params.fso_divergence_rad, dist, params.fso_rx_aperture_m)
    point = fso_pointing_loss(misalignment_rad, params.fso_divergence_rad)
    atm = 10.0 ** (-params.fso_atm_attenuation_db_km * (dist / 1000.0) / 10.0)
    tx_w = 10.0 ** ((params.fso_tx_power_dbm - 30.0) / 10.0)
    rx_w = tx_w * params.fso_optics_efficiency * geo * point * atm
    snr = params.fso_rx_sensitivity_snr_ref * rx_w
    rate_hz = math.log2(1.0 + min(snr, params.snr_cap))
    rx_dbm = -math.inf if rx_w == 0.0 else 10.0 * math.log10(rx_w) + 30.0
    loss_db = params.fso_tx_power_dbm - rx_dbm
    return LinkBudget(
        distance_m=dist,
        medium=Medium.FSO,
        pathloss_db=loss_db,
        rx_power_dbm=rx_dbm,
        snr=snr,
        rate_per_hz=rate_hz,
        max_rate_at_full_band_bps=bandwidth_hz * rate_hz,
    )


def optimal_alignment(tx_pos, rx_pos):
    """Boresight (azimuth, elevation) of the tx->rx line of sight.
    Azimuth is measured from +x (east) in the ground plane; a vertical
    link reports azimuth 0 by convention."""
    dx = rx_pos[0] - tx_pos[0]
    dy = rx_pos[1] - tx_pos[1]
    dz = rx_pos[2] - tx_pos[2]
    if dx == 0.0 and dy == 0.0 and dz == 0.0:
        raise ValueError("coincident positions")
    horiz = math.hypot(dx, dy)
    azimuth = 0.0 if horiz == 0.0 else math.atan2(dy, dx)
    elevation = math.atan2(dz, horiz)
    return azimuth, elevation


def misalignment_angle(azimuth, elevation, tx_pos, rx_pos):
    """Angle between a pointing direction and the actual line of sight."""
    px = math.cos(elevation) * math.cos(azimuth)
    py = math.cos(elevation) * math.sin(azimuth)
    pz = math.sin(elevation)
    dx = rx_pos[0] - tx_pos[0]
    dy = rx_pos[1] - tx_pos[1]
    dz = rx_pos[2] - tx_pos[2]
    norm = math.sqrt(dx * dx + dy * dy + dz * dz)
    if norm == 0.0:
        raise ValueError("coincident positions")
    ux, uy, uz = dx / norm, dy / norm, dz / norm
    dot = px * ux + py * uy + pz * uz
    cx = py * uz - pz * uy
    cy = pz * ux - px * uz
    cz = px * uy - py * ux
    cross = math.sqrt(cx * cx + cy * cy + cz * cz)
    # atan2 keeps perfectly aligned pairs at exactly zero (acos would
    # round through the flat top of its domain)
    return math.atan2(cross, dot)


def _has_fso(node):
    if isinstance(node, GroundUser):
        return False
    return node.has_fso


def best_medium(tx, rx, params, rf_bandwidth_hz, fso_bandwidth_hz,
                rf_tx_power_dbm=None):
    """Pick RF or FSO for a back-haul pair by full-band rate; ties go to
    FSO (frees RF spectrum).  Access-class pairs are rejected: only RF
    can track moving ground users."""
    lc = link_class(tx, rx)
    if lc in ACCESS_CLASSES:
        raise AccessPairNotAllowed(str(lc))
    if rf_tx_power_dbm is None:
        rf_tx_power_dbm = _peak_power(tx)
    rf = rf_link_budget(tx, rx, rf_tx_power_dbm, rf_bandwidth_hz, params)
    if not (_has_fso(tx) and _has_fso(rx)):
        return rf
    fso = fso_link_budget(_position3(tx), _position3(rx), 0.0,
                          fso_bandwidth_hz, params)
    if fso.max_rate_at_full_band_bps >= rf.max_rate_at_full_band_bps:
        return fso
    return rf


def _peak_power(node):
    if isinstance(node, GroundUser):
        return node.peak_tx_power_dbm
    if isinstance(node, Gateway):
        return GATEWAY_TX_DBM
    return node.peak_tx_power_dbm
