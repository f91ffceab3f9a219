"""JSON configuration loading for scenarios and sweep specs.

The scenario file mirrors ScenarioConfig field for field (meters, Hz,
dBm); unknown keys are rejected with the offending path.  See
docs/schema.md for the full key list.
"""

import json

from skybridge.allocation import AllocationParams, UtilityMetric
from skybridge.association import Direction
from skybridge.channel import ChannelParams, LinkClass, DEFAULT_EXCESS_DB
from skybridge.errors import InvalidConfig
from skybridge.harness import SweepSpec, SweptParameter, SWEEP_PLACEMENT
from skybridge.placement import PlacementParams
from skybridge.scenario import (DEFAULT_ALTITUDES_M, Mode, ScenarioConfig,
                                SubArea)

_CHANNEL_KEYS = {
    "rf_access_freq_hz", "rf_backhaul_freq_hz", "noise_density_dbm_hz",
    "excess_loss_db", "fso_wavelength_m", "fso_divergence_rad",
    "fso_rx_aperture_m", "fso_atm_attenuation_db_km",
    "fso_optics_efficiency", "fso_tx_power_dbm",
    "fso_rx_sensitivity_snr_ref", "snr_cap",
}
_SUBAREA_KEYS = {"bounds", "user_fraction", "gbs_count", "tb_count"}
_CONFIG_KEYS = {
    "area_size", "subareas", "num_users", "num_haps", "num_gateways",
    "altitudes_m", "channel", "max_haps_per_backhaul", "mode", "seed",
}
_SWEEP_KEYS = {
    "swept_parameter", "values_dbm", "modes", "backhaul_bandwidth_cases_hz",
    "direction", "replications", "base_seed", "optimize_placement",
    "placement",
}
_PLACEMENT_KEYS = {"initial_radius_m", "candidates_per_round",
                   "min_radius_m", "max_rounds", "seed"}


def _reject_unknown(mapping, allowed, path):
    for key in mapping:
        if key not in allowed:
            raise InvalidConfig(f"{path}.{key}", "unknown key")


def _channel_from_dict(data, path="channel"):
    _reject_unknown(data, _CHANNEL_KEYS, path)
    kwargs = dict(data)
    if "excess_loss_db" in kwargs:
        raw = kwargs.pop("excess_loss_db")
        excess = dict(DEFAULT_EXCESS_DB)
        for name, value in raw.items():
            try:
                excess[LinkClass(name)] = float(value)
            except ValueError:
                raise InvalidConfig(f"{path}.excess_loss_db.{name}",
                                    "unknown link class") from None
        kwargs["excess_loss_db"] = excess
    return ChannelParams(**kwargs)


def config_from_dict(data):
    _reject_unknown(data, _CONFIG_KEYS, "config")
    try:
        subareas = []
        for i, sa in enumerate(data["subareas"]):
            _reject_unknown(sa, _SUBAREA_KEYS, f"config.subareas[{i}]")
            subareas.append(SubArea(
                bounds=tuple(float(v) for v in sa["bounds"]),
                user_fraction=float(sa["user_fraction"]),
                gbs_count=int(sa.get("gbs_count", 0)),
                tb_count=int(sa.get("tb_count", 0)),
            ))
        altitudes = dict(DEFAULT_ALTITUDES_M)
        altitudes.update(data.get("altitudes_m", {}))
        return ScenarioConfig(
            area_size=tuple(float(v) for v in data["area_size"]),
            subareas=tuple(subareas),
            num_users=int(data["num_users"]),
            num_haps=int(data["num_haps"]),
            num_gateways=int(data.get("num_gateways", 4)),
            altitudes_m=altitudes,
            channel=_channel_from_dict(data.get("channel", {})),
            max_haps_per_backhaul=int(data.get("max_haps_per_backhaul", 3)),
            mode=Mode(data.get("mode", "Integrated")),
            seed=int(data.get("seed", 1)),
        )
    except KeyError as exc:
        raise InvalidConfig(f"config.{exc.args[0]}", "missing key") from None
    except (TypeError, ValueError) as exc:
        raise InvalidConfig("config", str(exc)) from None


def load_config(path):
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidConfig(path, f"invalid JSON: {exc}") from None
    return config_from_dict(data)


def sweep_spec_from_dict(data):
    _reject_unknown(data, _SWEEP_KEYS, "sweep")
    try:
        placement = SWEEP_PLACEMENT
        if "placement" in data:
            _reject_unknown(data["placement"], _PLACEMENT_KEYS, "sweep.placement")
            placement = PlacementParams(**data["placement"])
        return SweepSpec(
            swept_parameter=SweptParameter(data["swept_parameter"]),
            values_dbm=tuple(float(v) for v in data["values_dbm"]),
            modes=tuple(Mode(m) for m in data["modes"]),
            backhaul_bandwidth_cases_hz=tuple(
                float(v) for v in data["backhaul_bandwidth_cases_hz"]),
            direction=Direction(data.get("direction", "uplink")),
            replications=int(data.get("replications", 5)),
            base_seed=int(data.get("base_seed", 1)),
            optimize_placement=bool(data.get("optimize_placement", True)),
            placement=placement,
        )
    except KeyError as exc:
        raise InvalidConfig(f"sweep.{exc.args[0]}", "missing key") from None
    except (TypeError, ValueError) as exc:
        raise InvalidConfig("sweep", str(exc)) from None


def load_sweep_spec(path):
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidConfig(path, f"invalid JSON: {exc}") from None
    return sweep_spec_from_dict(data)


def positions_patch(scenario, station_ids):
    """JSON-syntax patch with final positions for moved stations."""
    return {
        "stations": [
            {"id": sid, "position": list(scenario.station(sid).position)}
            for sid in station_ids
        ]
    }
