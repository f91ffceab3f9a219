import math

from skybridge.channel import ChannelParams
from skybridge.scenario import (DEFAULT_ALTITUDES_M, Mode, ScenarioConfig,
                                SubArea, build_scenario)


def tiny_config(num_users=4, seed=0, gbs=1, tb=1, haps=1, gateways=1,
                area_m=20_000.0, mode=Mode.INTEGRATED, channel=None):
    """Small single-sub-area scenario for unit tests."""
    sub = SubArea(bounds=(0.0, area_m, 0.0, area_m), user_fraction=1.0,
                  gbs_count=gbs, tb_count=tb)
    return ScenarioConfig(
        area_size=(area_m, area_m),
        subareas=(sub,),
        num_users=num_users,
        num_haps=haps,
        num_gateways=gateways,
        altitudes_m=dict(DEFAULT_ALTITUDES_M),
        channel=channel or ChannelParams(),
        max_haps_per_backhaul=3,
        mode=mode,
        seed=seed,
    )


def tiny_scenario(**kwargs):
    return build_scenario(tiny_config(**kwargs))


def assert_close(a, b, rel=1e-12, abs_tol=0.0):
    assert math.isclose(a, b, rel_tol=rel, abs_tol=abs_tol), f"{a!r} != {b!r}"
