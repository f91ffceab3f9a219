"""Tethered-balloon battery tracking and energy causality.

TBs run on harvested renewable energy.  The causality rule is strict:
energy consumed in slot t must already be stored at the end of slot
t - 1; the slot's own harvest is banked only afterward.
"""

import math
from dataclasses import dataclass

import numpy as np

from skybridge.errors import CausalityViolation

# Power model defaults (unpublished for this system; relative behavior
# is what the experiments rely on).
DEFAULT_SLOT_S = 900.0            # 15 minutes
DEFAULT_P_OPERATING_W = 50.0
DEFAULT_P_PER_USER_W = 1.0
DEFAULT_P_SLEEP_W = 5.0
DEFAULT_TB_BATTERY_J = 7.2e6      # 2 kWh
DEFAULT_HARVEST_PEAK_W = 200.0


@dataclass(frozen=True)
class EnergyParams:
    p_operating_w: float = DEFAULT_P_OPERATING_W
    p_per_user_w: float = DEFAULT_P_PER_USER_W
    p_sleep_w: float = DEFAULT_P_SLEEP_W
    slot_duration_s: float = DEFAULT_SLOT_S


@dataclass(frozen=True)
class BatteryState:
    """Stored-energy trajectory of one TB.  `stored[t]` is the level at
    the end of slot t; `stored[-1]` doubles as the current level."""
    capacity_j: float
    stored_j: tuple
    slot_duration_s: float = DEFAULT_SLOT_S

    @classmethod
    def full(cls, capacity_j, slot_duration_s=DEFAULT_SLOT_S):
        return cls(capacity_j, (capacity_j,), slot_duration_s)

    @property
    def level_j(self):
        return self.stored_j[-1]


def step_energy(state, harvested_j, consumed_j):
    """Advance one slot: check causality against the prior level, then
    bank the harvest, clipping at capacity."""
    prior = state.level_j
    if consumed_j > prior:
        raise CausalityViolation(len(state.stored_j), consumed_j, prior)
    level = min(state.capacity_j, prior + harvested_j - consumed_j)
    level = max(0.0, level)
    return BatteryState(state.capacity_j, state.stored_j + (level,),
                        state.slot_duration_s)


def tb_consumption(n_users, tx_power_dbm, slot_duration_s,
                   params=EnergyParams(), sleeping=False):
    """Slot energy draw of one TB in joules."""
    if n_users < 0:
        raise ValueError("negative user count")
    if sleeping:
        return params.p_sleep_w * slot_duration_s
    p_tx_w = 10.0 ** ((tx_power_dbm - 30.0) / 10.0)
    return (params.p_operating_w + p_tx_w + n_users * params.p_per_user_w) * slot_duration_s


def diurnal_harvest_profile(n_slots, slot_duration_s=DEFAULT_SLOT_S,
                            peak_w=DEFAULT_HARVEST_PEAK_W, day_fraction=0.5):
    """Deterministic half-sine harvest schedule (daytime sun, zero at
    night).  Returns per-slot harvested joules."""
    day_slots = int(round(n_slots * day_fraction))
    out = np.zeros(n_slots)
    for t in range(day_slots):
        out[t] = peak_w * math.sin(math.pi * (t + 0.5) / day_slots) * slot_duration_s
    return out


def _simulate(initial_j, capacity_j, plan_on, demand_users, harvest_j,
              tx_power_dbm, params):
    """Forward-run a plan; returns final stored level or None when the
    plan violates causality somewhere."""
    level = initial_j
    for t, on in enumerate(plan_on):
        if on:
            need = tb_consumption(demand_users[t], tx_power_dbm,
                                  params.slot_duration_s, params)
            if need > level:
                return None
        else:
            # An empty battery can always idle: sleep draw is bounded by
            # whatever charge remains.
            need = min(level, tb_consumption(0, tx_power_dbm,
                                             params.slot_duration_s,
                                             params, sleeping=True))
        level = max(0.0, min(capacity_j, level + harvest_j[t] - need))
    return level


def sleep_schedule(battery, demand_users, harvest_j, tx_power_dbm=33.0,
                   params=EnergyParams()):
    """Greedy on/off plan for one TB over a horizon.

    A slot sleeps when it has no predicted demand, or when staying awake
    would make some future nonzero-demand slot infeasible (checked by
    forward simulation).  The returned plan never violates causality.
    """
    horizon = len(demand_users)
    plan = [False] * horizon
    for t in range(horizon):
        if demand_users[t] <= 0:
            continue
        candidate = list(plan)
        candidate[t] = True
        # keep the remaining demand slots on for the feasibility probe
        for f in range(t + 1, horizon):
            candidate[f] = demand_users[f] > 0
        if _simulate(battery.level_j, battery.capacity_j, candidate,
                     demand_users, harvest_j, tx_power_dbm, params) is not None:
            plan[t] = True
        # else: serving this slot would starve a later one; stay asleep
    # Final safety pass: drop any slot the greedy probe let through that
    # is infeasible once the actual prefix is fixed.
    level = battery.level_j
    for t in range(horizon):
        if plan[t]:
            need = tb_consumption(demand_users[t], tx_power_dbm,
                                  params.slot_duration_s, params)
            if need > level:
                plan[t] = False
        if not plan[t]:
            need = min(level, tb_consumption(0, tx_power_dbm,
                                             params.slot_duration_s,
                                             params, sleeping=True))
        level = max(0.0, min(battery.capacity_j, level + harvest_j[t] - need))
    return plan


def run_plan(battery, plan_on, demand_users, harvest_j, tx_power_dbm=33.0,
             params=EnergyParams()):
    """Execute a plan through `step_energy`, returning the final
    BatteryState.  Raises CausalityViolation if the plan is infeasible."""
    state = battery
    for t, on in enumerate(plan_on):
        if on:
            need = tb_consumption(demand_users[t], tx_power_dbm,
                                  params.slot_duration_s, params)
        else:
            need = min(state.level_j,
                       tb_consumption(0, tx_power_dbm, params.slot_duration_s,
                                      params, sleeping=True))
        state = step_energy(state, harvest_j[t], need)
    return state


def plan_energy(plan_on, demand_users, tx_power_dbm, params=EnergyParams()):
    """Total energy a plan consumes over the horizon."""
    total = 0.0
    for on, users in zip(plan_on, demand_users):
        if on:
            total += tb_consumption(users, tx_power_dbm, params.slot_duration_s, params)
        else:
            total += tb_consumption(0, tx_power_dbm, params.slot_duration_s,
                                    params, sleeping=True)
    return total
