"""Shrink-and-re-align placement search for aerial stations.

Each movable station keeps a sampling disk (altitude is fixed per kind,
so the paper's spheres reduce to disks).  Per round-robin visit, K
candidate positions are drawn uniformly in the disk; the best strictly
improving candidate re-centers the disk, otherwise the radius halves.
A station is done when its radius drops below `min_radius`; the search
ends when every station is done or the round budget runs out.
"""

import math
from dataclasses import dataclass

import numpy as np

from skybridge.errors import NoMovableStations, PitchTooFine, TooManyStations


@dataclass(frozen=True)
class PlacementParams:
    initial_radius_m: float = 8_000.0
    candidates_per_round: int = 16
    min_radius_m: float = 50.0
    max_rounds: int = 200
    seed: int = 0

    def __post_init__(self):
        if not self.initial_radius_m > self.min_radius_m > 0:
            raise ValueError("need initial_radius > min_radius > 0")
        if self.candidates_per_round < 2:
            raise ValueError("need at least 2 candidates per round")


@dataclass
class PlacementTraceRow:
    round_index: int
    station_id: int
    radius_m: float
    objective: float
    moved: bool


def _clamp(x, lo, hi):
    return lo if x < lo else hi if x > hi else x


def shrink_and_realign(scenario, movable_station_ids, objective, params):
    """Optimize movable station positions against `objective(scenario)`.

    Returns (final_scenario, trace) where the trace's objective column
    is non-decreasing.  Deterministic for fixed (scenario, params).
    """
    ids = list(movable_station_ids)
    if not ids:
        raise NoMovableStations("empty movable set")
    rng = np.random.default_rng(params.seed)
    w, h = scenario.config.area_size

    current = scenario
    best_value = objective(current)
    radius = {sid: params.initial_radius_m for sid in ids}
    trace = [PlacementTraceRow(0, -1, params.initial_radius_m, best_value, False)]

    for round_index in range(1, params.max_rounds + 1):
        any_active = False
        for sid in ids:
            r = radius[sid]
            if r < params.min_radius_m:
                continue
            any_active = True
            cx, cy, alt = current.station(sid).position
            # uniform in the disk of radius r
            rho = r * np.sqrt(rng.uniform(0.0, 1.0, params.candidates_per_round))
            theta = rng.uniform(0.0, 2.0 * math.pi, params.candidates_per_round)
            best_candidate = None
            best_candidate_value = best_value
            for k in range(params.candidates_per_round):
                x = _clamp(cx + rho[k] * math.cos(theta[k]), 0.0, w)
                y = _clamp(cy + rho[k] * math.sin(theta[k]), 0.0, h)
                moved = current.with_station_position(sid, (x, y, alt))
                value = objective(moved)
                if value > best_candidate_value:
                    best_candidate_value = value
                    best_candidate = moved
            if best_candidate is not None:
                current = best_candidate
                best_value = best_candidate_value
                trace.append(PlacementTraceRow(round_index, sid, r, best_value, True))
            else:
                radius[sid] = r / 2.0
                trace.append(PlacementTraceRow(round_index, sid, radius[sid],
                                               best_value, False))
        if not any_active:
            break
    return current, trace


def grid_search(scenario, movable_station_ids, objective, pitch_m):
    """Exhaustive lattice oracle for validating the local search.

    Moves at most two stations jointly over the area lattice; guards
    keep the total evaluation count under 10^6."""
    ids = list(movable_station_ids)
    if not ids:
        raise NoMovableStations("empty movable set")
    if len(ids) > 2:
        raise TooManyStations(f"{len(ids)} movable stations, max 2")
    if pitch_m <= 0:
        raise ValueError("pitch must be positive")
    w, h = scenario.config.area_size
    xs = np.arange(0.0, w + pitch_m / 2, pitch_m)
    ys = np.arange(0.0, h + pitch_m / 2, pitch_m)
    lattice = [(x, y) for y in ys for x in xs]
    if len(lattice) ** len(ids) > 1_000_000:
        raise PitchTooFine(f"{len(lattice)} lattice points per station")

    best_value = -math.inf
    best_scenario = None
    if len(ids) == 1:
        sid = ids[0]
        alt = scenario.station(sid).position[2]
        for x, y in lattice:
            cand = scenario.with_station_position(sid, (x, y, alt))
            value = objective(cand)
            if value > best_value:
                best_value = value
                best_scenario = cand
    else:
        alt0 = scenario.station(ids[0]).position[2]
        alt1 = scenario.station(ids[1]).position[2]
        for x0, y0 in lattice:
            s0 = scenario.with_station_position(ids[0], (x0, y0, alt0))
            for x1, y1 in lattice:
                cand = s0.with_station_position(ids[1], (x1, y1, alt1))
                value = objective(cand)
                if value > best_value:
                    best_value = value
                    best_scenario = cand
    return best_scenario, best_value


def network_objective(direction, mode=None, alloc_params=None,
                      fiber_radius_m=None):
    """Objective factory: full re-solve of back-haul association, greedy
    access, and allocation, returning the configured utility."""
    from skybridge.allocation import AllocationParams, allocate
    from skybridge.association import (DEFAULT_FIBER_RADIUS_M,
                                       solve_access_greedy, solve_backhaul)

    if alloc_params is None:
        alloc_params = AllocationParams()
    if fiber_radius_m is None:
        fiber_radius_m = DEFAULT_FIBER_RADIUS_M

    def objective(scenario):
        backhaul = solve_backhaul(scenario, fiber_radius_m=fiber_radius_m)
        access = solve_access_greedy(scenario, direction, backhaul,
                                     alloc_params, mode=mode)
        result = allocate(scenario, direction, access, backhaul, alloc_params)
        return result.utility_value

    return objective
