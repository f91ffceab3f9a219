"""End-to-end experiment orchestration.

A sweep varies one power knob (ground-user transmit power for the
uplink figure, HAP peak power for the downlink figure) across modes and
back-haul bandwidth cases, averaging the per-user rate metric over
seeded replications.  Placement is optimized once per (mode,
replication) at the most generous operating point and the positions are
reused across the swept values, keeping curves comparable point to
point.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum

from skybridge.allocation import AllocationParams, allocate
from skybridge.association import (Direction, solve_access_greedy,
                                   solve_backhaul)
from skybridge.errors import IoFailure
from skybridge.placement import (PlacementParams, network_objective,
                                 shrink_and_realign)
from skybridge.scenario import Mode, NodeKind, build_scenario

# Trimmed search budget for experiment-scale placement runs.
SWEEP_PLACEMENT = PlacementParams(initial_radius_m=30_000.0,
                                  candidates_per_round=6,
                                  min_radius_m=4_000.0,
                                  max_rounds=3)


class SweptParameter(Enum):
    USER_TX_POWER = "UserTxPower"
    HAP_PEAK_POWER = "HapPeakPower"


@dataclass(frozen=True)
class SweepSpec:
    swept_parameter: SweptParameter
    values_dbm: tuple
    modes: tuple
    backhaul_bandwidth_cases_hz: tuple
    direction: Direction
    replications: int = 5
    base_seed: int = 1
    optimize_placement: bool = True
    placement: PlacementParams = SWEEP_PLACEMENT

    def __post_init__(self):
        if not self.values_dbm:
            raise ValueError("empty sweep values")
        if list(self.values_dbm) != sorted(set(self.values_dbm)):
            raise ValueError("sweep values must be strictly increasing")
        if self.replications < 1:
            raise ValueError("need at least one replication")


@dataclass(frozen=True)
class SweepRow:
    mode: Mode
    backhaul_hz: float
    swept_dbm: float
    mean_rate_bps: float
    min_rate_bps: float
    utility: float


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    rows: tuple
    # (mode, case, value, replication) -> AllocationResult, kept when
    # run_sweep(keep_results=True)
    point_results: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RunOverrides:
    user_tx_power_dbm: float = None
    hap_peak_power_dbm: float = None
    backhaul_bandwidth_hz: float = None
    optimize_placement: bool = False
    placement: PlacementParams = SWEEP_PLACEMENT
    alloc: AllocationParams = None


def _apply_overrides(scenario, overrides):
    if overrides.user_tx_power_dbm is not None:
        scenario = scenario.with_user_power(overrides.user_tx_power_dbm)
    if overrides.hap_peak_power_dbm is not None:
        scenario = scenario.with_station_power(NodeKind.HAP,
                                               overrides.hap_peak_power_dbm)
    return scenario


def _movable_ids(scenario, mode):
    kinds = {Mode.INTEGRATED: (NodeKind.HAP, NodeKind.TETHERED_BALLOON),
             Mode.SAT_PLUS_HAPS: (NodeKind.HAP,)}.get(mode, ())
    return [s.id for k in kinds for s in scenario.by_kind(k)]


def run_point(scenario, direction, mode, overrides=RunOverrides()):
    """One pipeline pass: back-haul -> (optional placement) -> greedy
    access -> allocate.  Deterministic."""
    scenario = _apply_overrides(scenario, overrides)
    alloc_params = overrides.alloc or AllocationParams()
    if overrides.backhaul_bandwidth_hz is not None:
        alloc_params = replace(alloc_params,
                               backhaul_bandwidth_hz=overrides.backhaul_bandwidth_hz)
    if overrides.optimize_placement:
        movable = _movable_ids(scenario, mode)
        if movable:
            objective = network_objective(direction, mode=mode,
                                          alloc_params=alloc_params)
            scenario, _ = shrink_and_realign(scenario, movable, objective,
                                             overrides.placement)
    backhaul = solve_backhaul(scenario)
    access = solve_access_greedy(scenario, direction, backhaul, alloc_params,
                                 mode=mode)
    return allocate(scenario, direction, access, backhaul, alloc_params)


def _sweep_unit(spec, config, mode, rep):
    """All (case, value) points for one mode and replication."""
    cfg = replace(config, seed=spec.base_seed + rep, mode=mode)
    scenario = build_scenario(cfg)

    if spec.optimize_placement:
        movable = _movable_ids(scenario, mode)
        if movable:
            # place at the most generous operating point and reuse
            ref = RunOverrides(
                user_tx_power_dbm=(spec.values_dbm[-1]
                                   if spec.swept_parameter == SweptParameter.USER_TX_POWER
                                   else None),
                hap_peak_power_dbm=(spec.values_dbm[-1]
                                    if spec.swept_parameter == SweptParameter.HAP_PEAK_POWER
                                    else None),
                backhaul_bandwidth_hz=spec.backhaul_bandwidth_cases_hz[-1],
            )
            placed = _apply_overrides(scenario, ref)
            alloc_params = AllocationParams(
                backhaul_bandwidth_hz=ref.backhaul_bandwidth_hz)
            objective = network_objective(spec.direction, mode=mode,
                                          alloc_params=alloc_params)
            params = replace(spec.placement, seed=spec.base_seed * 1009 + rep)
            placed, _ = shrink_and_realign(placed, movable, objective, params)
            # carry the optimized positions back to the unswept scenario
            for sid in movable:
                scenario = scenario.with_station_position(
                    sid, placed.station(sid).position)

    out = {}
    for case in spec.backhaul_bandwidth_cases_hz:
        for value in spec.values_dbm:
            overrides = RunOverrides(
                user_tx_power_dbm=(value if spec.swept_parameter ==
                                   SweptParameter.USER_TX_POWER else None),
                hap_peak_power_dbm=(value if spec.swept_parameter ==
                                    SweptParameter.HAP_PEAK_POWER else None),
                backhaul_bandwidth_hz=case,
            )
            out[(case, value)] = run_point(scenario, spec.direction, mode,
                                           overrides)
    return out


def run_sweep(spec, config, max_workers=1, keep_results=False):
    """Execute the sweep; rows are averaged over replications and
    ordered (mode, case, value).  Results are independent of
    `max_workers`."""
    units = [(mode, rep) for mode in spec.modes
             for rep in range(spec.replications)]
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            unit_results = dict(zip(units, pool.map(
                lambda mr: _sweep_unit(spec, config, mr[0], mr[1]), units)))
    else:
        unit_results = {mr: _sweep_unit(spec, config, mr[0], mr[1])
                        for mr in units}

    rows = []
    point_results = {}
    for mode in spec.modes:
        for case in spec.backhaul_bandwidth_cases_hz:
            for value in spec.values_dbm:
                means, mins, utils = [], [], []
                for rep in range(spec.replications):
                    result = unit_results[(mode, rep)][(case, value)]
                    means.append(result.mean_rate_bps)
                    mins.append(result.min_rate_bps)
                    utils.append(result.utility_value)
                    if keep_results:
                        point_results[(mode, case, value, rep)] = result
                n = spec.replications
                rows.append(SweepRow(mode, case, value,
                                     sum(means) / n, sum(mins) / n,
                                     sum(utils) / n))
    return SweepResult(spec=spec, rows=tuple(rows),
                       point_results=point_results)


def emit_csv(result, path):
    """Write sweep rows as CSV with shortest round-trip decimals."""
    if not result.rows:
        raise IoFailure("empty sweep result")
    lines = ["mode,backhaul_hz,swept_dbm,mean_rate_bps,min_rate_bps,utility"]
    for r in result.rows:
        # float() drops any numpy scalar wrapper so repr() is the plain
        # shortest round-trip decimal
        lines.append(f"{r.mode.value},{float(r.backhaul_hz)!r},"
                     f"{float(r.swept_dbm)!r},{float(r.mean_rate_bps)!r},"
                     f"{float(r.min_rate_bps)!r},{float(r.utility)!r}")
    try:
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def emit_plot(result, path):
    """Self-contained vector plot: rate vs swept dBm, log rate axis, one
    curve per (mode, bandwidth case)."""
    if not result.rows:
        raise IoFailure("empty sweep result")
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    curves = {}
    for r in result.rows:
        curves.setdefault((r.mode, r.backhaul_hz), []).append(
            (r.swept_dbm, max(r.mean_rate_bps, 1e-1)))
    multi_case = len(result.spec.backhaul_bandwidth_cases_hz) > 1
    for (mode, case), pts in curves.items():
        pts.sort()
        label = mode.value
        if multi_case:
            label += f" @ {case / 1e6:g} MHz"
        ax.semilogy([p[0] for p in pts], [p[1] for p in pts],
                    marker="o", label=label)
    swept = result.spec.swept_parameter
    ax.set_xlabel("ground user transmit power (dBm)"
                  if swept == SweptParameter.USER_TX_POWER
                  else "HAP peak power (dBm)")
    ax.set_ylabel("average %s rate (bit/s)" % result.spec.direction.value)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    try:
        fig.savefig(path)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    finally:
        plt.close(fig)
