"""skybridge command-line interface.

Subcommands: validate, run, sweep, place.  Exit codes: 0 success,
2 invalid configuration, 3 runtime failure.  All science inputs come
from files; SKYBRIDGE_LOG only tunes verbosity.
"""

import argparse
import json
import logging
import os
import sys

from skybridge import configio, harness
from skybridge.allocation import AllocationParams, allocate
from skybridge.association import (Direction, solve_access_greedy,
                                   solve_backhaul)
from skybridge.channel import best_medium, rf_link_budget
from skybridge.errors import InvalidConfig, SkybridgeError
from skybridge.placement import network_objective, shrink_and_realign
from skybridge.scenario import build_scenario, validate

EXIT_OK = 0
EXIT_INVALID_CONFIG = 2
EXIT_RUNTIME = 3

log = logging.getLogger("skybridge")

LINK_BUDGET_COLUMNS = ("tx,rx,distance_m,medium,pathloss_db,rx_power_dbm,"
                       "snr,rate_per_hz,max_rate_at_full_band_bps")


def _node(scenario, token):
    """Resolve 'user:3' / 'station:7' / 'gateway:12' to a node."""
    kind, _, raw = token.partition(":")
    ident = int(raw)
    if kind == "user":
        for u in scenario.users:
            if u.id == ident:
                return u
    elif kind == "station":
        return scenario.station(ident)
    elif kind == "gateway":
        return scenario.gateway(ident)
    raise InvalidConfig("node", f"cannot resolve {token!r}")


def _cmd_validate(args):
    config = configio.load_config(args.config)
    scenario = build_scenario(config)
    violations = validate(scenario)
    for v in violations:
        print(v)
    if violations:
        return EXIT_INVALID_CONFIG
    print(f"ok: {len(scenario.stations)} stations, {len(scenario.users)} users, "
          f"{len(scenario.gateways)} gateways")
    return EXIT_OK


def _cmd_run(args):
    config = configio.load_config(args.config)
    if args.mode:
        from skybridge.scenario import Mode
        from dataclasses import replace
        config = replace(config, mode=Mode(args.mode))
    scenario = build_scenario(config)
    direction = Direction(args.direction)
    alloc_params = AllocationParams()

    if args.dump_link_budget:
        tx = _node(scenario, args.dump_link_budget[0])
        rx = _node(scenario, args.dump_link_budget[1])
        params = config.channel
        try:
            budget = best_medium(tx, rx, params, 20e6, 2e9)
        except SkybridgeError:
            from skybridge.channel import _peak_power
            budget = rf_link_budget(tx, rx, _peak_power(tx), 20e6, params)
        print(LINK_BUDGET_COLUMNS)
        print(f"{args.dump_link_budget[0]},{args.dump_link_budget[1]},"
              f"{budget.distance_m!r},{budget.medium.value},"
              f"{budget.pathloss_db!r},{budget.rx_power_dbm!r},{budget.snr!r},"
              f"{budget.rate_per_hz!r},{budget.max_rate_at_full_band_bps!r}")
        return EXIT_OK

    backhaul = solve_backhaul(scenario)
    access = solve_access_greedy(scenario, direction, backhaul, alloc_params)
    result = allocate(scenario, direction, access, backhaul, alloc_params)

    if args.dump_associations:
        print("direction,user_id,station_id,parent_id,medium,estimated_rate_bps")
        for uid in sorted(access.assignment):
            sid = access.assignment[uid]
            if sid is None:
                print(f"{direction.value},{uid},,,unserved,0.0")
                continue
            pid = backhaul.parent.get(sid, "")
            medium = backhaul.medium.get(sid)
            medium = medium.value if medium else "core"
            rate = result.per_user[uid].effective_rate_bps
            print(f"{direction.value},{uid},{sid},{pid},{medium},{rate!r}")
        return EXIT_OK

    print(f"mode={config.mode.value} direction={direction.value} "
          f"mean_rate_bps={result.mean_rate_bps!r} "
          f"min_rate_bps={result.min_rate_bps!r} "
          f"utility={result.utility_value!r}")
    return EXIT_OK


def _cmd_sweep(args):
    config = configio.load_config(args.config)
    spec = configio.load_sweep_spec(args.spec)
    result = harness.run_sweep(spec, config, max_workers=args.workers)
    harness.emit_csv(result, args.out_csv)
    log.info("wrote %s", args.out_csv)
    if args.out_plot:
        harness.emit_plot(result, args.out_plot)
        log.info("wrote %s", args.out_plot)
    return EXIT_OK


def _cmd_place(args):
    config = configio.load_config(args.config)
    scenario = build_scenario(config)
    movable = harness._movable_ids(scenario, config.mode)
    if not movable:
        print("no movable stations in this mode", file=sys.stderr)
        return EXIT_INVALID_CONFIG
    direction = Direction(args.direction)
    objective = network_objective(direction, mode=config.mode)
    placed, trace = shrink_and_realign(scenario, movable, objective,
                                       harness.SWEEP_PLACEMENT)
    with open(args.out_patch, "w") as fh:
        json.dump(configio.positions_patch(placed, movable), fh, indent=2)
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write("round,station_id,radius_m,objective\n")
            for row in trace:
                fh.write(f"{row.round_index},{row.station_id},"
                         f"{row.radius_m!r},{row.objective!r}\n")
    print(f"optimized {len(movable)} stations; "
          f"objective {trace[0].objective!r} -> {trace[-1].objective!r}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="skybridge")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="build and validate a scenario")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("run", help="single end-to-end pipeline pass")
    p.add_argument("--config", required=True)
    p.add_argument("--mode", choices=["SatOnly", "SatPlusHaps", "Integrated"])
    p.add_argument("--direction", choices=["uplink", "downlink"],
                   default="uplink")
    p.add_argument("--dump-link-budget", nargs=2, metavar=("TX", "RX"))
    p.add_argument("--dump-associations", action="store_true")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="run a sweep spec, write CSV/plot")
    p.add_argument("--config", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out-plot")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("place", help="optimize aerial station placement")
    p.add_argument("--config", required=True)
    p.add_argument("--direction", choices=["uplink", "downlink"],
                   default="uplink")
    p.add_argument("--out-patch", required=True)
    p.add_argument("--trace")
    p.set_defaults(func=_cmd_place)
    return parser


def main(argv=None):
    logging.basicConfig(level=os.environ.get("SKYBRIDGE_LOG", "WARNING"))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidConfig as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID_CONFIG
    except SkybridgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
