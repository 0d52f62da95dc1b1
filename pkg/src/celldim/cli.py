"""Command-line entry point.

Subcommands: ``dimension`` (one point), ``sweep`` (figure presets or a custom
axis), ``validate`` (oracle cross-checks) and ``dump`` (intermediate CSVs).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .dimensioning import (FIGURES, MODES, SWEEP_AXES, UHF_BAND_MHZ, RunOptions, SweepPoint,
                           UnicastDimensioner, make_points, rows_csv, sweep, unicast_traffic)
from .geometry import build_layout, layout_csv
from .scenario import (MORPHOLOGIES, ConfigError, dump_config, efficiency_profile,
                       load_config, preset_scenario, ServiceConfig)
from .sfn import simulate_sinr_distribution
from .traffic import build_classes
from .unicast import solve_load

log = logging.getLogger("celldim")

DEFAULT_SEED = 1


class UsageError(Exception):
    pass


def _resolve_seed(arg) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("CELLDIM_SEED")
    if env is None or env == "":
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"CELLDIM_SEED must be an integer, got {env!r}") from None


def _bundle(args, morphology: str | None):
    """(scenario, service, efficiency overrides) from --config and/or a morphology."""
    if args.config:
        try:
            parsed = load_config(args.config, preset=morphology)
        except FileNotFoundError:
            raise UsageError(f"config file not found: {args.config}") from None
        overrides = {}
        if parsed.efficiency_overrides:
            overrides[parsed.mode] = parsed.efficiency_overrides
        return parsed.scenario, parsed.service, overrides
    return preset_scenario(morphology or "rural"), ServiceConfig(), {}


def _options(args) -> RunOptions:
    opts = RunOptions()
    if args.samples is not None:
        if args.samples < 10_000:
            raise UsageError("--samples must be >= 10000")
        opts = replace(opts, n_samples=args.samples)
    if getattr(args, "unicast_samples", None) is not None:
        opts = replace(opts, unicast_samples=args.unicast_samples)
    return opts


def _config_hash(scenario, service, efficiency) -> str:
    text = dump_config(scenario, service, efficiency_profile(scenario, "broadcast"))
    text += json.dumps(efficiency, sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()


def _write_outputs(csv_text: str, rows, args, seed: int, config_hash: str) -> None:
    if not args.out:
        sys.stdout.write(csv_text)
        return
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(csv_text.encode())
    manifest = {
        "command_line": sys.argv,
        "config_hash": config_hash,
        "seed": seed,
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "point_runtimes_s": [
            {"axis_value": str(r.point.value), "mode": r.point.mode,
             "antennas": r.point.antennas, "runtime_s": round(r.runtime_s, 3)}
            for r in rows],
    }
    out.with_suffix(".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    log.info("wrote %s", out)


def _infeasible(rows) -> bool:
    for r in rows:
        if r.result is None or r.result.status != "ok":
            return True
        if not r.result.bw_required <= UHF_BAND_MHZ:
            return True
    return False


def _run_rows(points, args, seed, opts, config_hash) -> int:
    rows = sweep(points, seed=seed, opts=opts, jobs=max(1, args.jobs))
    _write_outputs(rows_csv(rows), rows, args, seed, config_hash)
    for r in rows:
        if r.result is None:
            log.warning("point %s/%s/%s failed: %s", r.point.value, r.point.mode,
                        r.point.antennas, r.error)
    return 1 if args.strict and _infeasible(rows) else 0


def cmd_dimension(args) -> int:
    seed = _resolve_seed(args.seed)
    if args.preset is not None and args.preset not in MORPHOLOGIES:
        raise UsageError(f"--preset for dimension must be one of {MORPHOLOGIES}")
    scenario, service, eff = _bundle(args, args.preset)
    if args.isd is not None:
        scenario = replace(scenario, isd=args.isd)
    opts = _options(args)
    ant = f"{scenario.bs_antenna_count}x{scenario.rx_antenna_count}"
    point = SweepPoint("isd", scenario.isd, args.mode, ant, scenario, service, eff)
    code = _run_rows([point], args, seed, opts, _config_hash(scenario, service, eff))
    _dump_side_outputs(args, scenario, service, seed, opts)
    return code


def cmd_sweep(args) -> int:
    seed = _resolve_seed(args.seed)
    opts = _options(args)
    if args.preset in FIGURES:
        fig = FIGURES[args.preset]
        if args.axis or args.values:
            raise UsageError("--axis/--values cannot be combined with a figure preset")
        scenario, service, eff = _bundle(args, fig.morphology)
        axis, values, modes, antennas = fig.axis, fig.values, fig.modes, fig.antennas
    else:
        if args.preset is not None and args.preset not in MORPHOLOGIES:
            raise UsageError(f"--preset must be one of {sorted(FIGURES)} or {MORPHOLOGIES}")
        if not args.axis or not args.values:
            raise UsageError("a custom sweep needs --axis and --values")
        scenario, service, eff = _bundle(args, args.preset)
        axis = args.axis
        values = [v if axis == "antennas" else float(v) if axis != "extra_programs" else int(v)
                  for v in args.values.split(",") if v.strip()]
        modes = (args.mode,)
        antennas = None
    try:
        points = make_points(axis, values, scenario, service, modes, antennas, eff)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return _run_rows(points, args, seed, opts, _config_hash(scenario, service, eff))


def _dump_side_outputs(args, scenario, service, seed, opts) -> None:
    if args.dump_layout:
        regional = build_layout(scenario.isd, scenario.interferer_rings, region_split=True)
        Path(args.dump_layout).write_text(layout_csv(regional))
    if args.dump_sinr:
        layout = build_layout(scenario.isd, scenario.interferer_rings)
        dist = simulate_sinr_distribution(layout, scenario, opts.n_samples, seed)
        Path(args.dump_sinr).write_text(dist.cdf_csv())
    if args.dump_classes:
        Path(args.dump_classes).write_text(_classes_csv(scenario, service, seed, opts))


def _classes_csv(scenario, service, seed, opts) -> str:
    """Streaming classes at the dimensioned unicast bandwidth (or the search
    ceiling when infeasible)."""
    prof = efficiency_profile(scenario, "unicast")
    rho, hd = unicast_traffic(scenario, service)
    dim = UnicastDimensioner(scenario, service, prof, rho, hd, seed, opts)
    point = dim.search(opts.ceiling)
    bw = point.bw if point is not None else opts.ceiling
    sol = solve_load(scenario, dim.layout, rho * hd, rho * (1 - hd), bw, seed,
                     r_hd=service.r_hd, r_sd=service.r_sd, model=dim.load_model)
    return build_classes(dim.sampler.distribution(sol.x), service.class_width, prof,
                         service, rho, hd).csv()


def cmd_dump(args) -> int:
    seed = _resolve_seed(args.seed)
    if args.preset is not None and args.preset not in MORPHOLOGIES:
        raise UsageError(f"--preset for dump must be one of {MORPHOLOGIES}")
    scenario, service, _ = _bundle(args, args.preset)
    opts = _options(args)
    if args.what == "layout":
        text = layout_csv(build_layout(scenario.isd, scenario.interferer_rings,
                                       region_split=True))
    elif args.what == "sinr":
        layout = build_layout(scenario.isd, scenario.interferer_rings,
                              region_split=args.regional)
        text = simulate_sinr_distribution(layout, scenario, opts.n_samples, seed,
                                          regional=args.regional).cdf_csv()
    elif args.what == "classes":
        text = _classes_csv(scenario, service, seed, opts)
    else:
        text = dump_config(scenario, service, efficiency_profile(scenario, "broadcast"))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_validate(args) -> int:
    from .validation import run_checks
    failures = 0
    for name, ok, detail in run_checks(quick=args.quick):
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        failures += not ok
    print(f"{failures} failure(s)")
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config file (INI); missing keys fall back to the preset")
    common.add_argument("--seed", type=int, default=None,
                        help=f"RNG seed (default: $CELLDIM_SEED or {DEFAULT_SEED})")
    common.add_argument("--samples", type=int, default=None,
                        help="SFN Monte Carlo users per run (default 100000, min 10000)")
    common.add_argument("--unicast-samples", type=int, default=None,
                        help="unicast SINR users per run (default 20000)")
    common.add_argument("--out", help="output CSV path (default: stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--jobs", type=int, default=1, help="worker processes")
    run.add_argument("--strict", action="store_true",
                     help="exit 1 if any point is infeasible or exceeds 320 MHz")

    p = argparse.ArgumentParser(prog="celldim", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dimension", parents=[common, run], help="dimension a single scenario")
    d.add_argument("--preset", help="rural or urban")
    d.add_argument("--mode", choices=MODES, default="broadcast")
    d.add_argument("--isd", type=float, help="inter-site distance override in metres")
    d.add_argument("--dump-layout", metavar="PATH")
    d.add_argument("--dump-sinr", metavar="PATH")
    d.add_argument("--dump-classes", metavar="PATH")
    d.set_defaults(func=cmd_dimension)

    s = sub.add_parser("sweep", parents=[common, run], help="parameter sweep")
    s.add_argument("--preset", help=f"figure preset ({', '.join(sorted(FIGURES))}) or morphology")
    s.add_argument("--axis", choices=SWEEP_AXES)
    s.add_argument("--values", help="comma-separated axis values, e.g. 4000,8000 or 4x1,4x4")
    s.add_argument("--mode", choices=MODES, default="broadcast")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("validate", help="run oracle cross-checks")
    v.add_argument("--quick", action="store_true", help="skip the Monte Carlo oracles")
    v.set_defaults(func=cmd_validate)

    u = sub.add_parser("dump", parents=[common], help="write intermediate data as CSV")
    u.add_argument("what", choices=("layout", "sinr", "classes", "config"))
    u.add_argument("--preset", help="rural or urban")
    u.add_argument("--regional", action="store_true", help="regional SFN for 'sinr'")
    u.set_defaults(func=cmd_dump)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        parser.print_usage(sys.stderr)
        print(f"celldim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
