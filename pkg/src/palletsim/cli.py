"""Command line: simulate, compare, render and validate scenarios.

Exit codes: 0 success, 2 configuration error, 3 simulation failure,
4 output could not be written.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .config import ConfigError, parse_bundle, table2_bundle_path
from .harness import CompareError, run_compare, run_scenario
from .kpi import comparison_table, emit_report
from .render import render_layout

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 2, 3, 4


def _load(path: str) -> list:
    if path == "table2":
        path = table2_bundle_path()
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"{p}: no such file")
    return parse_bundle(p)


def _apply_plan_flags(scenarios, args) -> list:
    out = []
    for s in scenarios:
        plan = s.plan
        if args.days is not None:
            plan = dataclasses.replace(plan, n_days=args.days)
        if args.warm_up is not None:
            plan = dataclasses.replace(plan, warm_up_days=args.warm_up)
        if args.replications is not None:
            plan = dataclasses.replace(plan, replications=args.replications)
        out.append(dataclasses.replace(s, plan=plan))
    return out


def _formats(args) -> tuple:
    chosen = tuple(f for f, on in (("csv", args.csv), ("json", args.json)) if on)
    return chosen or ("csv", "json")


def cmd_simulate(args) -> int:
    scenarios = _apply_plan_flags(_load(args.scenario), args)
    out = Path(args.out)
    reports = []
    for s in scenarios:
        report, results = run_scenario(s, seed=args.seed, parallel=args.parallel, log=args.log)
        reports.append(report)
        if args.log:
            from .engine import write_event_log
            sub = out / s.name
            sub.mkdir(parents=True, exist_ok=True)
            for r in results:
                write_event_log(r.log, sub / f"events_rep{r.replication:02d}.ndjson")
    emit_report(reports, out, _formats(args) + ("txt",))
    print(comparison_table(reports))
    return EXIT_OK


def cmd_compare(args) -> int:
    scenarios = _apply_plan_flags(_load(args.bundle), args)
    if args.only:
        keep = set(args.only.split(","))
        scenarios = [s for s in scenarios if s.name in keep]
    cmp = run_compare(scenarios, seed=args.seed, parallel=args.parallel, out_dir=args.out,
                      formats=_formats(args), write_logs=args.log)
    print(cmp.table())
    return EXIT_OK


def cmd_render(args) -> int:
    scenarios = _load(args.scenario)
    out = Path(args.out)
    if len(scenarios) == 1 and out.suffix == ".svg":
        targets = [(scenarios[0], out)]
    else:
        out.mkdir(parents=True, exist_ok=True)
        targets = [(s, out / f"{s.name}.svg") for s in scenarios]
    for s, path in targets:
        render_layout(s, path)
        print(path)
    return EXIT_OK


def cmd_validate(args) -> int:
    for s in _load(args.scenario):
        layout = s.build_layout()
        zones = {z.value: n for z, n in layout.zone_counts().items() if n}
        print(f"{s.name}: ok  variant={s.variant} policy={s.policy.value} "
              f"slots={layout.n_slots} zones={zones}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="palletsim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def run_flags(sp):
        sp.add_argument("--seed", type=int, default=None, help="master seed (default: from config)")
        sp.add_argument("--replications", type=int, default=None)
        sp.add_argument("--days", type=int, default=None, help="simulated days after warm-up")
        sp.add_argument("--warm-up", type=int, default=None, dest="warm_up", help="warm-up days")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--parallel", type=int, default=1, help="worker processes")
        sp.add_argument("--csv", action="store_true", help="write the CSV report")
        sp.add_argument("--json", action="store_true", help="write the JSON report")
        sp.add_argument("--log", action="store_true", help="also write NDJSON event logs")

    sp = sub.add_parser("simulate", help="run one scenario file (or every scenario in a bundle)")
    sp.add_argument("scenario")
    run_flags(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("compare", help="run a bundle under common random numbers")
    sp.add_argument("bundle", help="bundle file, or 'table2' for the shipped comparison")
    sp.add_argument("--only", default=None, help="comma-separated scenario names")
    run_flags(sp)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("render", help="write an SVG plan of the layout")
    sp.add_argument("scenario")
    sp.add_argument("--out", default="layout.svg", help="SVG file, or directory for bundles")
    sp.set_defaults(func=cmd_render)

    sp = sub.add_parser("validate", help="parse and check a scenario file")
    sp.add_argument("scenario")
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CompareError, RuntimeError) as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
