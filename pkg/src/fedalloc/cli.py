"""Command-line entry point: ``fedalloc {gen,solve,sweep}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

from .serialization import load_scenario, result_to_dict, save_scenario
from .sim import GeneratorConfig, SweepSpec, _record, emit, generate_scenario, run_sweep
from .solver import ALL_SCHEMES, Scheme, SolverOptions, solve


def _csv_list(text, cast=str):
    return [cast(x) for x in text.split(",") if x.strip()]


def _config(args) -> GeneratorConfig:
    config = GeneratorConfig()
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            overrides = json.load(fh)
        for key in ("org_ring", "sensors_per_org", "sensor_ring"):
            if key in overrides:
                overrides[key] = tuple(overrides[key])
        config = replace(config, **overrides)
    if getattr(args, "orgs", None):
        config = replace(config, num_orgs=args.orgs)
    return config


def _options(args) -> SolverOptions:
    return SolverOptions(max_outer_iterations=args.max_iter)


def cmd_gen(args) -> None:
    config = _config(args)
    save_scenario(generate_scenario(config, args.seed), args.out, seed=args.seed, config=config)


def cmd_solve(args) -> None:
    scenario = load_scenario(args.scenario)
    result = solve(args.scheme, scenario, _options(args))
    fmt = args.format or ("csv" if str(args.out).endswith(".csv") else "json")
    if fmt == "csv":
        emit([_record(0, result.scheme, "none", 0.0, result)], "csv", args.out)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(result_to_dict(result), fh, indent=1)
            fh.write("\n")
    if not result.feasible:
        raise RuntimeError(f"infeasible scenario: {result.message}")


def cmd_sweep(args) -> None:
    spec = SweepSpec(args.param, _csv_list(args.values, float), args.trials, _csv_list(args.schemes))
    records = run_sweep(spec, _config(args), args.seed, _options(args), workers=args.workers)
    fmt = args.format or ("json" if str(args.out).endswith(".json") else "csv")
    emit(records, fmt, args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fedalloc", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a random scenario file")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.add_argument("--orgs", type=int, help="number of organizations")
    gen.add_argument("--config", help="JSON file of generator overrides")
    gen.set_defaults(func=cmd_gen)

    scheme_names = [s.value for s in ALL_SCHEMES]
    sol = sub.add_parser("solve", help="solve one scenario file")
    sol.add_argument("--scenario", required=True)
    sol.add_argument("--scheme", default=Scheme.PROPOSED.value, help=", ".join(scheme_names))
    sol.add_argument("--out", required=True)
    sol.add_argument("--format", choices=["json", "csv"])
    sol.add_argument("--max-iter", type=int, default=50)
    sol.set_defaults(func=cmd_solve)

    sw = sub.add_parser("sweep", help="Monte Carlo parameter sweep")
    sw.add_argument("--param", required=True)
    sw.add_argument("--values", required=True, help="comma-separated values")
    sw.add_argument("--trials", type=int, default=1)
    sw.add_argument("--schemes", default=",".join(scheme_names))
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--out", required=True)
    sw.add_argument("--format", choices=["json", "csv"])
    sw.add_argument("--config", help="JSON file of generator overrides")
    sw.add_argument("--workers", type=int, help="worker processes (default: FEDALLOC_THREADS or CPU count)")
    sw.add_argument("--max-iter", type=int, default=50)
    sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except Exception as exc:  # noqa: BLE001 - every failure maps to a diagnostic and exit code
        print(f"fedalloc: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
