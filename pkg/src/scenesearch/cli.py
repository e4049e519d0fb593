"""Command-line entry point.

Subcommands:
  suite   build a deterministic evaluation suite file
  run     run an agent over a suite, writing per-episode results
  report  aggregate results into CSV and an aligned text table
  trace   run one episode with full belief-trace retention

Exit codes: 0 success, 1 configuration error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import bench
from .bench import AGENT_NAMES, RunConfig


def _load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    with open(path) as fh:
        return RunConfig.from_json(json.load(fh))


def _cmd_suite(args) -> int:
    records = bench.build_suite(args.seed, args.per_category)
    bench.write_suite(records, args.out)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def _cmd_run(args) -> int:
    cfg = _load_config(args.config)
    cfg = RunConfig(
        noise=cfg.noise,
        planner=cfg.planner,
        camera=cfg.camera,
        num_particles=cfg.num_particles,
        jitter_std=cfg.jitter_std,
        master_seed=args.seed,
        jobs=args.jobs,
    )
    records = bench.read_suite(args.suite)
    results = bench.run_suite(records, args.agent, cfg, jobs=args.jobs)
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, f"results_{args.agent}.json")
    bench.write_results(results, out_path)
    n_success = sum(r.success for r in results)
    print(f"{args.agent}: {n_success}/{len(results)} episodes succeeded -> {out_path}")
    return 0


def _cmd_report(args) -> int:
    results = []
    for path in args.results:
        results.extend(bench.read_results(path))
    rows = bench.aggregate(results)
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "report.csv")
    with open(csv_path, "w") as fh:
        fh.write(bench.metrics_csv(rows))
    text = bench.metrics_text(rows)
    with open(os.path.join(args.out, "report.txt"), "w") as fh:
        fh.write(text)
    print(text, end="")
    return 0


def _cmd_trace(args) -> int:
    cfg = _load_config(args.config)
    cfg = RunConfig(
        noise=cfg.noise,
        planner=cfg.planner,
        camera=cfg.camera,
        num_particles=cfg.num_particles,
        jitter_std=cfg.jitter_std,
        master_seed=args.seed,
    )
    records = bench.read_suite(args.suite)
    if not 0 <= args.index < len(records):
        raise bench.BenchError(f"record index {args.index} out of range")
    _, trace = bench.run_episode(
        records[args.index], args.agent, cfg, scene_id=args.index, collect_trace=True
    )
    bench.export_trace(trace, args.out)
    print(f"wrote trace with {len(trace['steps'])} steps to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scenesearch")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("suite", help="build an evaluation suite file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--per-category", type=int, default=100)
    p.add_argument("--out", default="suite.json")
    p.set_defaults(func=_cmd_suite)

    p = sub.add_parser("run", help="run an agent over a suite")
    p.add_argument("--agent", choices=AGENT_NAMES, required=True)
    p.add_argument("--suite", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=".")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("report", help="aggregate result files into a report")
    p.add_argument("--results", nargs="+", required=True)
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("trace", help="run one episode with trace retention")
    p.add_argument("--agent", choices=AGENT_NAMES, default="aif")
    p.add_argument("--suite", required=True)
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None)
    p.add_argument("--out", default="trace.json")
    p.set_defaults(func=_cmd_trace)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
