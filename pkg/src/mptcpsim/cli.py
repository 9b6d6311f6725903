"""Command line: run the matrix, recompute scores, list the configuration.

Exit code 0 when every run in the matrix succeeded, 1 when any run recorded
a failure (the matrix always completes).
"""

import argparse
import sys

from .harness import (DEFAULT_MASTER_SEED, emit, execute, load_runs_csv)
from .metrics import build_score_table
from .scenarios import load_matrix


def _filter_matrix(matrix, scheduler=None, cca=None, scenario=None):
    if scheduler:
        if scheduler not in matrix.schedulers:
            raise SystemExit(f"scheduler {scheduler!r} not in matrix")
        matrix.schedulers = [scheduler]
    if cca:
        if cca not in matrix.ccas:
            raise SystemExit(f"cca {cca!r} not in matrix")
        matrix.ccas = [cca]
    if scenario:
        keep = [sc for sc in matrix.scenarios if sc.id == scenario]
        if not keep:
            raise SystemExit(f"scenario {scenario!r} not in matrix")
        matrix.scenarios = keep
    return matrix


def cmd_run(args):
    matrix = load_matrix(args.config)
    _filter_matrix(matrix, args.scheduler, args.cca, args.scenario)
    if args.iterations:
        matrix.iterations = args.iterations
    total = len(matrix)

    def progress(done, n):
        if args.quiet:
            return
        if done % 25 == 0 or done == n:
            print(f"\r{done}/{n} runs", end="", file=sys.stderr, flush=True)

    results = execute(matrix, jobs=args.jobs, master_seed=args.seed,
                      trace=args.traces, progress=progress)
    if not args.quiet:
        print(file=sys.stderr)
    emit(results, args.out, matrix.families(), write_traces=args.traces)
    failures = [r for r in results if r.error]
    print(f"{total} runs -> {args.out} ({len(failures)} failed)")
    for r in failures[:10]:
        print(f"  FAILED {r.scenario}/{r.scheduler}/{r.cca}/i{r.iteration}: {r.error}")
    return 1 if failures else 0


def cmd_score(args):
    results = load_runs_csv(args.runs)
    matrix = load_matrix(args.config)
    emit(results, args.out, matrix.families())
    table = build_score_table(results, matrix.families())
    ranked = sorted(
        ((v, cca) for cca, v in table.cca_overall.items() if v is not None),
        reverse=True)
    print("cca_overall_score ranking:")
    for v, cca in ranked:
        print(f"  {cca:8s} {v:.4f}")
    return 0


def cmd_list(args):
    matrix = load_matrix(args.config)
    print(f"schedulers: {', '.join(matrix.schedulers)}")
    print(f"ccas:       {', '.join(matrix.ccas)}")
    print(f"iterations: {matrix.iterations}")
    print(f"duration:   {matrix.duration_s} s")
    print(f"scenarios ({len(matrix.scenarios)}):")
    for sc in matrix.scenarios:
        print(f"  {sc.id:22s} {sc.family:28s} "
              f"sf1={sc.sf1.bw_mbps:g}Mbps/{sc.sf1.rtt_ms:g}ms/{sc.sf1.loss_pct:g}%  "
              f"sf2={sc.sf2.bw_mbps:g}Mbps/{sc.sf2.rtt_ms:g}ms/{sc.sf2.loss_pct:g}%")
    print(f"total runs: {len(matrix)}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="mptcpsim",
        description="Deterministic two-subflow MPTCP scheduler/CCA simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate the scenario matrix")
    p_run.add_argument("--config", default=None, help="matrix INI (default: built-in)")
    p_run.add_argument("--out", default="out", help="output directory")
    p_run.add_argument("--jobs", type=int, default=1, help="parallel workers")
    p_run.add_argument("--seed", type=int, default=DEFAULT_MASTER_SEED)
    p_run.add_argument("--scheduler", default=None, help="restrict to one scheduler")
    p_run.add_argument("--cca", default=None, help="restrict to one CCA")
    p_run.add_argument("--scenario", default=None, help="restrict to one scenario id")
    p_run.add_argument("--iterations", type=int, default=None,
                       help="override iteration count")
    p_run.add_argument("--traces", action="store_true",
                       help="collect and emit per-run trace logs")
    p_run.add_argument("--quiet", action="store_true")
    p_run.set_defaults(fn=cmd_run)

    p_score = sub.add_parser("score", help="recompute score tables from runs.csv")
    p_score.add_argument("runs", help="path to runs.csv")
    p_score.add_argument("--config", default=None)
    p_score.add_argument("--out", default="out", help="output directory")
    p_score.set_defaults(fn=cmd_score)

    p_list = sub.add_parser("list", help="print the matrix")
    p_list.add_argument("--config", default=None)
    p_list.set_defaults(fn=cmd_list)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
