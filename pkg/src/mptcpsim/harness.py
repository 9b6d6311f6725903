"""Matrix runner: seed derivation, parallel execution, CSV/trace emission.

Every run is an independent pure function of its spec plus a seed derived by
stable hashing of (master seed, scenario, scheduler, cca, iteration), so the
result set is identical at any parallelism level; emission sorts by run key
before writing, making reruns byte-identical.
"""

import csv
import os
from concurrent.futures import ProcessPoolExecutor

from .engine import derive_seed
from .metrics import (RunResult, average_goodputs, build_score_table, ecdf,
                      eccdf, goodput_mbps, per_packet_delay_ms)
from .simulation import RunSetup, Simulation

DEFAULT_MASTER_SEED = 42


def run_seed(master_seed, spec):
    return derive_seed(
        master_seed + spec.scenario.seed,
        f"{spec.scenario.id}|{spec.scheduler}|{spec.cca}|{spec.iteration}")


def run_single(spec, master_seed=DEFAULT_MASTER_SEED, trace=False):
    """Simulate one matrix cell; failures come back recorded, not raised."""
    sc = spec.scenario
    duration_ns = int(sc.duration_s * 1e9)
    setup = RunSetup(
        sf1=sc.sf1.to_path_config(),
        sf2=sc.sf2.to_path_config(),
        l3=sc.l3.to_path_config(),
        scheduler=spec.scheduler,
        cca=spec.cca,
        seed=run_seed(master_seed, spec),
        duration_ns=duration_ns,
        trace=trace,
    )
    try:
        out = Simulation(setup).run()
    except Exception as exc:   # a failed run must not sink the matrix
        return RunResult(
            scenario=sc.id, family=sc.family, scheduler=spec.scheduler,
            cca=spec.cca, iteration=spec.iteration,
            sf_goodput_mbps={1: 0.0, 2: 0.0}, sf_retransmissions={1: 0, 2: 0},
            delivered_bytes=0, duration_s=sc.duration_s,
            avg_ppd_ms=None, error=f"{type(exc).__name__}: {exc}")
    gp = {sf: goodput_mbps(b, sc.duration_s) for sf, b in out["sf_bytes"].items()}
    delivered = out["delivered_bytes"]
    ppd = (per_packet_delay_ms(delivered, duration_s=sc.duration_s)
           if delivered > 0 else None)
    return RunResult(
        scenario=sc.id, family=sc.family, scheduler=spec.scheduler,
        cca=spec.cca, iteration=spec.iteration,
        sf_goodput_mbps=gp, sf_retransmissions=out["sf_rtx"],
        delivered_bytes=delivered, duration_s=sc.duration_s,
        avg_ppd_ms=ppd,
        ofo_samples=out["ofo_samples"],
        srtt_traces=out["traces"] or {})


def _worker(args):
    spec, master_seed, trace = args
    return run_single(spec, master_seed, trace)


def execute(matrix, jobs=1, master_seed=DEFAULT_MASTER_SEED, trace=False,
            progress=None):
    """Run the whole matrix; returns results sorted by run key."""
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    specs = list(matrix.runs())
    results = []
    if jobs == 1:
        for i, spec in enumerate(specs):
            results.append(run_single(spec, master_seed, trace))
            if progress:
                progress(i + 1, len(specs))
    else:
        args = [(spec, master_seed, trace) for spec in specs]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for i, res in enumerate(pool.map(_worker, args, chunksize=4)):
                results.append(res)
                if progress:
                    progress(i + 1, len(specs))
    results.sort(key=RunResult.sort_key)
    return results


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit(results, out_dir, families, write_traces=False):
    """Write runs.csv, scores.csv, eccdf.csv, ecdf.csv, and optional traces."""
    if not results:
        raise ValueError("no results to emit")
    os.makedirs(out_dir, exist_ok=True)
    results = sorted(results, key=RunResult.sort_key)

    with open(os.path.join(out_dir, "runs.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scenario", "family", "scheduler", "cca", "iteration",
                    "sf1_gp", "sf2_gp", "agg_gp", "sf1_rtx", "sf2_rtx",
                    "avg_ppd_ms", "error"])
        for r in results:
            w.writerow([
                r.scenario, r.family, r.scheduler, r.cca, r.iteration,
                _fmt(r.sf_goodput_mbps.get(1, 0.0)),
                _fmt(r.sf_goodput_mbps.get(2, 0.0)),
                _fmt(r.aggregate_goodput_mbps),
                r.sf_retransmissions.get(1, 0), r.sf_retransmissions.get(2, 0),
                _fmt(r.avg_ppd_ms), r.error,
            ])

    table = build_score_table(results, families)
    with open(os.path.join(out_dir, "scores.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["table", "cca", "scheduler", "family", "value"])
        for (cca, sched, family) in sorted(table.ps_score):
            w.writerow(["ps_score", cca, sched, family,
                        _fmt(table.ps_score[(cca, sched, family)])])
        for (cca, family) in sorted(table.cca_per_family):
            w.writerow(["cca_score_per_family", cca, "", family,
                        _fmt(table.cca_per_family[(cca, family)])])
        for cca in sorted(table.cca_score):
            w.writerow(["cca_score", cca, "", "", _fmt(table.cca_score[cca])])
        for cca in sorted(table.cca_cv):
            w.writerow(["cca_cv", cca, "", "", _fmt(table.cca_cv[cca])])
        for cca in sorted(table.cca_overall):
            w.writerow(["cca_overall_score", cca, "", "",
                        _fmt(table.cca_overall[cca])])

    avg = average_goodputs(results)
    ppd_avg = _average_ppd(results)
    combos = sorted({(r.cca, r.scheduler) for r in results})
    with open(os.path.join(out_dir, "eccdf.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["cca", "scheduler", "goodput_mbps", "p_ge"])
        for cca, sched in combos:
            vals = [v for (sc, s, c), v in avg.items()
                    if s == sched and c == cca]
            if not vals:
                continue
            for x, p in eccdf(vals):
                w.writerow([cca, sched, _fmt(x), _fmt(p)])
    with open(os.path.join(out_dir, "ecdf.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["cca", "scheduler", "avg_ppd_ms", "p_le"])
        for cca, sched in combos:
            vals = [v for (sc, s, c), v in ppd_avg.items()
                    if s == sched and c == cca]
            if not vals:
                continue
            for x, p in ecdf(vals):
                w.writerow([cca, sched, _fmt(x), _fmt(p)])

    if write_traces:
        trace_dir = os.path.join(out_dir, "traces")
        os.makedirs(trace_dir, exist_ok=True)
        for r in results:
            if not r.srtt_traces and not r.ofo_samples:
                continue
            run_id = f"{r.scenario}__{r.scheduler}__{r.cca}__i{r.iteration}"
            with open(os.path.join(trace_dir, f"{run_id}.log"), "w") as fh:
                for sf, rows in sorted(r.srtt_traces.items()):
                    for (t, sf_id, cwnd, ssthresh, srtt, flight) in rows or []:
                        fh.write(f"{t} ack {sf_id} cwnd={cwnd} "
                                 f"ssthresh={ssthresh} srtt={srtt} flight={flight}\n")
                for (t, nbytes, nsegs) in r.ofo_samples:
                    fh.write(f"{t} ofo - bytes={nbytes} segments={nsegs}\n")


def _average_ppd(results):
    """{(scenario, scheduler, cca) -> mean avg_ppd_ms over iterations};
    one distribution point per sub-scenario."""
    sums = {}
    counts = {}
    for r in results:
        if r.avg_ppd_ms is None:
            continue
        key = (r.scenario, r.scheduler, r.cca)
        sums[key] = sums.get(key, 0.0) + r.avg_ppd_ms
        counts[key] = counts.get(key, 0) + 1
    out = {}
    for (sc, sched, cca), total in sums.items():
        out[(sc, sched, cca)] = total / counts[(sc, sched, cca)]
    return out


def load_runs_csv(path):
    """Rebuild RunResults from a runs.csv (enough for score recomputation)."""
    results = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            results.append(RunResult(
                scenario=row["scenario"], family=row["family"],
                scheduler=row["scheduler"], cca=row["cca"],
                iteration=int(row["iteration"]),
                sf_goodput_mbps={1: float(row["sf1_gp"] or 0),
                                 2: float(row["sf2_gp"] or 0)},
                sf_retransmissions={1: int(row["sf1_rtx"] or 0),
                                    2: int(row["sf2_rtx"] or 0)},
                delivered_bytes=0,
                duration_s=30.0,
                avg_ppd_ms=float(row["avg_ppd_ms"]) if row["avg_ppd_ms"] else None,
                error=row.get("error", ""),
            ))
    return results
