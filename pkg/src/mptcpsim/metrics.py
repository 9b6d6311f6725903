"""Measurement pipeline: goodput, per-packet delay, scheduler and
congestion-control scores, coefficient of variation, ECDF/ECCDF series.

Goodput uses binary-unit megabits (divisions by 1024); per-packet delay is
derived from a packets-per-second figure at the 1514-byte on-wire MSS. The
scheduler score normalizes average goodput against the 200 Mbps two-path
theoretical maximum; controller scores average those over schedulers and
families, then weight by stability (score / coefficient of variation).
"""

import math
from dataclasses import dataclass, field

from .errors import (EmptyInputError, IncompleteGridError, SizeMismatchError,
                     ZeroBytesError)

THEORETICAL_MAX_GP_MBPS = 200.0
WIRE_MSS = 1514
DEFAULT_DURATION_S = 30.0


@dataclass
class RunResult:
    """One simulated test instance, as consumed by the score pipeline."""

    scenario: str
    family: str
    scheduler: str
    cca: str
    iteration: int
    sf_goodput_mbps: dict
    sf_retransmissions: dict
    delivered_bytes: int
    duration_s: float
    avg_ppd_ms: float = 0.0
    error: str = ""
    ofo_samples: list = field(default_factory=list)
    srtt_traces: dict = field(default_factory=dict)

    @property
    def aggregate_goodput_mbps(self):
        return sum(self.sf_goodput_mbps.values())

    def sort_key(self):
        return (self.scenario, self.scheduler, self.cca, self.iteration)


def goodput_mbps(nbytes, duration_s):
    if duration_s <= 0:
        raise ValueError("duration must be > 0")
    return nbytes * 8 / (duration_s * 1024 * 1024)


def per_packet_delay_ms(total_bytes, mss=WIRE_MSS, duration_s=DEFAULT_DURATION_S):
    if total_bytes <= 0:
        raise ZeroBytesError("per-packet delay undefined for zero bytes")
    pps = total_bytes / (mss * duration_s)
    return 1000.0 / pps


def ps_score(subscenario_avg_gp, family_size, max_gp=THEORETICAL_MAX_GP_MBPS):
    """Normalized aggregate goodput of one scheduler over one scenario family."""
    if len(subscenario_avg_gp) != family_size:
        raise SizeMismatchError(
            f"{len(subscenario_avg_gp)} sub-scenario averages for family of {family_size}")
    return sum(gp / (family_size * max_gp) for gp in subscenario_avg_gp)


def cca_scores(ps_by_family_scheduler, population_sigma=True):
    """Family scores, cross-family score, CV, and stability-weighted overall.

    Input maps family -> {scheduler -> PS score} for one controller. The
    overall score is absent (None) when the CV degenerates to zero or the
    mean is zero.
    """
    if not ps_by_family_scheduler:
        raise IncompleteGridError("no families")
    sched_sets = {frozenset(d) for d in ps_by_family_scheduler.values()}
    if len(sched_sets) != 1 or not next(iter(sched_sets)):
        raise IncompleteGridError("scheduler sets differ across families")
    per_family = {}
    for family, by_sched in ps_by_family_scheduler.items():
        vals = [by_sched[s] for s in sorted(by_sched)]
        per_family[family] = sum(v / len(vals) for v in vals)
    fam_vals = [per_family[f] for f in sorted(per_family)]
    cross = sum(v / len(fam_vals) for v in fam_vals)
    mean = sum(fam_vals) / len(fam_vals)
    var = sum((v - mean) ** 2 for v in fam_vals) / (
        len(fam_vals) if population_sigma else max(len(fam_vals) - 1, 1))
    sigma = math.sqrt(var)
    cv = sigma / mean if mean != 0 else None
    overall = cross / cv if cv else None
    return {"per_family": per_family, "cross_family": cross,
            "cv": cv, "overall": overall}


def ecdf(values):
    """Step series (x, P[X <= x]) over the sorted unique sample values."""
    if not values:
        raise EmptyInputError("ecdf of empty sample")
    ordered = sorted(values)
    n = len(ordered)
    out = []
    seen = 0
    for i, x in enumerate(ordered):
        seen = i + 1
        if i + 1 < n and ordered[i + 1] == x:
            continue
        out.append((x, seen / n))
    return out

def eccdf(values):
    """Step series (x, P[X >= x])."""
    if not values:
        raise EmptyInputError("eccdf of empty sample")
    ordered = sorted(values)
    n = len(ordered)
    out = []
    below = 0
    i = 0
    while i < n:
        x = ordered[i]
        out.append((x, (n - below) / n))
        while i < n and ordered[i] == x:
            i += 1
            below += 1
    return out


@dataclass
class ScoreTable:
    """All Eq.-derived aggregates for one result set."""

    ps_score: dict          # (cca, scheduler, family) -> score
    cca_per_family: dict    # (cca, family) -> score
    cca_score: dict         # cca -> score
    cca_cv: dict            # cca -> cv (or None)
    cca_overall: dict       # cca -> overall (or None)


def average_goodputs(results):
    """(scenario, scheduler, cca) -> mean aggregate goodput over iterations."""
    sums = {}
    counts = {}
    for r in sorted(results, key=RunResult.sort_key):
        key = (r.scenario, r.scheduler, r.cca)
        sums[key] = sums.get(key, 0.0) + r.aggregate_goodput_mbps
        counts[key] = counts.get(key, 0) + 1
    return {k: sums[k] / counts[k] for k in sums}


def build_score_table(results, families, population_sigma=True):
    """Full score pipeline over a result set.

    families maps family name -> ordered scenario ids. Pure aggregation:
    identical results produce an identical table bit for bit.
    """
    avg = average_goodputs(results)
    schedulers = sorted({r.scheduler for r in results})
    ccas = sorted({r.cca for r in results})
    ps = {}
    for cca in ccas:
        for sched in schedulers:
            for family, scenarios in families.items():
                gps = [avg[(sc, sched, cca)] for sc in scenarios
                       if (sc, sched, cca) in avg]
                if len(gps) != len(scenarios):
                    continue
                ps[(cca, sched, family)] = ps_score(gps, len(scenarios))
    cca_per_family = {}
    cca_score = {}
    cca_cv = {}
    cca_overall = {}
    for cca in ccas:
        by_family = {}
        for family in families:
            by_sched = {s: ps[(cca, s, family)] for s in schedulers
                        if (cca, s, family) in ps}
            if len(by_sched) == len(schedulers):
                by_family[family] = by_sched
        if len(by_family) != len(families):
            continue
        agg = cca_scores(by_family, population_sigma)
        for family, v in agg["per_family"].items():
            cca_per_family[(cca, family)] = v
        cca_score[cca] = agg["cross_family"]
        cca_cv[cca] = agg["cv"]
        cca_overall[cca] = agg["overall"]
    return ScoreTable(ps, cca_per_family, cca_score, cca_cv, cca_overall)
