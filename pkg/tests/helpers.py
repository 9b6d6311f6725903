"""Shared test scaffolding: bare subflows, fake scheduler views, tiny runs."""

from types import SimpleNamespace

from mptcpsim.congestion import make_ccas
from mptcpsim.congestion.base import RenoCc
from mptcpsim.links import PathConfig
from mptcpsim.simulation import RunSetup, Simulation
from mptcpsim.subflow import SegmentRecord, Subflow


def make_subflow(sf_id=1, smss=1448, cca="reno"):
    sub = Subflow(sf_id, smss)
    if cca == "reno":
        sub.cc = RenoCc(sub)
    else:
        sub.cc = make_ccas(cca, [sub], lambda name: None)[0]
    return sub


def send_segments(sub, count, now=0, dsn_start=None):
    """Register `count` full segments as transmitted at `now`."""
    recs = []
    for _ in range(count):
        dsn = sub.snd_nxt if dsn_start is None else dsn_start
        rec = SegmentRecord(sub.snd_nxt, dsn, sub.smss)
        rec.sent_at = now
        rec.d0 = sub.delivered
        rec.dt0 = sub.delivered_time
        sub.snd_nxt += sub.smss
        sub.flight_size += sub.smss
        sub.append_record(rec)
        recs.append(rec)
    return recs


def fake_view_sub(sf_id=1, srtt=10_000_000, rttvar=0, cwnd=10 * 1448,
                  inflight=0, smss=1448, available=True, backup=False,
                  closed=False, goodput=0):
    return SimpleNamespace(
        sf_id=sf_id, srtt=srtt, rttvar=rttvar, cwnd=cwnd, inflight=inflight,
        smss=smss, available=available, backup=backup, closed=closed,
        goodput=goodput)


def quick_setup(sf1=(100, 5, 0), sf2=(100, 5, 0), scheduler="minrtt",
                cca="cubic", seed=7, duration_s=1.0, **kw):
    return RunSetup(
        sf1=PathConfig.from_link_params(*sf1),
        sf2=PathConfig.from_link_params(*sf2),
        l3=PathConfig.from_link_params(2000, 0, 0),
        scheduler=scheduler, cca=cca, seed=seed,
        duration_ns=int(duration_s * 1e9), **kw)


def quick_run(**kw):
    return Simulation(quick_setup(**kw)).run()
