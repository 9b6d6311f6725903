import hashlib

import pytest

from mptcpsim.simulation import Simulation

from helpers import quick_run, quick_setup


def result_fingerprint(out):
    core = {k: out[k] for k in ("delivered_bytes", "sf_bytes", "sf_rtx",
                                "link_drops", "link_delivered")}
    return hashlib.sha256(repr(core).encode()).hexdigest()


def test_identical_seed_replays_identically():
    a = quick_run(sf2=(50, 20, 0.5), cca="cubic", duration_s=2.0, seed=11)
    b = quick_run(sf2=(50, 20, 0.5), cca="cubic", duration_s=2.0, seed=11)
    assert result_fingerprint(a) == result_fingerprint(b)


def test_different_seed_diverges_with_loss():
    a = quick_run(sf2=(50, 20, 1.0), cca="cubic", duration_s=2.0, seed=11)
    b = quick_run(sf2=(50, 20, 1.0), cca="cubic", duration_s=2.0, seed=12)
    assert result_fingerprint(a) != result_fingerprint(b)


def test_trace_replay_is_byte_identical():
    outs = []
    for _ in range(2):
        out = quick_run(sf2=(50, 20, 0.5), cca="bbr", duration_s=1.5,
                        seed=3, trace=True)
        blob = repr((out["traces"], out["ofo_samples"])).encode()
        outs.append(hashlib.sha256(blob).hexdigest())
    assert outs[0] == outs[1]


def test_shared_bottleneck_sees_both_subflows():
    out = quick_run(duration_s=1.0)
    l3 = out["link_delivered"]["L3"]
    assert l3 == out["link_delivered"]["L1"] + out["link_delivered"]["L2"]
    assert l3 > 0


def test_conservation_of_bytes():
    sim = Simulation(quick_setup(sf2=(50, 20, 0.5), cca="cubic",
                                 duration_s=1.0))
    out = sim.run()
    source = sim.sender.dsn_next
    delivered = sim.receiver.data_acked
    buffered = sim.receiver.receive_buffer_bytes()
    in_flight = sum(s.flight_size for s in sim.subs)
    # every sourced byte is delivered, parked in a receive queue, in flight,
    # or was dropped and awaits retransmission (covered by in_flight ledger)
    assert delivered <= source
    assert delivered + buffered <= source
    assert delivered + buffered + in_flight >= source - 1


def test_receive_buffer_never_exceeds_capacity():
    sim = Simulation(quick_setup(sf2=(5, 50, 2.0), cca="cubic",
                                 duration_s=2.0))
    peak = [0]
    def watch(_, now):
        peak[0] = max(peak[0], sim.receiver.receive_buffer_bytes())
        sim.engine.schedule(now + 1_000_000, watch, None)
    sim.engine.schedule(0, watch, None)
    sim.run()
    assert peak[0] <= sim.receiver.buf_cap


def test_remp_duplicates_do_not_inflate_goodput():
    out = quick_run(scheduler="remp", cca="cubic", duration_s=1.0)
    assert out["duplicate_bytes"] > 0
    assert out["delivered_bytes"] == sum(out["sf_bytes"].values())


def test_exactly_once_delivery_with_loss():
    out = quick_run(sf2=(50, 20, 2.0), cca="cubic", duration_s=2.0,
                    keep_delivery_log=True, seed=5)
    covered = 0
    for start, end in out["delivery_log"]:
        assert start == covered
        covered = end
    assert covered == out["delivered_bytes"]
    assert covered > 0


def test_cwnd_floor_holds_everywhere():
    for cca in ("cubic", "lia", "wvegas", "bbr"):
        sim = Simulation(quick_setup(sf2=(10, 20, 1.0), cca=cca,
                                     duration_s=1.5))
        low = [float("inf")]
        def watch(_, now):
            low[0] = min(low[0], min(s.cwnd for s in sim.subs))
            sim.engine.schedule(now + 1_000_000, watch, None)
        sim.engine.schedule(10_000_000, watch, None)
        sim.run()
        assert low[0] >= sim.subs[0].smss


def test_srtt_tracks_configured_path():
    out = quick_run(sf1=(100, 10, 0), sf2=(100, 10, 0), cca="bbr",
                    duration_s=2.0)
    for sf in (1, 2):
        assert out["sf_srtt_ns"][sf] == pytest.approx(10e6, rel=0.5)


def test_goodput_attribution_sums_to_delivery():
    out = quick_run(sf2=(50, 20, 0.5), cca="cubic", duration_s=1.0)
    assert sum(out["sf_bytes"].values()) >= out["delivered_bytes"] - 1448 * 64
