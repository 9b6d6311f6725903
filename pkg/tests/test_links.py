import pytest

from mptcpsim.engine import RngStream
from mptcpsim.errors import UnknownSubflowError
from mptcpsim.links import FULL_WIRE, Link, PathConfig, Topology


def cfg(rate_mbps=100, owd_us=0, loss=0.0, cap=64):
    return PathConfig(int(rate_mbps * 1e6), owd_us * 1000, loss, cap)


def test_path_config_validation():
    with pytest.raises(ValueError):
        PathConfig(0, 0, 0.0, 64)
    with pytest.raises(ValueError):
        PathConfig(1, -5, 0.0, 64)
    with pytest.raises(ValueError):
        PathConfig(1, 0, 1.5, 64)
    with pytest.raises(ValueError):
        PathConfig(1, 0, 0.0, 0)


def test_from_link_params_units():
    pc = PathConfig.from_link_params(100, 10, 0.5)
    assert pc.rate_bps == 100_000_000
    assert pc.one_way_delay_ns == 5_000_000
    assert pc.loss_rate == 0.005
    # one link-BDP of full-size packets: 100 Mbps * 10 ms / 1514 B
    assert pc.queue_cap == int(100e6 * 0.01 / 8 / FULL_WIRE)


def test_zero_delay_becomes_one_microsecond():
    pc = PathConfig.from_link_params(100, 0, 0)
    assert pc.one_way_delay_ns == 1_000
    assert pc.queue_cap == 64   # floor


def test_serialization_time_of_full_packet():
    link = Link("L1", cfg(rate_mbps=100))
    # 1514 B at 100 Mbps serializes in 121.12 us
    assert link.enqueue(1514, now=0) == 121_120


def test_enqueue_accounts_for_busy_link():
    link = Link("L1", cfg())
    first = link.enqueue(1514, 0)
    second = link.enqueue(1514, 0)
    assert second - first == 121_120


def test_queue_at_capacity_drops():
    link = Link("L1", cfg(cap=4))
    for _ in range(8):
        link.enqueue(1514, 0)
    assert link.drops > 0


def test_loss_rate_one_drops_everything():
    link = Link("L1", cfg(loss=1.0), RngStream(1, "L1"))
    assert all(link.enqueue(1514, 0) is None for _ in range(50))
    assert link.random_losses == 50
    assert link.drops == 0


def test_fifo_order_preserved_without_loss():
    link = Link("L1", cfg(cap=10_000))
    arrivals = [link.enqueue(1514, now=i * 10_000) for i in range(200)]
    assert arrivals == sorted(arrivals)


def test_delivered_rate_never_exceeds_configured_rate():
    link = Link("L1", cfg(rate_mbps=10, cap=10_000))
    start, sent = 0, 0
    last_arrival = 0
    for i in range(500):
        t = link.enqueue(1514, start)
        if t is not None:
            sent += 1514
            last_arrival = t
    window = last_arrival - start
    assert sent * 8e9 / window <= 10e6 * 1.001


def test_route_maps_subflows_to_links():
    topo = Topology(cfg(), cfg(), cfg(rate_mbps=2000))
    assert [l.name for l in topo.route(1)] == ["L1", "L3"]
    assert [l.name for l in topo.route(2)] == ["L2", "L3"]
    assert [l.name for l in topo.route(1, reverse=True)] == ["L3", "L1"]
    with pytest.raises(UnknownSubflowError):
        topo.route(3)
