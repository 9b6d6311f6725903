"""Hybrid-access topology: Host A --(L1,L2)--> Router R --(L3)--> Host B.

Each directed link has a fixed rate, propagation delay, random per-packet
loss, and a drop-tail queue. The queue is modeled analytically: the backlog
at time t is (busy_until - t) worth of serialization, which is exact for
FIFO service and avoids keeping a packet list. ACKs ride the reverse path
as pure delay (no loss draws, no queueing).
"""

from dataclasses import dataclass

from .errors import UnknownSubflowError

SMSS = 1448            # sender MSS, payload bytes per full segment
WIRE_OVERHEAD = 66     # Ethernet + IP + TCP/MPTCP framing per segment
FULL_WIRE = SMSS + WIRE_OVERHEAD   # 1514 on-wire bytes, the figure used for link occupancy


@dataclass(frozen=True)
class PathConfig:
    """One directed link: rate, one-way delay, loss probability, queue size."""

    rate_bps: int
    one_way_delay_ns: int
    loss_rate: float
    queue_cap: int     # packets (full-size)

    def __post_init__(self):
        if self.rate_bps <= 0:
            raise ValueError(f"rate_bps must be > 0, got {self.rate_bps}")
        if self.one_way_delay_ns < 0:
            raise ValueError("one_way_delay_ns must be >= 0")
        if not 0.0 <= self.loss_rate <= 1.0:
            raise ValueError(f"loss_rate {self.loss_rate} outside [0, 1]")
        if self.queue_cap < 1:
            raise ValueError("queue_cap must be >= 1")

    @classmethod
    def from_link_params(cls, bw_mbps, rtt_ms, loss_pct, queue_cap=None):
        """Build from the scenario-table units (Mbps, round-trip ms, percent).

        The round-trip figure is split symmetrically; "0 ms" becomes 1 us one
        way so event ordering stays well defined. Default queue is one
        link-BDP of full-size packets, floor 64.
        """
        rate = int(bw_mbps * 1_000_000)
        one_way = int(rtt_ms * 1_000_000 / 2)
        if one_way == 0:
            one_way = 1_000
        if queue_cap is None:
            bdp_bytes = rate * (2 * one_way) / 8 / 1e9
            queue_cap = max(64, int(bdp_bytes / FULL_WIRE))
        return cls(rate, one_way, loss_pct / 100.0, queue_cap)


class Link:
    """Directed link with drop-tail queue and random loss."""

    __slots__ = (
        "name", "rate_bps", "one_way_delay_ns", "loss_rate", "queue_cap",
        "busy_until", "drops", "random_losses", "delivered_bytes",
        "_ns_per_byte", "_cap_backlog_ns", "_rng_random",
    )

    def __init__(self, name, cfg, rng=None):
        self.name = name
        self.rate_bps = cfg.rate_bps
        self.one_way_delay_ns = cfg.one_way_delay_ns
        self.loss_rate = cfg.loss_rate
        self.queue_cap = cfg.queue_cap
        self.busy_until = 0
        self.drops = 0
        self.random_losses = 0
        self.delivered_bytes = 0
        self._ns_per_byte = 8e9 / cfg.rate_bps
        self._cap_backlog_ns = cfg.queue_cap * int(FULL_WIRE * self._ns_per_byte)
        # Loss draws come from a dedicated stream so instrumentation elsewhere
        # cannot shift them between runs.
        self._rng_random = rng.random if (rng is not None and cfg.loss_rate > 0) else None

    def enqueue(self, wire_bytes, now):
        """Admit a packet; returns its far-end arrival time, or None if dropped.

        Drop-tail check first, then the loss draw, so the draw index stream
        only advances for packets that had queue room.
        """
        busy = self.busy_until
        if busy - now > self._cap_backlog_ns:
            self.drops += 1
            return None
        rng = self._rng_random
        if rng is not None and rng() < self.loss_rate:
            self.random_losses += 1
            return None
        start = busy if busy > now else now
        done = start + int(wire_bytes * self._ns_per_byte)
        self.busy_until = done
        return done + self.one_way_delay_ns

    def backlog_packets(self, now):
        backlog_ns = self.busy_until - now
        if backlog_ns <= 0:
            return 0
        return int(backlog_ns / (FULL_WIRE * self._ns_per_byte))


class Topology:
    """The three-link layout plus the pure-delay reverse path per subflow."""

    __slots__ = ("l1", "l2", "l3", "reverse_delay")

    def __init__(self, sf1_cfg, sf2_cfg, l3_cfg, rng_for=None):
        rng = rng_for or (lambda name: None)
        self.l1 = Link("L1", sf1_cfg, rng("L1"))
        self.l2 = Link("L2", sf2_cfg, rng("L2"))
        self.l3 = Link("L3", l3_cfg, rng("L3"))
        self.reverse_delay = {
            1: self.l3.one_way_delay_ns + self.l1.one_way_delay_ns,
            2: self.l3.one_way_delay_ns + self.l2.one_way_delay_ns,
        }

    def route(self, subflow_id, reverse=False):
        """Ordered links for a subflow's data path (or its ACK path reversed)."""
        if subflow_id == 1:
            access = self.l1
        elif subflow_id == 2:
            access = self.l2
        else:
            raise UnknownSubflowError(f"subflow {subflow_id}")
        return [self.l3, access] if reverse else [access, self.l3]

    def access_link(self, subflow_id):
        if subflow_id == 1:
            return self.l1
        if subflow_id == 2:
            return self.l2
        raise UnknownSubflowError(f"subflow {subflow_id}")
