"""One simulation instance: two subflows over the three-link topology.

Wires the event engine, links, subflow TCP machines, the chosen scheduler
and congestion controllers, and the receiver into a single deterministic
run. Instances share nothing; a worker pool can run many in parallel.
"""

from dataclasses import dataclass, field

from .congestion import make_ccas
from .connection import MptcpSender, Receiver, buffer_capacity
from .engine import RngStream, SimEngine
from .links import SMSS, WIRE_OVERHEAD, PathConfig, Topology
from .schedulers import Blest, MinRtt, SchedView, make_scheduler
from .subflow import SegmentRecord, Subflow

DEFAULT_DURATION_NS = 30_000_000_000
OFO_SAMPLE_INTERVAL_NS = 500_000      # two samples per millisecond


@dataclass
class RunSetup:
    """Everything one simulation needs; value object, safe to ship to workers."""

    sf1: PathConfig
    sf2: PathConfig
    l3: PathConfig
    scheduler: str = "minrtt"
    cca: str = "cubic"
    seed: int = 1
    duration_ns: int = DEFAULT_DURATION_NS
    smss: int = SMSS
    trace: bool = False
    keep_delivery_log: bool = False
    penalization: bool = True      # minrtt opportunistic rtx + cwnd penalty
    limited_transmit: bool = False
    autotune: bool = True          # receive-window autotuning up to buf_cap
    extra: dict = field(default_factory=dict)


class Simulation:

    def __init__(self, setup):
        self.setup = setup
        self.engine = SimEngine()
        seed = setup.seed
        rng_for = lambda name: RngStream(seed, name)
        self.topo = Topology(setup.sf1, setup.sf2, setup.l3, rng_for)
        rtt_max = max(
            2 * setup.sf1.one_way_delay_ns,
            2 * setup.sf2.one_way_delay_ns,
        ) + 2 * setup.l3.one_way_delay_ns
        buf_cap = buffer_capacity(
            [setup.sf1.rate_bps, setup.sf2.rate_bps], rtt_max)
        self.sender = MptcpSender(buf_cap)
        self.receiver = Receiver(
            buf_cap, keep_delivery_log=setup.keep_delivery_log,
            autotune_rtt_ns=rtt_max if setup.autotune else 0)
        self.subs = [Subflow(1, setup.smss), Subflow(2, setup.smss)]
        for sub, cc in zip(self.subs, make_ccas(setup.cca, self.subs, rng_for)):
            sub.cc = cc
        self.scheduler = make_scheduler(setup.scheduler)
        self.view = SchedView(self.subs, buf_cap, buf_cap)
        self._needs_goodput = setup.scheduler == "llhd"
        if self._needs_goodput:
            for sub in self.subs:
                sub.gp_enabled = True
        self._links = [None, self.topo.l1, self.topo.l2]
        self._rev_delay = [0, self.topo.reverse_delay[1],
                           self.topo.reverse_delay[2]]
        self._blest = self.scheduler if isinstance(self.scheduler, Blest) else None
        # Opportunistic retransmission + penalization belong to the default
        # (lowest-RTT) scheduler's optional machinery.
        self._penalization = setup.penalization and isinstance(self.scheduler, MinRtt)
        self._blocked_since_decay = False
        self._next_lambda_at = 0
        self._next_lambda_bump = 0
        self.ofo_samples = []
        if setup.trace:
            for sub in self.subs:
                sub.trace = []

    # -- sending --------------------------------------------------------------

    def _try_send(self, now):
        sender = self.sender
        subs = self.subs
        scheduler = self.scheduler
        view = self.view
        want = int(subs[0].cwnd + subs[1].cwnd) * 2
        if want > sender.sndbuf:
            sender.sndbuf = want if want < sender.buf_cap else sender.buf_cap
        while True:
            rwnd = sender.rwnd
            if sender.sndbuf < rwnd:
                rwnd = sender.sndbuf
            any_avail = False
            for sub in subs:
                # New data needs a full segment of window room; a subflow
                # replaying its ledger after an RTO carries no new data, and
                # one in fast recovery sends against the pipe estimate under
                # its post-cut ceiling (receiver-reported out-of-order bytes
                # have left the network).
                if sub.closed or sub.in_rto_recovery or sub.holes_pending:
                    sub.available = False
                    continue
                if sub.in_fast_recovery:
                    limit = min(sub.cwnd, sub.ssthresh, rwnd)
                    room = limit - (sub.flight_size - sub.sacked_out + sub.rtx_out)
                else:
                    room = (sub.cwnd if sub.cwnd < rwnd else rwnd) - sub.flight_size
                avail = room >= sub.smss
                sub.available = avail
                if avail:
                    any_avail = True
            if not any_avail:
                return
            if self._needs_goodput:
                for sub in subs:
                    sub.goodput = sub.goodput_estimate(now)
            view.send_window = rwnd
            # Bulk source keeps the send buffer full, so the bytes still to
            # schedule are whatever fits the usable window.
            room = sender.data_acked + rwnd - sender.dsn_next
            view.remaining_bytes = room if room > 0 else 0
            decision = scheduler.decide(view)
            if decision is None:
                return
            target = decision.target
            if not sender.rtx_queue and room < target.smss:
                sender.window_blocked_events += 1
                self._on_window_blocked(target, now)
                return
            start, end = sender.next_payload(target.smss)
            self._send_new(target, start, end, now)
            dup = decision.duplicate_on
            if dup is not None:
                self._send_new(dup, start, end, now)

    def _send_new(self, sub, dsn_start, dsn_end, now):
        length = dsn_end - dsn_start
        rec = SegmentRecord(sub.snd_nxt, dsn_start, length)
        sub.snd_nxt += length
        sub.flight_size += length
        sub.append_record(rec)
        self._dispatch(sub, rec, now)

    def _retransmit(self, sub, rec, now):
        rec.retransmitted = True
        sub.rtx_out += rec.length
        sub.retransmit_count += 1
        self._dispatch(sub, rec, now)

    def _dispatch(self, sub, rec, now):
        cc = sub.cc
        if cc.needs_pacing:
            rate = cc.pacing_rate_bps
            if rate > 0:
                at = sub.pacing_next
                if at < now:
                    at = now
                sub.pacing_next = at + int(rec.length * 1e9 / rate)
                if at > now:
                    self.engine.schedule(at, self._ev_paced_send, (sub, rec))
                    self._arm_rto(sub, now)
                    return
        self._inject(sub, rec, now)

    def _ev_paced_send(self, payload, now):
        sub, rec = payload
        self._inject(sub, rec, now)

    def _inject(self, sub, rec, now):
        if sub.first_sent_time == 0:
            sub.first_sent_time = now
        rec.sent_at = now
        rec.d0 = sub.delivered
        rec.dt0 = sub.delivered_time
        rec.fs0 = sub.first_sent_time
        wire = rec.length + WIRE_OVERHEAD
        arrival = self._links[sub.sf_id].enqueue(wire, now)
        if arrival is not None:
            self.engine.schedule(
                arrival, self._ev_router,
                (sub.sf_id, rec.seq, rec.dsn, rec.length, wire))
        self._arm_rto(sub, now)

    def _on_window_blocked(self, target, now):
        if self._blest is not None:
            self._blocked_since_decay = True
            if now >= self._next_lambda_bump:
                self._blest.note_window_blocked()
                srtts = [s.srtt for s in self.subs if s.srtt > 0]
                self._next_lambda_bump = now + (max(srtts) if srtts else 1_000_000)
        if not self._penalization:
            return
        blocking_dsn = self.sender.data_acked
        blocker = None
        brec = None
        for sub in self.subs:
            for i in range(sub.seg_head, len(sub.segments)):
                rec = sub.segments[i]
                if rec.dsn <= blocking_dsn < rec.dsn + rec.length:
                    blocker = sub
                    brec = rec
                    break
            if blocker is not None:
                break
        if blocker is None or blocker is target:
            return
        if now >= blocker.next_penalty_at:
            # Halve the stalling subflow and resend its oldest range on the
            # faster one so the window can reopen; at most once per
            # connection-level round trip.
            blocker.cwnd = max(blocker.cwnd / 2.0, float(blocker.smss))
            blocker.ssthresh = blocker.cwnd
            conn_rtt = max((s.srtt for s in self.subs), default=0)
            blocker.next_penalty_at = now + max(conn_rtt, 1_000_000)
            if target.cwnd - target.flight_size >= brec.length:
                self._send_new(target, brec.dsn, brec.dsn + brec.length, now)

    # -- event handlers --------------------------------------------------------

    def _ev_router(self, pkt, now):
        wire = pkt[4]
        if pkt[0] == 1:
            self.topo.l1.delivered_bytes += wire
        else:
            self.topo.l2.delivered_bytes += wire
        arrival = self.topo.l3.enqueue(wire, now)
        if arrival is not None:
            self.engine.schedule(arrival, self._ev_host, pkt)

    def _ev_host(self, pkt, now):
        sf, seq, dsn, length, wire = pkt
        self.topo.l3.delivered_bytes += wire
        sub_ack, data_ack, rwnd, sack = self.receiver.on_data(
            sf, seq, dsn, length, now)
        self.engine.schedule(
            now + self._rev_delay[sf], self._ev_ack,
            (sf, sub_ack, data_ack, rwnd, sack))

    def _ev_ack(self, ack, now):
        sf, sub_ack, data_ack, rwnd, sack = ack
        sender = self.sender
        sender.rwnd = rwnd
        sender.on_data_ack(data_ack)
        sub = self.subs[sf - 1]
        rtx = sub.process_ack(sub_ack, now, sack)
        if rtx is not None:
            for rec in rtx:
                self._retransmit(sub, rec, now)
        elif (self.setup.limited_transmit and 1 <= sub.dup_ack_count <= 2
              and sender.window_room() >= sub.smss
              and sub.flight_size + sub.smss <= sub.cwnd + 2 * sub.smss):
            start, end = sender.next_payload(sub.smss)
            self._send_new(sub, start, end, now)
        if sub.flight_size > 0:
            self._arm_rto(sub, now)
        if self._blest is not None and now >= self._next_lambda_at:
            if not self._blocked_since_decay:
                self._blest.decay()
            self._blocked_since_decay = False
            srtts = [s.srtt for s in self.subs if s.srtt > 0]
            self._next_lambda_at = now + (max(srtts) if srtts else 1_000_000)
        self._try_send(now)

    def _arm_rto(self, sub, now):
        deadline = sub.rto_deadline
        if deadline == 0:
            deadline = sub.rto_deadline = now + sub.rto
        if sub.rto_event_time == 0 or deadline < sub.rto_event_time:
            # A lapsed deadline fires immediately rather than silently resetting.
            at = deadline if deadline > now else now
            sub.rto_event_time = at
            self.engine.schedule(at, self._ev_rto, sub)

    def _ev_rto(self, sub, now):
        sub.rto_event_time = 0
        deadline = sub.rto_deadline
        if deadline == 0 or sub.flight_size == 0:
            return
        if now < deadline:
            sub.rto_event_time = deadline
            self.engine.schedule(deadline, self._ev_rto, sub)
            return
        rec = sub.on_rto_fire(now)
        if rec is not None:
            self._retransmit(sub, rec, now)
            self.sender.queue_for_retransmission(rec.dsn, rec.dsn + rec.length)
            self._try_send(now)
        if sub.rto_deadline > 0:
            sub.rto_event_time = sub.rto_deadline
            self.engine.schedule(sub.rto_deadline, self._ev_rto, sub)

    def _ev_ofo_sample(self, _, now):
        nbytes, nsegs = self.receiver.ofo_sample()
        self.ofo_samples.append((now, nbytes, nsegs))
        self.engine.schedule(now + OFO_SAMPLE_INTERVAL_NS, self._ev_ofo_sample, None)

    # -- top level --------------------------------------------------------------

    def run(self):
        setup = self.setup
        if setup.trace:
            self.engine.schedule(0, self._ev_ofo_sample, None)
        self._try_send(0)
        self.engine.run_until(setup.duration_ns)
        recv = self.receiver
        per_sf = recv.delivered_by_sf
        duration_s = setup.duration_ns / 1e9
        return {
            "delivered_bytes": recv.data_acked,
            "sf_bytes": {1: per_sf[1], 2: per_sf[2]},
            "sf_rtx": {s.sf_id: s.retransmit_count for s in self.subs},
            "sf_srtt_ns": {s.sf_id: s.srtt for s in self.subs},
            "sf_closed": {s.sf_id: s.closed for s in self.subs},
            "duration_s": duration_s,
            "link_drops": {
                "L1": self.topo.l1.drops, "L2": self.topo.l2.drops,
                "L3": self.topo.l3.drops,
            },
            "link_random_losses": {
                "L1": self.topo.l1.random_losses,
                "L2": self.topo.l2.random_losses,
                "L3": self.topo.l3.random_losses,
            },
            "link_delivered": {
                "L1": self.topo.l1.delivered_bytes,
                "L2": self.topo.l2.delivered_bytes,
                "L3": self.topo.l3.delivered_bytes,
            },
            "duplicate_bytes": recv.duplicate_bytes,
            "window_blocked_events": self.sender.window_blocked_events,
            "ofo_samples": self.ofo_samples,
            "traces": {s.sf_id: s.trace for s in self.subs} if setup.trace else None,
            "delivery_log": recv.delivery_log,
        }
