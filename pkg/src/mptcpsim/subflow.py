"""Per-subflow TCP sender state: sequence space, RTT estimation, loss recovery.

Loss detection is 3-dup-ACK fast retransmit plus RTO; window arithmetic is
delegated to the attached congestion-control object (the Reno rules live in
congestion.base and other algorithms override them).

ACKs carry the receiver's leading out-of-order ranges (selective feedback,
sans any option encoding). During recovery the sender walks its segment
ledger and retransmits the reported holes, one per arriving ACK, ahead of
any new data; cumulative-only NewReno repairs one hole per RTT, which under
burst tail-drop degenerates into never-ending recovery episodes.
"""

from bisect import bisect_left
from operator import attrgetter

from .links import SMSS

_rec_seq = attrgetter("seq")

RTO_FLOOR_NS = 200_000_000
RTO_MAX_NS = 60_000_000_000
RTO_INITIAL_NS = 1_000_000_000

GP_BUCKET_NS = 100_000_000     # goodput estimate: ten 100 ms buckets = 1 s window
GP_BUCKETS = 10

_COMPACT_THRESHOLD = 1024


def initial_window(smss):
    """Initial congestion window, banded by segment size."""
    if smss <= 0:
        raise ValueError("smss must be > 0")
    if smss > 2190:
        return 2 * smss
    if smss > 1095:
        return 3 * smss
    return 4 * smss


def allowed_send(sub, rwnd):
    """Bytes the subflow may still put in flight: min(cwnd, rwnd) - FlightSize."""
    room = min(sub.cwnd, rwnd) - sub.flight_size
    return room if room > 0 else 0


class SegmentRecord:
    """One transmitted segment: subflow range, its DSN mapping, send metadata."""

    __slots__ = ("seq", "dsn", "length", "sent_at", "retransmitted",
                 "rto_resent", "rtx_epoch", "sacked", "d0", "dt0", "fs0")

    def __init__(self, seq, dsn, length):
        self.seq = seq
        self.dsn = dsn
        self.length = length
        self.sent_at = 0
        self.retransmitted = False
        self.rto_resent = False
        self.rtx_epoch = 0
        self.sacked = False
        self.d0 = 0      # subflow delivered-bytes counter when sent
        self.dt0 = 0     # timestamp of that counter value (delivery-rate sampling)
        self.fs0 = 0     # send time of the newest acked packet back then


class Subflow:
    """Sender-side state of one MPTCP subflow."""

    __slots__ = (
        "sf_id", "smss", "backup", "closed",
        "snd_nxt", "snd_una", "cwnd", "ssthresh", "flight_size",
        "srtt", "rttvar", "rto", "dup_ack_count", "in_fast_recovery",
        "recovery_point", "segments", "seg_head", "retransmit_count",
        "stale_acks", "cc", "delivered", "delivered_time", "lost_bytes",
        "prior_flight", "rto_deadline", "rto_event_time", "pacing_next",
        "gp_buckets", "gp_epochs", "gp_enabled", "next_penalty_at",
        "trace", "_trace_last", "available", "goodput",
        "recovery_epoch", "scan_idx", "in_rto_recovery", "rto_recovery_point",
        "sacked_out", "rtx_out", "high_sacked", "holes_pending",
        "first_sent_time",
    )

    def __init__(self, sf_id, smss=SMSS, backup=False):
        self.sf_id = sf_id
        self.smss = smss
        self.backup = backup
        self.closed = False
        self.snd_nxt = 0
        self.snd_una = 0
        self.cwnd = float(initial_window(smss))
        self.ssthresh = float(1 << 62)
        self.flight_size = 0
        self.srtt = 0
        self.rttvar = 0
        self.rto = RTO_INITIAL_NS
        self.dup_ack_count = 0
        self.in_fast_recovery = False
        self.recovery_point = 0
        self.segments = []        # ledger of unacked records, seq-ordered
        self.seg_head = 0         # index of the oldest live record
        self.retransmit_count = 0
        self.stale_acks = 0
        self.cc = None
        self.delivered = 0
        self.delivered_time = 0
        self.lost_bytes = 0
        self.prior_flight = 0
        self.rto_deadline = 0
        self.rto_event_time = 0
        self.pacing_next = 0
        self.gp_buckets = [0] * GP_BUCKETS
        self.gp_epochs = [-1] * GP_BUCKETS
        self.gp_enabled = False   # only the utility scheduler reads goodput
        self.next_penalty_at = 0
        self.trace = None
        self._trace_last = -1
        self.available = False   # refreshed by the send driver before decisions
        self.goodput = 0         # ditto (bytes/s over the trailing second)
        self.recovery_epoch = 0
        self.scan_idx = 0
        self.in_rto_recovery = False
        self.rto_recovery_point = 0
        self.sacked_out = 0      # bytes the scoreboard knows the receiver holds
        self.rtx_out = 0         # retransmitted bytes still awaiting the ACK
        self.high_sacked = 0     # highest subflow seq the scoreboard covers
        self.holes_pending = False
        self.first_sent_time = 0

    # -- segment ledger -------------------------------------------------------

    def head_record(self):
        if self.seg_head < len(self.segments):
            return self.segments[self.seg_head]
        return None

    def append_record(self, rec):
        self.segments.append(rec)

    def _compact(self):
        if self.seg_head > _COMPACT_THRESHOLD:
            del self.segments[:self.seg_head]
            self.scan_idx -= self.seg_head
            self.seg_head = 0

    def live_records(self):
        return self.segments[self.seg_head:]

    # -- views used by schedulers ------------------------------------------

    @property
    def inflight(self):
        return self.flight_size

    def goodput_estimate(self, now):
        """Delivered bytes over the trailing 1 s window (bytes/s)."""
        epoch = now // GP_BUCKET_NS
        total = 0
        buckets = self.gp_buckets
        epochs = self.gp_epochs
        for i in range(GP_BUCKETS):
            if epoch - epochs[i] < GP_BUCKETS:
                total += buckets[i]
        return total  # bytes over a 1 s window == bytes/s

    def _gp_record(self, nbytes, now):
        epoch = now // GP_BUCKET_NS
        i = epoch % GP_BUCKETS
        if self.gp_epochs[i] != epoch:
            self.gp_epochs[i] = epoch
            self.gp_buckets[i] = nbytes
        else:
            self.gp_buckets[i] += nbytes

    # -- RTT estimator ------------------------------------------------------

    def _rtt_update(self, sample):
        if self.srtt == 0:
            self.srtt = sample
            self.rttvar = sample // 2
        else:
            err = self.srtt - sample
            if err < 0:
                err = -err
            self.rttvar += (err - self.rttvar) >> 2
            self.srtt += (sample - self.srtt) >> 3
        rto = self.srtt + 4 * self.rttvar
        if rto < RTO_FLOOR_NS:
            rto = RTO_FLOOR_NS
        elif rto > RTO_MAX_NS:
            rto = RTO_MAX_NS
        self.rto = rto

    # -- recovery helpers ----------------------------------------------------

    def _apply_sack(self, sack):
        """Fold receiver-reported out-of-order ranges into the scoreboard."""
        segs = self.segments
        n = len(segs)
        for s, e in sack:
            idx = bisect_left(segs, s, self.seg_head, n, key=_rec_seq)
            while idx < n:
                rec = segs[idx]
                if rec.seq + rec.length > e:
                    break
                if not rec.sacked:
                    rec.sacked = True
                    self.sacked_out += rec.length
                idx += 1
            if e > self.high_sacked:
                self.high_sacked = e

    def pipe_estimate(self):
        """Bytes believed in the network: flight minus receiver-held, plus
        unacknowledged retransmissions."""
        return self.flight_size - self.sacked_out + self.rtx_out

    def _recovery_budget(self):
        if self.in_rto_recovery:
            room = self.cwnd - self.rtx_out
        else:
            room = min(self.cwnd, self.ssthresh) - self.pipe_estimate()
        if room < self.smss:
            return 0
        budget = int(room / self.smss)
        return budget if budget < 64 else 64

    def _hole_retransmits(self, high, budget):
        """Ledger walk: unsacked records below high, pipe-budget bounded."""
        if budget <= 0:
            self.holes_pending = True
            return None
        out = None
        segs = self.segments
        n = len(segs)
        idx = self.scan_idx
        if idx < self.seg_head:
            idx = self.seg_head
        epoch = self.recovery_epoch
        pending = False
        while idx < n:
            rec = segs[idx]
            if rec.seq >= high:
                break
            if not rec.sacked and rec.rtx_epoch != epoch:
                if budget <= 0:
                    pending = True
                    break
                rec.rtx_epoch = epoch
                if out is None:
                    out = [rec]
                else:
                    out.append(rec)
                budget -= 1
            idx += 1
        self.scan_idx = idx
        self.holes_pending = pending
        return out

    # -- ACK processing -----------------------------------------------------

    def process_ack(self, ack_seq, now, sack=()):
        """Apply one cumulative ACK; returns records to retransmit, or None.

        Advancing ACKs update the estimator and fire the congestion hook;
        duplicates count toward fast retransmit; ACKs inside recovery follow
        NewReno window arithmetic with selective-feedback hole repair.
        """
        if ack_seq > self.snd_nxt:
            ack_seq = self.snd_nxt
        una = self.snd_una
        if ack_seq < una:
            self.stale_acks += 1
            return None
        if sack:
            self._apply_sack(sack)
        cc = self.cc
        if ack_seq == una:
            if self.flight_size == 0:
                return None
            self.dup_ack_count += 1
            if self.in_rto_recovery:
                return self._hole_retransmits(self.snd_nxt, self._recovery_budget())
            if self.in_fast_recovery:
                cc.on_dup_ack_recovery(now)
                return self._hole_retransmits(self.high_sacked, self._recovery_budget())
            if self.dup_ack_count == 3:
                rec = self.head_record()
                if rec is None:
                    return None
                self.lost_bytes += rec.length
                cc.on_loss_detected(now)
                self.in_fast_recovery = True
                self.recovery_point = self.snd_nxt
                self.recovery_epoch += 1
                rec.rtx_epoch = self.recovery_epoch
                self.scan_idx = self.seg_head
                more = self._hole_retransmits(self.high_sacked, self._recovery_budget())
                return [rec] + more if more else [rec]
            return None

        # Advancing ACK.
        newly = ack_seq - una
        self.prior_flight = self.flight_size
        self.snd_una = ack_seq
        self.flight_size = self.snd_nxt - ack_seq
        self.dup_ack_count = 0
        segs = self.segments
        head = self.seg_head
        n = len(segs)
        last = None
        sample_rec = None
        rtx_acked = 0
        sack_acked = 0
        while head < n:
            rec = segs[head]
            if rec.seq + rec.length > ack_seq:
                break
            last = rec
            if rec.retransmitted:
                rtx_acked += rec.length
            elif not rec.sacked:
                # Karn: sample only segments whose own first transmission
                # produced this ACK; sacked ones arrived long before it.
                sample_rec = rec
            if rec.sacked:
                sack_acked += rec.length
            head += 1
        if rtx_acked:
            self.rtx_out = max(self.rtx_out - rtx_acked, 0)
        if sack_acked:
            self.sacked_out = max(self.sacked_out - sack_acked, 0)
        self.seg_head = head
        if self.scan_idx < head:
            self.scan_idx = head
        self._compact()
        segs = self.segments
        head = self.seg_head
        n = len(segs)
        rtt_sample = 0
        if sample_rec is not None:
            rtt_sample = now - sample_rec.sent_at
            self._rtt_update(rtt_sample)
        self.delivered += newly
        self.delivered_time = now
        if last is not None:
            self.first_sent_time = last.sent_at
        if self.gp_enabled:
            self._gp_record(newly, now)

        rtx = None
        grow = True
        if self.in_rto_recovery:
            if ack_seq >= self.rto_recovery_point:
                self.in_rto_recovery = False
                self.holes_pending = False
            else:
                self.scan_idx = self.seg_head
                rtx = self._hole_retransmits(self.snd_nxt, self._recovery_budget())
        elif self.in_fast_recovery:
            if ack_seq >= self.recovery_point:
                self.in_fast_recovery = False
                self.holes_pending = False
                cc.on_recovery_exit(now)
            else:
                cc.on_partial_ack(newly, now)
                self.scan_idx = self.seg_head
                if self.high_sacked > ack_seq:
                    rtx = self._hole_retransmits(self.high_sacked,
                                                 self._recovery_budget())
                elif head < n:
                    # No feedback beyond the cumulative point: classic
                    # NewReno, resend the next hole.
                    rec = segs[head]
                    if rec.rtx_epoch != self.recovery_epoch:
                        rec.rtx_epoch = self.recovery_epoch
                        rtx = [rec]
            grow = False
        if last is not None:
            cc.on_ack(newly, rtt_sample, last, now, grow)
        self.rto_deadline = (now + self.rto) if self.flight_size > 0 else 0
        tr = self.trace
        if tr is not None and now - self._trace_last >= 500_000:
            self._trace_last = now
            tr.append((now, self.sf_id, int(self.cwnd), int(self.ssthresh),
                       self.srtt, self.flight_size))
        return rtx

    def on_rto_fire(self, now):
        """Expired retransmission timer: back off and hand back the head segment."""
        rec = self.head_record()
        if rec is None:
            self.rto_deadline = 0
            return None
        first_time = not rec.rto_resent
        if first_time:
            self.lost_bytes += rec.length
        rec.rto_resent = True
        self.cc.on_rto(now, first_time)
        self.in_fast_recovery = False
        self.in_rto_recovery = True
        self.rto_recovery_point = self.snd_nxt
        self.recovery_epoch += 1
        rec.rtx_epoch = self.recovery_epoch
        self.scan_idx = self.seg_head
        self.dup_ack_count = 0
        self.rtx_out = 0    # anything retransmitted before the timeout is suspect
        self.rto = min(self.rto * 2, RTO_MAX_NS)
        self.rto_deadline = now + self.rto
        return rec
