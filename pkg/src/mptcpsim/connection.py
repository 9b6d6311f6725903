"""Connection level: DSN assignment, shared retransmission queue, receiver
reassembly with the out-of-order queue, cumulative Data-ACK, flow control.

The application source is greedy bulk: the send buffer is modeled as always
full, so fresh payload is always one DSN-range allocation away. Reassembly
runs twice on the receive side, as in the protocol: per-subflow sequence
reassembly (drives duplicate ACKs and in-order pass-up) and connection-level
DSN reassembly (drives the Data-ACK and in-order delivery to the sink).
"""

from bisect import bisect_left

from .errors import NothingToSend, WindowOverflowError

BUF_CAP_FLOOR = 16 * 1024 * 1024    # bytes; autotuning ceiling for send/recv buffers


def buffer_capacity(path_rates_bps, rtt_max_ns):
    """Twice the connection BDP, floored at the 16 MiB autotuning ceiling."""
    bdp = sum(path_rates_bps) * (rtt_max_ns / 1e9) / 8.0
    return max(BUF_CAP_FLOOR, int(2 * bdp))


class MptcpSender:
    """Sender-side connection state: DSN space and the priority rtx queue.

    Outstanding (un-data-acked) bytes are held in the send buffer, which
    expands with the subflows' congestion windows up to the same ceiling as
    the receive side; a slow subflow parking the lowest DSN therefore blocks
    the send window once the faster one has filled the buffer behind it.
    """

    __slots__ = ("dsn_next", "data_acked", "rtx_queue", "rtx_pending",
                 "buf_cap", "rwnd", "sndbuf", "window_blocked_events")

    def __init__(self, buf_cap):
        self.dsn_next = 0
        self.data_acked = 0
        self.rtx_queue = []          # [start, end) ranges, FIFO priority
        self.rtx_pending = set()     # range starts, for dedup
        self.buf_cap = buf_cap
        self.rwnd = buf_cap
        self.sndbuf = AUTOTUNE_INITIAL
        self.window_blocked_events = 0

    def expand_sndbuf(self, total_cwnd):
        want = 2 * total_cwnd
        if want > self.sndbuf:
            self.sndbuf = min(want, self.buf_cap)

    def send_window(self):
        """Usable connection-level window: the tighter of peer window and
        local send-buffer space."""
        return self.rwnd if self.rwnd < self.sndbuf else self.sndbuf

    def window_room(self):
        """New-data allowance under connection-level flow control."""
        return self.data_acked + self.send_window() - self.dsn_next

    def next_payload(self, max_len):
        """Next DSN range to schedule: rtx queue first, then fresh payload."""
        if self.rtx_queue:
            start, end = self.rtx_queue[0]
            if end - start <= max_len:
                self.rtx_queue.pop(0)
                self.rtx_pending.discard(start)
                return start, end
            self.rtx_queue[0] = (start + max_len, end)
            self.rtx_pending.discard(start)
            self.rtx_pending.add(start + max_len)
            return start, start + max_len
        if max_len <= 0:
            raise NothingToSend()
        start = self.dsn_next
        self.dsn_next = start + max_len
        return start, self.dsn_next

    def on_data_ack(self, data_ack):
        if data_ack <= self.data_acked:
            return
        self.data_acked = data_ack
        if self.rtx_queue:
            keep = []
            for start, end in self.rtx_queue:
                if end > data_ack:
                    keep.append((max(start, data_ack), end))
            self.rtx_queue = keep
            self.rtx_pending = {s for s, _ in keep}

    def queue_for_retransmission(self, start, end):
        """A subflow timed out on this DSN range; any subflow may resend it."""
        if end <= self.data_acked:
            return
        start = max(start, self.data_acked)
        if start in self.rtx_pending:
            return
        self.rtx_pending.add(start)
        self.rtx_queue.append((start, end))


AUTOTUNE_INITIAL = 128 * 1024


class Receiver:
    """Host B: per-subflow reassembly, the connection OFO queue, Data-ACK.

    With autotuning on (the testbed default this models), the advertised
    window follows the kernel's receive-space tuner: twice the bytes
    delivered to the application per round trip, growing monotonically from
    a small initial allocation up to the buffer ceiling.
    """

    __slots__ = ("buf_cap", "data_acked", "ofo", "ofo_bytes",
                 "sub_rcv_nxt", "sub_ofo", "sub_ofo_bytes",
                 "delivered_by_sf", "duplicate_bytes", "delivery_log",
                 "autotune_limit", "_win_ns", "_win_start", "_win_bytes")

    def __init__(self, buf_cap, sf_ids=(1, 2), keep_delivery_log=False,
                 autotune_rtt_ns=0):
        self.buf_cap = buf_cap
        self.data_acked = 0
        self.ofo = []              # sorted disjoint (start, end, sf) tuples
        self.ofo_bytes = 0
        self.sub_rcv_nxt = {sf: 0 for sf in sf_ids}
        self.sub_ofo = {sf: [] for sf in sf_ids}   # sorted (seq, end, dsn)
        self.sub_ofo_bytes = 0
        self.delivered_by_sf = {sf: 0 for sf in sf_ids}
        self.duplicate_bytes = 0
        self.delivery_log = [] if keep_delivery_log else None
        if autotune_rtt_ns > 0:
            self.autotune_limit = min(AUTOTUNE_INITIAL, buf_cap)
            self._win_ns = max(autotune_rtt_ns, 1_000_000)
        else:
            self.autotune_limit = buf_cap
            self._win_ns = 0
        self._win_start = 0
        self._win_bytes = 0

    def rwnd(self):
        return self.autotune_limit - self.ofo_bytes - self.sub_ofo_bytes

    def _tune(self, delivered_delta, now):
        if self._win_ns == 0 or self.autotune_limit >= self.buf_cap:
            return
        if now - self._win_start >= self._win_ns:
            # Kernel-style receive-space moderation: space doubles over what
            # the application consumed in a round trip, plus half again for
            # bookkeeping overhead.
            grown = 3 * self._win_bytes
            if grown > self.autotune_limit:
                self.autotune_limit = min(grown, self.buf_cap)
            self._win_start = now
            self._win_bytes = 0
        self._win_bytes += delivered_delta

    def on_data(self, sf, seq, dsn, length, now=0):
        """Process one arriving data segment.

        Returns (subflow_ack, data_ack, rwnd, sack) where sack reports the
        leading out-of-order subflow ranges so the sender can repair holes.
        """
        rcv_nxt = self.sub_rcv_nxt[sf]
        end = seq + length
        acked_before = self.data_acked
        if seq == rcv_nxt:
            self._meta_accept(dsn, length, sf)
            rcv_nxt = end
            pending = self.sub_ofo[sf]
            if pending:
                drained = 0
                for s2, e2, d2 in pending:
                    if s2 > rcv_nxt:
                        break
                    drained += 1
                    self.sub_ofo_bytes -= e2 - s2
                    if e2 > rcv_nxt:
                        self._meta_accept(d2 + (rcv_nxt - s2), e2 - rcv_nxt, sf)
                        rcv_nxt = e2
                if drained:
                    del pending[:drained]
            self.sub_rcv_nxt[sf] = rcv_nxt
        elif seq > rcv_nxt:
            self._sub_ofo_insert(sf, seq, end, dsn)
        else:
            self.duplicate_bytes += length   # stale copy; re-ACK only
        if self._win_ns:
            self._tune(self.data_acked - acked_before, now)
        pending = self.sub_ofo[sf]
        if pending:
            # Report the island holding this segment first (the freshest
            # information), then the leading islands; senders accumulate.
            sack = []
            i = bisect_left(pending, (seq + 1,)) - 1
            if 0 <= i < len(pending) and pending[i][1] >= end:
                sack.append((pending[i][0], pending[i][1]))
            for s, e, _ in pending[:2]:
                if (s, e) not in sack:
                    sack.append((s, e))
            sack = tuple(sack)
        else:
            sack = ()
        return self.sub_rcv_nxt[sf], self.data_acked, self.rwnd(), sack

    def _sub_ofo_insert(self, sf, seq, end, dsn):
        pending = self.sub_ofo[sf]
        i = bisect_left(pending, (seq,))
        if i < len(pending) and pending[i][0] < end:
            self.duplicate_bytes += end - seq
            return
        if i > 0 and pending[i - 1][1] > seq:
            self.duplicate_bytes += end - seq
            return
        pending.insert(i, (seq, end, dsn))
        self.sub_ofo_bytes += end - seq

    def _meta_accept(self, dsn, length, sf):
        """Unique-DSN admission into the connection-level stream."""
        end = dsn + length
        acked = self.data_acked
        if end <= acked:
            self.duplicate_bytes += length
            return
        if dsn < acked:
            self.duplicate_bytes += acked - dsn
            dsn = acked
        if end > acked + self.buf_cap:
            raise WindowOverflowError(
                f"dsn range [{dsn},{end}) beyond window {acked}+{self.buf_cap}")
        ofo = self.ofo
        if dsn == acked and not ofo:
            self.data_acked = end
            self.delivered_by_sf[sf] += end - dsn
            if self.delivery_log is not None:
                self.delivery_log.append((dsn, end))
            return
        i = bisect_left(ofo, (dsn,))
        # Clip against stored ranges; segment-aligned traffic makes true
        # partial overlap rare, full duplicates (ReMP, spurious rtx) common.
        if i < len(ofo):
            nxt = ofo[i]
            if nxt[0] < end:
                if nxt[0] <= dsn:
                    self.duplicate_bytes += length
                    return
                self.duplicate_bytes += end - nxt[0]
                end = nxt[0]
        if i > 0 and ofo[i - 1][1] > dsn:
            prev = ofo[i - 1]
            if prev[1] >= end:
                self.duplicate_bytes += end - dsn
                return
            self.duplicate_bytes += prev[1] - dsn
            dsn = prev[1]
        if end <= dsn:
            return
        ofo.insert(i, (dsn, end, sf))
        self.ofo_bytes += end - dsn
        if dsn == self.data_acked:
            self._drain()

    def _drain(self):
        """Deliver the contiguous head of the OFO queue to the sink."""
        ofo = self.ofo
        acked = self.data_acked
        log = self.delivery_log
        drained = 0
        for start, end, sf in ofo:
            if start > acked:
                break
            drained += 1
            self.ofo_bytes -= end - start
            if end > acked:
                take_from = acked if acked > start else start
                self.delivered_by_sf[sf] += end - take_from
                if log is not None:
                    log.append((take_from, end))
                acked = end
        if drained:
            del ofo[:drained]
        self.data_acked = acked

    def ofo_sample(self):
        return self.ofo_bytes, len(self.ofo)

    def receive_buffer_bytes(self):
        return self.ofo_bytes + self.sub_ofo_bytes
