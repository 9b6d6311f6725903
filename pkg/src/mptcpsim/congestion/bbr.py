"""BBR v1 state machine and its coupled multipath variant C-MPBBR.

Model state: windowed-max bottleneck bandwidth over the last ten round
trips, min round-trip propagation with a 10 s expiry, and the
Startup/Drain/ProbeBW/ProbeRTT cycle. Control state: pacing rate, send
quantum, and a gain-scaled inflight cap. Units are bytes and nanoseconds;
rates are bytes/second.

C-MPBBR runs the same machine per subflow plus a connection-wide registry
of per-subflow bandwidth. At gain-cycle phase 3 it (a) counts subflows whose
bandwidth falls inside a +-20% band of its own and divides its effective
bandwidth by that count (bottleneck fairness), and (b) closes the
lowest-bandwidth subflow after five successive probes in which the aggregate
delivery rate stays under 60% of the best subflow's bandwidth (multipath
incentive).
"""

import math

from .base import CongestionControl
from ..subflow import initial_window

STARTUP, DRAIN, PROBE_BW, PROBE_RTT = 0, 1, 2, 3
STATE_NAMES = ("Startup", "Drain", "ProbeBW", "ProbeRTT")

HIGH_GAIN = 2.0 / math.log(2.0)
GAIN_CYCLE = (1.25, 0.75, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
GAIN_CYCLE_LEN = 8
BTLBW_FILTER_LEN = 10                     # rounds
RTPROP_FILTER_LEN_NS = 10_000_000_000
PROBE_RTT_DURATION_NS = 200_000_000
MIN_PIPE_CWND_PKTS = 4

CMPBBR_ALPHA = 20.0    # +-% band for shared-bottleneck detection
CMPBBR_BETA = 40.0     # % shortfall vs best path that arms subflow closure


class BbrCc(CongestionControl):

    name = "bbr"
    needs_pacing = True

    __slots__ = (
        "state", "pacing_gain", "cwnd_gain", "pacing_rate_bps",
        "send_quantum", "btlbw", "_bw_samples", "rtprop", "rtprop_stamp",
        "rtprop_expired", "round_count", "round_start", "next_round_delivered",
        "full_bw", "full_bw_count", "filled_pipe", "cycle_index",
        "cycle_stamp", "lost_at_cycle", "probe_rtt_done_stamp",
        "probe_rtt_round_done", "prior_cwnd", "packet_conservation",
        "idle_restart", "app_limited_until", "_last_lost", "initial_cwnd",
        "min_pipe_bytes", "rng", "bw_divisor", "last_del_rate",
    )

    def __init__(self, sub, rng):
        self.sub = sub
        self.rng = rng
        self.initial_cwnd = float(initial_window(sub.smss))
        self.min_pipe_bytes = MIN_PIPE_CWND_PKTS * sub.smss
        self.btlbw = 0.0
        self._bw_samples = []
        self.rtprop = math.inf
        self.rtprop_stamp = 0
        self.rtprop_expired = False
        self.probe_rtt_done_stamp = 0
        self.probe_rtt_round_done = False
        self.packet_conservation = False
        self.prior_cwnd = 0.0
        self.idle_restart = False
        self.next_round_delivered = 0
        self.round_start = False
        self.round_count = 0
        self.full_bw = 0.0
        self.full_bw_count = 0
        self.filled_pipe = False
        self.cycle_index = 0
        self.cycle_stamp = 0
        self.lost_at_cycle = 0
        self.app_limited_until = 0
        self._last_lost = 0
        self.send_quantum = sub.smss
        self.bw_divisor = 1.0
        self.last_del_rate = 0.0
        self._enter_startup()
        # No RTT estimate yet: pace the initial window over a nominal 1 ms.
        nominal_bw = self.initial_cwnd / 0.001
        self.pacing_rate_bps = self.pacing_gain * nominal_bw

    # -- model updates -------------------------------------------------------

    def _enter_startup(self):
        self.state = STARTUP
        self.pacing_gain = HIGH_GAIN
        self.cwnd_gain = HIGH_GAIN

    def _enter_drain(self):
        self.state = DRAIN
        self.pacing_gain = 1.0 / HIGH_GAIN
        self.cwnd_gain = HIGH_GAIN

    def _enter_probe_bw(self, now):
        self.state = PROBE_BW
        self.pacing_gain = 1.0
        self.cwnd_gain = 2.0
        self.cycle_index = GAIN_CYCLE_LEN - 1 - self.rng.randint(0, 6)
        self._advance_cycle_phase(now)

    def _advance_cycle_phase(self, now):
        self.cycle_stamp = now
        self.cycle_index = (self.cycle_index + 1) % GAIN_CYCLE_LEN
        self.pacing_gain = GAIN_CYCLE[self.cycle_index]
        self.lost_at_cycle = self.sub.lost_bytes

    def _update_round(self, rec):
        sub = self.sub
        if rec.d0 >= self.next_round_delivered:
            self.next_round_delivered = sub.delivered
            self.round_count += 1
            self.round_start = True
        else:
            self.round_start = False

    def _update_btlbw(self, rate, app_limited, rec):
        self._update_round(rec)
        if rate >= self.btlbw or not app_limited:
            samples = self._bw_samples
            while samples and samples[-1][1] <= rate:
                samples.pop()
            samples.append((self.round_count, rate))
            lo = self.round_count - BTLBW_FILTER_LEN
            while samples and samples[0][0] <= lo:
                samples.pop(0)
            self.btlbw = samples[0][1]

    def _inflight(self, gain):
        if self.rtprop is math.inf:
            return self.initial_cwnd
        quanta = 3 * self.send_quantum
        bdp = (self.btlbw / self.bw_divisor) * (self.rtprop * 1e-9)
        return gain * bdp + quanta

    def _is_next_cycle_phase(self, now):
        is_full_length = (now - self.cycle_stamp) > self.rtprop
        gain = self.pacing_gain
        if gain == 1.0:
            return is_full_length
        if gain > 1.0:
            lost = self.sub.lost_bytes > self.lost_at_cycle
            return is_full_length and (
                lost or self.sub.prior_flight >= self._inflight(gain))
        return is_full_length or self.sub.prior_flight <= self._inflight(1.0)

    def _check_cycle_phase(self, now):
        if self.state == PROBE_BW and self._is_next_cycle_phase(now):
            self._advance_cycle_phase(now)

    def _check_full_pipe(self, app_limited):
        if self.filled_pipe or not self.round_start or app_limited:
            return
        if self.btlbw >= self.full_bw * 1.25:
            self.full_bw = self.btlbw
            self.full_bw_count = 0
            return
        self.full_bw_count += 1
        if self.full_bw_count >= 3:
            self.filled_pipe = True

    def _check_drain(self, now):
        if self.state == STARTUP and self.filled_pipe:
            self._enter_drain()
        if self.state == DRAIN and self.sub.flight_size <= self._inflight(1.0):
            self._enter_probe_bw(now)

    def _update_rtprop(self, rtt, now):
        self.rtprop_expired = now > self.rtprop_stamp + RTPROP_FILTER_LEN_NS
        if rtt > 0 and (rtt <= self.rtprop or self.rtprop_expired):
            self.rtprop = rtt
            self.rtprop_stamp = now

    def _save_cwnd(self):
        if not self.sub.in_fast_recovery and self.state != PROBE_RTT:
            return self.sub.cwnd
        return max(self.prior_cwnd, self.sub.cwnd)

    def _restore_cwnd(self):
        sub = self.sub
        if self.prior_cwnd > sub.cwnd:
            sub.cwnd = self.prior_cwnd

    def _check_probe_rtt(self, now):
        if self.state != PROBE_RTT and self.rtprop_expired and not self.idle_restart:
            self._enter_probe_rtt()
            self.prior_cwnd = self._save_cwnd()
            self.probe_rtt_done_stamp = 0
        if self.state == PROBE_RTT:
            self._handle_probe_rtt(now)
        self.idle_restart = False

    def _enter_probe_rtt(self):
        self.state = PROBE_RTT
        self.pacing_gain = 1.0
        self.cwnd_gain = 1.0

    def _handle_probe_rtt(self, now):
        sub = self.sub
        # Samples taken while we sit at the floor are not bandwidth evidence.
        self.app_limited_until = sub.delivered + sub.flight_size
        if self.probe_rtt_done_stamp == 0 and sub.flight_size <= self.min_pipe_bytes:
            self.probe_rtt_done_stamp = now + PROBE_RTT_DURATION_NS
            self.probe_rtt_round_done = False
            self.next_round_delivered = sub.delivered
        elif self.probe_rtt_done_stamp != 0:
            if self.round_start:
                self.probe_rtt_round_done = True
            if self.probe_rtt_round_done and now > self.probe_rtt_done_stamp:
                self.rtprop_stamp = now
                self._restore_cwnd()
                self._exit_probe_rtt(now)

    def _exit_probe_rtt(self, now):
        if self.filled_pipe:
            self._enter_probe_bw(now)
        else:
            self._enter_startup()

    # -- control updates -----------------------------------------------------

    def _set_pacing_rate_with_gain(self, gain):
        rate = gain * (self.btlbw / self.bw_divisor)
        if self.filled_pipe or rate > self.pacing_rate_bps:
            self.pacing_rate_bps = rate

    def _set_send_quantum(self):
        rate = self.pacing_rate_bps
        if rate < 150_000:          # 1.2 Mbps
            self.send_quantum = self.sub.smss
        elif rate < 3_000_000:      # 24 Mbps
            self.send_quantum = 2 * self.sub.smss
        else:
            self.send_quantum = min(rate * 0.001, 65536.0)

    def _set_cwnd(self, newly):
        sub = self.sub
        target = self._inflight(self.cwnd_gain)
        lost_delta = sub.lost_bytes - self._last_lost
        self._last_lost = sub.lost_bytes
        cwnd = sub.cwnd
        if lost_delta > 0:
            cwnd = max(cwnd - lost_delta, float(sub.smss))
        if self.packet_conservation:
            cwnd = max(cwnd, sub.flight_size + newly)
        if not self.packet_conservation:
            if self.filled_pipe:
                cwnd = min(cwnd + newly, target)
            elif cwnd < target or sub.delivered < self.initial_cwnd:
                cwnd = cwnd + newly
            cwnd = max(cwnd, self.min_pipe_bytes)
        if self.state == PROBE_RTT:
            cwnd = min(cwnd, self.min_pipe_bytes)
        sub.cwnd = cwnd

    # -- hook interface ------------------------------------------------------

    def _ingest_rate(self, rate):
        return rate

    def on_ack(self, newly, rtt_sample, rec, now, grow=True):
        sub = self.sub
        # Delivery-rate sample over max(send spread, ack spread); the send
        # side guards against ack compression inflating the estimate.
        ack_elapsed = now - rec.dt0
        send_elapsed = rec.sent_at - rec.fs0
        interval = send_elapsed if send_elapsed > ack_elapsed else ack_elapsed
        rate = ((sub.delivered - rec.d0) * 1e9 / interval) if interval > 0 else 0.0
        self.last_del_rate = rate
        app_limited = rec.d0 < self.app_limited_until
        self._update_btlbw(self._ingest_rate(rate), app_limited, rec)
        self._check_cycle_phase(now)
        self._check_full_pipe(app_limited)
        self._check_drain(now)
        self._update_rtprop(rtt_sample, now)
        self._check_probe_rtt(now)
        self._set_pacing_rate_with_gain(self.pacing_gain)
        self._set_send_quantum()
        self._set_cwnd(newly)

    def on_loss_detected(self, now):
        sub = self.sub
        self.prior_cwnd = self._save_cwnd()
        sub.cwnd = float(sub.flight_size + sub.smss)
        self.packet_conservation = True

    def on_recovery_exit(self, now):
        self.packet_conservation = False
        self._restore_cwnd()

    def on_rto(self, now, first_time):
        self.prior_cwnd = self._save_cwnd()
        self.sub.cwnd = float(self.sub.smss)
        self.packet_conservation = False

    def pacing_rate(self):
        return self.pacing_rate_bps


class CmpbbrGroup:
    """Connection registry of the per-subflow controllers."""

    __slots__ = ("ccs",)

    def __init__(self):
        self.ccs = []

    def open_ccs(self):
        return [c for c in self.ccs if not c.sub.closed]


class CmpbbrCc(BbrCc):

    name = "cmpbbr"

    __slots__ = ("group", "stop_lowest_count", "last_n_in_btlneck",
                 "final_n_in_btlneck", "path_bw")

    def __init__(self, sub, rng, group):
        super().__init__(sub, rng)
        self.group = group
        group.ccs.append(self)
        self.stop_lowest_count = 0
        self.last_n_in_btlneck = 0
        self.final_n_in_btlneck = 1
        self.path_bw = 0.0

    def _ingest_rate(self, rate):
        # Delivery was measured under the self-imposed bandwidth split; undo
        # the split so the filter keeps estimating the path itself, capped at
        # the highest rate this path ever demonstrated (links are static), so
        # probe phases cannot ratchet a divided estimate upward.
        if rate > self.path_bw:
            self.path_bw = rate
        if self.bw_divisor > 1.0:
            scaled = rate * self.bw_divisor
            return scaled if scaled < self.path_bw else self.path_bw
        return rate

    def _advance_cycle_phase(self, now):
        super()._advance_cycle_phase(now)
        if self.cycle_index == 3:
            self._probe_hook()

    def _probe_hook(self):
        """Runs once per gain cycle, at phase index 3, per the coupling rules."""
        ccs = self.group.open_ccs()
        n = len(ccs)
        my_bw = self.btlbw

        # Multipath incentive: close the weakest subflow when aggregating
        # underperforms single-path use of the best path.
        total_del = 0.0
        lowest = math.inf
        highest = 0.0
        for c in ccs:
            total_del += c.last_del_rate
            bw = c.btlbw
            if bw < lowest:
                lowest = bw
            if bw > highest:
                highest = bw
        threshold = highest * (1.0 - CMPBBR_BETA / 100.0)
        if (threshold > total_del and self.last_n_in_btlneck < 2
                and n > 1 and lowest != highest):
            self.stop_lowest_count += 1
        else:
            self.stop_lowest_count = 0
        if self.stop_lowest_count >= 5 and n > 1 and my_bw == lowest:
            self.stop_lowest_count = 5
            self.sub.closed = True

        # Bottleneck fairness: split the measured bandwidth between subflows
        # that appear to sit on the same bottleneck.
        lower = my_bw * (1.0 - CMPBBR_ALPHA / 100.0)
        upper = my_bw * (1.0 + CMPBBR_ALPHA / 100.0)
        n_in_btlneck = 0
        for c in ccs:
            if lower <= c.btlbw <= upper:
                n_in_btlneck += 1
        if n_in_btlneck > 1 and self.last_n_in_btlneck > 1:
            self.final_n_in_btlneck = n_in_btlneck
        elif n_in_btlneck == 1 and self.last_n_in_btlneck > 1:
            self.final_n_in_btlneck = self.last_n_in_btlneck
        else:
            self.final_n_in_btlneck = 1
        self.last_n_in_btlneck = n_in_btlneck
        self.bw_divisor = float(self.final_n_in_btlneck)
