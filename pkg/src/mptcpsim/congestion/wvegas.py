"""Weighted Vegas: delay-based coupled control.

Queuing delay is the congestion signal. Each subflow holds a share (weight)
of a connection-wide backlog budget (total_alpha packets); windows move by
one packet per round against that share, with a multiplicative backoff once
the measured queuing delay doubles past the smallest delay seen.

All Vegas arithmetic is in packets; the round-end step is the exact
per-round update, exposed standalone so it can be cross-checked directly.
"""

from .base import RenoCc

TOTAL_ALPHA = 10.0
MIN_CWND_PKTS = 2.0


class WvegasGroup:
    """Per-connection arrays indexed by subflow id."""

    __slots__ = ("total_alpha", "alpha", "equilibrium_rates", "queue_delays",
                 "weights")

    def __init__(self, sf_ids, total_alpha=TOTAL_ALPHA):
        self.total_alpha = total_alpha
        self.alpha = {r: 2.0 for r in sf_ids}
        self.equilibrium_rates = {r: 0.0 for r in sf_ids}
        self.queue_delays = {r: 0.0 for r in sf_ids}
        self.weights = {r: 0.0 for r in sf_ids}


def adjust_weights(group):
    total_rate = sum(group.equilibrium_rates.values())
    if total_rate <= 0:
        return
    for r, rate in group.equilibrium_rates.items():
        if rate != 0:
            group.weights[r] = rate / total_rate


def round_end(group, r, cwnd_pkts, rtt_s, base_rtt_s):
    """One end-of-round window adjustment; returns (new_cwnd_pkts, diff).

    diff approximates the packets this subflow keeps queued in the network.
    """
    diff = cwnd_pkts * (rtt_s - base_rtt_s) / rtt_s
    if diff >= group.alpha[r]:
        group.equilibrium_rates[r] = cwnd_pkts / rtt_s
        adjust_weights(group)
        group.alpha[r] = max(2.0, group.weights[r] * group.total_alpha)
    if diff < group.alpha[r]:
        cwnd_pkts += 1.0
    elif diff > group.alpha[r]:
        cwnd_pkts -= 1.0
    q = rtt_s - base_rtt_s
    if group.queue_delays[r] == 0 or group.queue_delays[r] > q:
        group.queue_delays[r] = q
    if q >= 2.0 * group.queue_delays[r]:
        cwnd_pkts *= 0.5 * base_rtt_s / rtt_s
        group.queue_delays[r] = 0.0
    return max(MIN_CWND_PKTS, cwnd_pkts), diff


class WvegasCc(RenoCc):

    name = "wvegas"

    __slots__ = ("group", "base_rtt", "sampled_sum", "sampled_num",
                 "round_mark")

    def __init__(self, sub, group):
        super().__init__(sub)
        self.group = group
        self.base_rtt = 0
        self.sampled_sum = 0
        self.sampled_num = 0
        self.round_mark = 0

    def on_ack(self, newly, rtt_sample, rec, now, grow=True):
        sub = self.sub
        if rtt_sample > 0:
            if self.base_rtt == 0 or rtt_sample < self.base_rtt:
                self.base_rtt = rtt_sample
            self.sampled_sum += rtt_sample
            self.sampled_num += 1
        if sub.snd_una > self.round_mark:
            # One round per window of data, as the live implementation
            # counts it (ACK past the snd_nxt recorded at round start).
            self.round_mark = sub.snd_nxt
            if self.sampled_num > 0 and self.base_rtt > 0:
                rtt = (self.sampled_sum / self.sampled_num) * 1e-9
                base = self.base_rtt * 1e-9
                cwnd_pkts = sub.cwnd / sub.smss
                if sub.cwnd < sub.ssthresh:
                    # Slow start ends on the delay signal, not on loss,
                    # clamped back to the rate the round actually sustained.
                    diff = cwnd_pkts * (rtt - base) / rtt
                    if diff >= self.group.alpha[sub.sf_id]:
                        target = cwnd_pkts * base / rtt
                        if cwnd_pkts > target + 1.0:
                            sub.cwnd = (target + 1.0) * sub.smss
                        sub.ssthresh = max(sub.cwnd - sub.smss,
                                           MIN_CWND_PKTS * sub.smss)
                else:
                    new_cwnd, _ = round_end(self.group, sub.sf_id,
                                            cwnd_pkts, rtt, base)
                    sub.cwnd = new_cwnd * sub.smss
            self.sampled_sum = 0
            self.sampled_num = 0
        elif grow and sub.cwnd < sub.ssthresh:
            sub.cwnd += newly if newly < sub.smss else sub.smss

    def on_loss_detected(self, now):
        super().on_loss_detected(now)
        self.group.equilibrium_rates[self.sub.sf_id] = 0.0
        self.group.queue_delays[self.sub.sf_id] = 0.0

    def on_rto(self, now, first_time):
        super().on_rto(now, first_time)
        self.group.equilibrium_rates[self.sub.sf_id] = 0.0
        self.group.queue_delays[self.sub.sf_id] = 0.0
