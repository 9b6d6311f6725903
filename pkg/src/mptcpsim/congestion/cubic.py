"""CUBIC congestion avoidance: cubic window growth with TCP-friendly clamp.

Window accounting is in packets internally (the classic formulation); the
subflow's byte window is kept in sync after every change. Times are seconds.
"""

from .base import CongestionControl

C = 0.4
BETA = 0.2


class CubicCc(CongestionControl):

    name = "cubic"

    __slots__ = ("w_last_max", "epoch_start", "origin_point", "d_min",
                 "w_tcp", "k", "ack_cnt", "cwnd_cnt", "cnt", "cwnd_pkts",
                 "tcp_friendliness", "fast_convergence")

    def __init__(self, sub):
        self.sub = sub
        self.tcp_friendliness = True
        self.fast_convergence = True
        self.cwnd_pkts = sub.cwnd / sub.smss
        self.cwnd_cnt = 0.0
        self.cnt = 0.0
        self.cubic_reset()

    def cubic_reset(self):
        self.w_last_max = 0.0
        self.epoch_start = 0.0
        self.origin_point = 0.0
        self.d_min = 0.0
        self.w_tcp = 0.0
        self.k = 0.0
        self.ack_cnt = 0

    def _sync(self):
        self.sub.cwnd = self.cwnd_pkts * self.sub.smss

    def on_ack(self, newly, rtt_sample, rec, now, grow=True):
        if not grow:
            return
        if rtt_sample > 0:
            rtt_s = rtt_sample * 1e-9
            if self.d_min:
                if rtt_s < self.d_min:
                    self.d_min = rtt_s
            else:
                self.d_min = rtt_s
        sub = self.sub
        if self.cwnd_pkts <= sub.ssthresh / sub.smss:
            self.cwnd_pkts += 1.0
            self._sync()
            return
        self.cnt = self.cubic_update(now * 1e-9)
        if self.cwnd_cnt > self.cnt:
            self.cwnd_pkts += 1.0
            self.cwnd_cnt = 0.0
            self._sync()
        else:
            self.cwnd_cnt += 1.0

    def cubic_update(self, now_s):
        cwnd = self.cwnd_pkts
        self.ack_cnt += 1
        if self.epoch_start <= 0:
            self.epoch_start = now_s
            if cwnd < self.w_last_max:
                self.k = ((self.w_last_max - cwnd) / C) ** (1.0 / 3.0)
                self.origin_point = self.w_last_max
            else:
                self.k = 0.0
                self.origin_point = cwnd
            self.ack_cnt = 1
            self.w_tcp = cwnd
        t = now_s + self.d_min - self.epoch_start
        target = self.origin_point + C * (t - self.k) ** 3
        if target > cwnd:
            cnt = cwnd / (target - cwnd)
        else:
            cnt = 100.0 * cwnd
        if self.tcp_friendliness:
            cnt = self._tcp_friendliness(cnt)
        return cnt

    def _tcp_friendliness(self, cnt):
        cwnd = self.cwnd_pkts
        self.w_tcp += 3.0 * BETA / (2.0 - BETA) * self.ack_cnt / cwnd
        self.ack_cnt = 0
        if self.w_tcp > cwnd:
            max_cnt = cwnd / (self.w_tcp - cwnd)
            if cnt > max_cnt:
                cnt = max_cnt
        return cnt

    def _loss_block(self):
        cwnd = self.cwnd_pkts
        self.epoch_start = 0.0
        if cwnd < self.w_last_max and self.fast_convergence:
            self.w_last_max = cwnd * (2.0 - BETA) / 2.0
        else:
            self.w_last_max = cwnd
        self.cwnd_pkts = max(cwnd * (1.0 - BETA), 1.0)
        self.sub.ssthresh = self.cwnd_pkts * self.sub.smss
        self._sync()

    def on_loss_detected(self, now):
        self._loss_block()

    def on_dup_ack_recovery(self, now):
        self.cwnd_pkts += 1.0
        self._sync()

    def on_partial_ack(self, newly, now):
        self.cwnd_pkts = max(self.cwnd_pkts - newly / self.sub.smss + 1.0, 1.0)
        self._sync()

    def on_recovery_exit(self, now):
        sub = self.sub
        sub.cwnd = sub.ssthresh
        self.cwnd_pkts = sub.cwnd / sub.smss

    def on_rto(self, now, first_time):
        if first_time:
            self._loss_block()
        self.cubic_reset()
        self.cwnd_pkts = 1.0
        self._sync()
