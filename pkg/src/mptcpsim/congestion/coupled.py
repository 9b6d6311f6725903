"""Coupled loss-based controllers: LIA, OLIA, BALIA.

All three keep Reno slow start, fast retransmit, and fast recovery; they
replace the congestion-avoidance increase (and BALIA also the decrease).
Connection-wide quantities are read through a shared group object updated
synchronously inside the single-threaded event loop. The LIA alpha and the
OLIA path sets are recomputed at most once per RTT and cached between.
"""

from .base import RenoCc

MIN_CWND = 1.0   # packets; windows never drop below one segment


class CoupledGroup:
    """Connection-level view shared by the coupled controllers."""

    __slots__ = ("subs", "alpha", "next_alpha_at",
                 "olia_sets", "next_sets_at", "olia_ccs")

    def __init__(self):
        self.subs = []
        self.alpha = 1.0
        self.next_alpha_at = 0
        self.olia_sets = None
        self.next_sets_at = 0
        self.olia_ccs = []

    def attach(self, sub):
        self.subs.append(sub)

    def active(self):
        return [s for s in self.subs if not s.closed]

    def min_srtt(self):
        vals = [s.srtt for s in self.active() if s.srtt > 0]
        return min(vals) if vals else 1_000_000


def lia_alpha(windows, rtts, cwnd_total):
    """Aggressiveness factor tying the aggregate to best-path TCP."""
    best = 0.0
    denom = 0.0
    for w, r in zip(windows, rtts):
        v = w / (r * r)
        if v > best:
            best = v
        denom += w / r
    if denom <= 0:
        return 1.0
    return cwnd_total * best / (denom * denom)


def lia_increment(alpha, acked, smss, cwnd_total, w):
    """Per-ACK window increase in bytes: min of coupled and best-path TCP terms."""
    return min(alpha * acked * smss / cwnd_total, acked * smss / w)


def olia_a_r(in_collected, in_max_w, n_paths, n_collected, n_max_w):
    """The per-path adjustment term; sums to zero across all paths."""
    if n_collected > 0:
        if in_collected:
            return (1.0 / n_paths) / n_collected
        if in_max_w:
            return -(1.0 / n_paths) / n_max_w
    return 0.0


def olia_increment(acked, smss, w, rtt, sum_w_over_rtt, a_r):
    """Per-ACK window increase in bytes (may be negative on max-window paths)."""
    base = (w / (rtt * rtt)) / (sum_w_over_rtt * sum_w_over_rtt)
    return acked * smss * (base + a_r / w)


def balia_increment(acked, smss, w, rtt, xs):
    x_r = w / rtt
    total = sum(xs)
    a_r = max(xs) / x_r
    return acked * smss * (x_r / (rtt * total * total)) * ((1.0 + a_r) / 2.0) * ((4.0 + a_r) / 5.0)


def balia_decrement(w, a_r):
    return (w / 2.0) * min(a_r, 1.5)


class LiaCc(RenoCc):

    name = "lia"

    __slots__ = ("group",)

    def __init__(self, sub, group):
        super().__init__(sub)
        self.group = group
        group.attach(sub)

    def on_ack(self, newly, rtt_sample, rec, now, grow=True):
        if not grow:
            return
        sub = self.sub
        if sub.cwnd < sub.ssthresh:
            sub.cwnd += newly if newly < sub.smss else sub.smss
            return
        g = self.group
        subs = g.active()
        total = sum(s.cwnd for s in subs)
        if now >= g.next_alpha_at:
            windows = [s.cwnd for s in subs]
            rtts = [float(s.srtt) if s.srtt > 0 else 1e6 for s in subs]
            g.alpha = lia_alpha(windows, rtts, total)
            g.next_alpha_at = now + g.min_srtt()
        sub.cwnd += lia_increment(g.alpha, newly, sub.smss, total, sub.cwnd)

    def on_loss_detected(self, now):
        sub = self.sub
        sub.ssthresh = max(sub.cwnd / 2.0, 2.0 * sub.smss)
        sub.cwnd = sub.ssthresh + 3.0 * sub.smss
        self.group.next_alpha_at = 0   # alpha also refreshes on loss


class OliaCc(RenoCc):

    name = "olia"

    __slots__ = ("group", "bytes_since_loss", "last_interval")

    def __init__(self, sub, group):
        super().__init__(sub)
        self.group = group
        group.attach(sub)
        group.olia_ccs.append(self)
        self.bytes_since_loss = 0
        self.last_interval = 0

    def loss_proxy(self):
        """Inter-loss delivered bytes; credits a currently clean path."""
        return max(self.bytes_since_loss, self.last_interval)

    def _recompute_sets(self, now):
        g = self.group
        ccs = [c for c in g.olia_ccs if not c.sub.closed]
        if not ccs:
            return
        best_metric = max(
            c.loss_proxy() / (float(c.sub.srtt if c.sub.srtt > 0 else 1e6) ** 2)
            for c in ccs
        )
        max_w = max(c.sub.cwnd for c in ccs)
        best = set()
        max_w_set = set()
        for c in ccs:
            m = c.loss_proxy() / (float(c.sub.srtt if c.sub.srtt > 0 else 1e6) ** 2)
            if m >= best_metric:
                best.add(c.sub.sf_id)
            if c.sub.cwnd >= max_w:
                max_w_set.add(c.sub.sf_id)
        collected = best - max_w_set
        g.olia_sets = (len(ccs), collected, max_w_set)
        g.next_sets_at = now + g.min_srtt()

    def on_ack(self, newly, rtt_sample, rec, now, grow=True):
        self.bytes_since_loss += newly
        if not grow:
            return
        sub = self.sub
        if sub.cwnd < sub.ssthresh:
            sub.cwnd += newly if newly < sub.smss else sub.smss
            return
        g = self.group
        if g.olia_sets is None or now >= g.next_sets_at:
            self._recompute_sets(now)
        n_paths, collected, max_w_set = g.olia_sets
        a_r = olia_a_r(sub.sf_id in collected, sub.sf_id in max_w_set,
                       n_paths, len(collected), len(max_w_set))
        subs = g.active()
        sum_w_over_rtt = sum(
            s.cwnd / (float(s.srtt) if s.srtt > 0 else 1e6) for s in subs
        )
        rtt = float(sub.srtt) if sub.srtt > 0 else 1e6
        sub.cwnd += olia_increment(newly, sub.smss, sub.cwnd, rtt,
                                   sum_w_over_rtt, a_r)
        if sub.cwnd < MIN_CWND * sub.smss:
            sub.cwnd = MIN_CWND * sub.smss

    def on_loss_detected(self, now):
        sub = self.sub
        sub.ssthresh = max(sub.cwnd / 2.0, 2.0 * sub.smss)
        sub.cwnd = sub.ssthresh + 3.0 * sub.smss
        self.last_interval = self.bytes_since_loss
        self.bytes_since_loss = 0
        self.group.next_sets_at = 0


class BaliaCc(RenoCc):

    name = "balia"

    __slots__ = ("group",)

    def __init__(self, sub, group):
        super().__init__(sub)
        self.group = group
        group.attach(sub)

    def _xs(self):
        return [
            s.cwnd / (float(s.srtt) if s.srtt > 0 else 1e6)
            for s in self.group.active()
        ]

    def on_ack(self, newly, rtt_sample, rec, now, grow=True):
        if not grow:
            return
        sub = self.sub
        if sub.cwnd < sub.ssthresh:
            sub.cwnd += newly if newly < sub.smss else sub.smss
            return
        rtt = float(sub.srtt) if sub.srtt > 0 else 1e6
        sub.cwnd += balia_increment(newly, sub.smss, sub.cwnd, rtt, self._xs())

    def on_loss_detected(self, now):
        sub = self.sub
        rtt = float(sub.srtt) if sub.srtt > 0 else 1e6
        xs = self._xs()
        a_r = max(xs) / (sub.cwnd / rtt) if xs else 1.0
        dec = balia_decrement(sub.cwnd, a_r)
        sub.ssthresh = max(sub.cwnd - dec, 2.0 * sub.smss)
        sub.cwnd = sub.ssthresh + 3.0 * sub.smss
