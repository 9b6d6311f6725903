"""Packet-scheduling decision functions: minrtt, blest, ecf, rr, llhd, remp.

Each scheduler reads a SchedView (per-subflow snapshot plus connection-level
window figures) and returns a SchedDecision or None to wait. Ties in every
argmin/argmax go to the lowest subflow id so replays are deterministic.
"""

from typing import NamedTuple, Optional


class SchedDecision(NamedTuple):
    target: object                      # subflow view chosen to carry the segment
    duplicate_on: Optional[object] = None   # remp only: mirror onto this subflow


class SchedView:
    """Read-only snapshot handed to a decision function."""

    __slots__ = ("subflows", "send_window", "remaining_bytes")

    def __init__(self, subflows, send_window, remaining_bytes):
        self.subflows = subflows
        self.send_window = send_window
        self.remaining_bytes = remaining_bytes


def _ranked_non_backup(view):
    subs = [s for s in view.subflows if not s.backup and not s.closed]
    subs.sort(key=lambda s: (s.srtt, s.sf_id))
    return subs


class MinRtt:
    """Lowest-RTT subflow with congestion-window space."""

    name = "minrtt"

    def decide(self, view):
        best = None
        best_srtt = None
        for s in view.subflows:
            if s.backup or s.closed or not s.available:
                continue
            if best_srtt is None or s.srtt < best_srtt:
                best = s
                best_srtt = s.srtt
        if best is None:
            return None
        return SchedDecision(best)


class Blest:
    """Skips the slow subflow when using it is predicted to block the send window.

    lambda_ scales the estimate of data the fast subflow would send during one
    slow-subflow RTT; it grows on observed send-window blocking and decays
    back toward 1.0 (its initial value) over blocking-free RTTs.
    """

    name = "blest"

    def __init__(self, lambda_=1.0):
        self.lambda_ = lambda_

    def note_window_blocked(self):
        self.lambda_ += 0.5

    def decay(self):
        self.lambda_ = max(1.0, self.lambda_ * 0.99)

    def decide(self, view):
        ranked = _ranked_non_backup(view)
        if not ranked:
            return None
        fast = ranked[0]
        if fast.available:
            return SchedDecision(fast)
        for slow in ranked[1:]:
            if not slow.available:
                continue
            rtt_ratio = (slow.srtt / fast.srtt) if fast.srtt > 0 else 1.0
            cwnd_f_pkts = fast.cwnd / fast.smss
            x = fast.smss * (cwnd_f_pkts + (rtt_ratio - 1.0) / 2.0) * rtt_ratio
            inflight_s_pkts = slow.inflight / slow.smss
            if x * self.lambda_ <= view.send_window - slow.smss * (inflight_s_pkts + 1.0):
                return SchedDecision(slow)
            return None
        return None


class Ecf:
    """Uses the slow subflow only when that cannot delay flow completion.

    beta is switchover hysteresis; the waiting flag remembers that we chose
    to hold segments for the fast subflow.
    """

    name = "ecf"

    def __init__(self, beta=0.25):
        self.beta = beta
        self.waiting = 0

    def decide(self, view):
        ranked = _ranked_non_backup(view)
        if not ranked:
            return None
        fast = ranked[0]
        if fast.available:
            return SchedDecision(fast)
        if len(ranked) < 2:
            return None
        slow = ranked[1]
        if not slow.available:
            return None
        k = view.remaining_bytes
        n = 1.0 + (k / fast.cwnd if fast.cwnd > 0 else 0.0)
        delta = max(fast.rttvar, slow.rttvar)
        if n * fast.srtt < (1.0 + self.waiting * self.beta) * (slow.srtt + delta):
            if (k / slow.cwnd if slow.cwnd > 0 else 0.0) * slow.srtt >= 2.0 * fast.srtt + delta:
                self.waiting = 1
                return None
            return SchedDecision(slow)
        self.waiting = 0
        return SchedDecision(slow)


class RoundRobin:
    """Fixed-order rotation granting num_segments full segments per visit.

    With cwnd_limited=True (the default) a subflow is eligible whenever a
    full burst fits in its window, so bulk transfers become ack-clocked.
    Otherwise eligibility additionally requires at most half the window in
    flight, preserving true rotation.
    """

    name = "rr"

    def __init__(self, num_segments=1, cwnd_limited=True):
        self.num_segments = num_segments
        self.cwnd_limited = cwnd_limited
        self._last = -1
        self._grants_left = 0

    def _eligible(self, s):
        if s.backup or s.closed or not s.available:
            return False
        if s.cwnd - s.inflight < self.num_segments * s.smss:
            return False
        if not self.cwnd_limited and s.inflight >= s.cwnd / 2.0:
            return False
        return True

    def decide(self, view):
        subs = view.subflows
        n = len(subs)
        if self._grants_left > 0 and 0 <= self._last < n:
            # Burst already committed; later segments only need their own room.
            cur = subs[self._last]
            if (not cur.backup and not cur.closed and cur.available
                    and cur.cwnd - cur.inflight >= cur.smss):
                self._grants_left -= 1
                return SchedDecision(cur)
            self._grants_left = 0
        for step in range(1, n + 1):
            idx = (self._last + step) % n
            s = subs[idx]
            if self._eligible(s):
                self._last = idx
                self._grants_left = self.num_segments - 1
                return SchedDecision(s)
        return None


class Llhd:
    """Maximizes goodput + beta/RTT, both max-normalized over current subflows."""

    name = "llhd"

    def __init__(self, beta=0.001):
        self.beta = beta

    def _utility(self, s, gp_max, rtt_max):
        gp_term = (s.goodput / gp_max) if gp_max > 0 else 0.0
        rtt_term = (rtt_max / s.srtt) if s.srtt > 0 else 0.0
        return gp_term + self.beta * rtt_term

    def decide(self, view):
        subs = [s for s in view.subflows if not s.closed]
        if not subs:
            return None
        gp_max = max(s.goodput for s in subs)
        rtt_max = max(s.srtt for s in subs)
        best = None
        best_u = None
        for s in subs:
            if s.backup or not s.available:
                continue
            u = self._utility(s, gp_max, rtt_max)
            if best_u is None or u > best_u:
                best = s
                best_u = u
        if best is None:
            # Backup subflows carry traffic only when nothing normal can.
            for s in subs:
                if s.backup and s.available:
                    u = self._utility(s, gp_max, rtt_max)
                    if best_u is None or u > best_u:
                        best = s
                        best_u = u
        if best is None:
            return None
        return SchedDecision(best)


class Remp:
    """Mirrors every segment on all available subflows; receiver dedups by DSN."""

    name = "remp"

    def decide(self, view):
        first = None
        second = None
        for s in view.subflows:
            if s.closed or not s.available:
                continue
            if first is None:
                first = s
            elif second is None:
                second = s
                break
        if first is None:
            return None
        return SchedDecision(first, second)


SCHEDULER_NAMES = ("minrtt", "blest", "ecf", "rr", "llhd", "remp")

_FACTORIES = {
    "minrtt": MinRtt,
    "blest": Blest,
    "ecf": Ecf,
    "rr": RoundRobin,
    "llhd": Llhd,
    "remp": Remp,
}


def make_scheduler(name, **kwargs):
    try:
        factory = _FACTORIES[name]
    except KeyError:
        raise ValueError(f"unknown scheduler: {name!r}") from None
    return factory(**kwargs)
