"""Congestion-control hook interface and the Reno base rules.

A controller owns its subflow's window arithmetic. The TCP layer detects
losses and recovery transitions; the hooks decide what happens to cwnd and
ssthresh. The Reno rules here are also the base the coupled family falls
back on for slow start and its decrease path.
"""


class CongestionControl:
    """Hook interface; concrete algorithms override what they change."""

    name = "base"
    needs_pacing = False

    __slots__ = ("sub",)

    def __init__(self, sub):
        self.sub = sub

    def on_ack(self, newly, rtt_sample, rec, now, grow=True):
        """Advancing ACK: newly acked bytes, RTT sample (0 if Karn-excluded)."""

    def on_dup_ack_recovery(self, now):
        """Extra duplicate ACK while in fast recovery."""

    def on_partial_ack(self, newly, now):
        """ACK advanced inside recovery without covering the recovery point."""

    def on_loss_detected(self, now):
        """Third duplicate ACK: set ssthresh/cwnd before the fast retransmit."""

    def on_recovery_exit(self, now):
        """ACK covered the recovery point."""

    def on_rto(self, now, first_time):
        """Retransmission timeout; first_time is False when the head segment
        was already resent by a previous RTO (ssthresh then stays put)."""

    def pacing_rate(self):
        """Bytes/second pacing, or None for ack-clocked back-to-back sending."""
        return None


class RenoCc(CongestionControl):
    """Slow start, congestion avoidance, and the multiplicative decrease rules."""

    name = "reno"

    __slots__ = ()

    def on_ack(self, newly, rtt_sample, rec, now, grow=True):
        if not grow:
            return
        sub = self.sub
        smss = sub.smss
        if sub.cwnd < sub.ssthresh:
            sub.cwnd += newly if newly < smss else smss
        else:
            sub.cwnd += smss * smss / sub.cwnd

    def on_dup_ack_recovery(self, now):
        sub = self.sub
        sub.cwnd += sub.smss

    def on_partial_ack(self, newly, now):
        # Deflate by what the partial ACK covered, add back one segment;
        # without this the inflation loop never converges.
        sub = self.sub
        sub.cwnd = max(sub.cwnd - newly + sub.smss, float(sub.smss))

    def on_loss_detected(self, now):
        sub = self.sub
        sub.ssthresh = max(sub.flight_size / 2.0, 2.0 * sub.smss)
        sub.cwnd = sub.ssthresh + 3.0 * sub.smss

    def on_recovery_exit(self, now):
        sub = self.sub
        sub.cwnd = sub.ssthresh

    def on_rto(self, now, first_time):
        sub = self.sub
        if first_time:
            sub.ssthresh = max(sub.flight_size / 2.0, 2.0 * sub.smss)
        sub.cwnd = float(sub.smss)
