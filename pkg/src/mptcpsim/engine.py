"""Discrete-event core: virtual clock, ordered event queue, seeded randomness.

Virtual time is integer nanoseconds. Events with equal fire times dispatch
in scheduling order (a monotonic sequence number breaks ties), which is what
makes whole runs replayable bit-for-bit.
"""

import hashlib
import heapq
import random

from .errors import BadProbabilityError, PastEventError


def derive_seed(seed, stream_id):
    """Stable 64-bit seed for a named consumer of a master seed.

    Hash-based so that adding or reordering consumers never shifts the
    draws another consumer sees.
    """
    digest = hashlib.blake2b(
        f"{seed}:{stream_id}".encode(), digest_size=8
    ).digest()
    return int.from_bytes(digest, "big")


class RngStream:
    """Deterministic random stream owned by one consumer (e.g. one lossy link)."""

    __slots__ = ("seed", "stream_id", "_rng", "random")

    def __init__(self, seed, stream_id):
        self.seed = seed
        self.stream_id = stream_id
        self._rng = random.Random(derive_seed(seed, stream_id))
        # Bound method; hot paths call stream.random() directly.
        self.random = self._rng.random

    def bernoulli(self, p):
        if not 0.0 <= p <= 1.0:
            raise BadProbabilityError(f"p={p} outside [0, 1]")
        return self._rng.random() < p

    def randint(self, lo, hi):
        return self._rng.randint(lo, hi)


class SimEngine:
    """Binary-heap event queue keyed by (fire_at, seq_no).

    Heap entries are mutable lists [fire_at, seq_no, callback, payload]; the
    entry itself is the cancellation handle (callback slot set to None).
    Callbacks receive (payload, fire_at).
    """

    __slots__ = ("now", "_heap", "_seq")

    def __init__(self):
        self.now = 0
        self._heap = []
        self._seq = 0

    def schedule(self, fire_at, fn, payload=None):
        if fire_at < self.now:
            raise PastEventError(f"fire_at {fire_at} < now {self.now}")
        seq = self._seq
        self._seq = seq + 1
        event = [fire_at, seq, fn, payload]
        heapq.heappush(self._heap, event)
        return event

    def cancel(self, event):
        event[2] = None

    def run_until(self, deadline):
        """Dispatch every event with fire_at <= deadline; clock ends at deadline."""
        if deadline < self.now:
            raise PastEventError(f"deadline {deadline} < now {self.now}")
        heap = self._heap
        pop = heapq.heappop
        dispatched = 0
        while heap and heap[0][0] <= deadline:
            fire_at, _, fn, payload = pop(heap)
            if fn is None:
                continue
            self.now = fire_at
            fn(payload, fire_at)
            dispatched += 1
        self.now = deadline
        return dispatched

    def pending(self):
        return sum(1 for e in self._heap if e[2] is not None)
