"""Congestion-control algorithms behind one hook interface.

Selected by name: cubic, lia, olia, balia, wvegas, bbr, cmpbbr.
"""

from .base import RenoCc
from .bbr import BbrCc, CmpbbrCc, CmpbbrGroup
from .coupled import BaliaCc, CoupledGroup, LiaCc, OliaCc
from .cubic import CubicCc
from .wvegas import WvegasCc, WvegasGroup

CCA_NAMES = ("cubic", "lia", "olia", "balia", "wvegas", "bbr", "cmpbbr")


def make_ccas(name, subflows, rng_for):
    """Instantiate one controller per subflow, wiring any shared group state.

    rng_for(stream_id) supplies a deterministic stream per consumer.
    """
    if name == "cubic":
        return [CubicCc(s) for s in subflows]
    if name == "lia":
        g = CoupledGroup()
        return [LiaCc(s, g) for s in subflows]
    if name == "olia":
        g = CoupledGroup()
        return [OliaCc(s, g) for s in subflows]
    if name == "balia":
        g = CoupledGroup()
        return [BaliaCc(s, g) for s in subflows]
    if name == "wvegas":
        g = WvegasGroup([s.sf_id for s in subflows])
        return [WvegasCc(s, g) for s in subflows]
    if name == "bbr":
        return [BbrCc(s, rng_for(f"bbr-cycle-{s.sf_id}")) for s in subflows]
    if name == "cmpbbr":
        g = CmpbbrGroup()
        return [CmpbbrCc(s, rng_for(f"bbr-cycle-{s.sf_id}"), g) for s in subflows]
    if name == "reno":
        return [RenoCc(s) for s in subflows]
    raise ValueError(f"unknown congestion control algorithm: {name!r}")
