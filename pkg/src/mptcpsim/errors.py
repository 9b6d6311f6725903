"""Exception types shared across the simulator."""


class PastEventError(ValueError):
    """Attempt to schedule or run to a point behind the virtual clock."""


class BadProbabilityError(ValueError):
    """Probability outside [0, 1]."""


class UnknownSubflowError(ValueError):
    """Subflow id outside the configured set."""


class NothingToSend(Exception):
    """Retransmission queue and send buffer are both empty."""


class WindowOverflowError(RuntimeError):
    """Data arrived beyond the advertised receive window (flow-control bug)."""


class SizeMismatchError(ValueError):
    """Aggregate input length does not match the declared family size."""


class IncompleteGridError(ValueError):
    """Controller score requested over a partial scheduler x family grid."""


class EmptyInputError(ValueError):
    """Distribution function over an empty sample."""


class ZeroBytesError(ValueError):
    """Per-packet delay is undefined for zero delivered bytes."""


class MatrixConfigError(ValueError):
    """Scenario config file failed to parse or holds out-of-range values."""
