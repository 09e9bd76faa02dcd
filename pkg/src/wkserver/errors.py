"""Exception hierarchy shared by every module."""


class WkServerError(Exception):
    """Base class for all library errors."""


class ValidationError(WkServerError, ValueError):
    """Malformed input: bad weights, points outside the metric, bad anchors."""


class MetricTooSmallError(WkServerError, ValueError):
    """A critical set needs more points than the metric (or space) provides."""


class InstanceTooLargeError(WkServerError):
    """An exact computation would exceed its configured state budget."""

    def __init__(self, message, budget=None):
        super().__init__(message)
        self.budget = budget


class ConstantTooLargeError(WkServerError, OverflowError):
    """An exact constant cannot be materialised (e.g. h(2**24 - 1))."""


class NotActiveError(WkServerError, ValueError):
    """A solution moves a server that the requested activity level forbids."""
