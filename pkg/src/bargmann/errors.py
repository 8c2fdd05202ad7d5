"""Exception types raised across the package."""


class CapacityError(RuntimeError):
    """A Fock sector or permanent exceeds the configured desk-scale limit."""


class TruncationError(ValueError):
    """A truncated state discards more probability mass than allowed."""

    def __init__(self, message, tail_mass=None, suggested_cutoff=None):
        super().__init__(message)
        self.tail_mass = tail_mass
        self.suggested_cutoff = suggested_cutoff


class ConsistencyError(RuntimeError):
    """An internal identity (e.g. a quantity that must be real) was violated."""


class SeriesError(RuntimeError):
    """A truncated series did not converge to the requested tolerance."""

    def __init__(self, message, remainder=None):
        super().__init__(message)
        self.remainder = remainder


class UndefinedEntropyError(ValueError):
    """A sampled power trace is non-positive, so its logarithm is undefined."""
