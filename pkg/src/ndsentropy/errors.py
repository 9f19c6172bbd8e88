"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Analysis parameters violate a documented precondition."""


class NonIsolatedFixedPointsError(ArithmeticError):
    """A whole linear piece of the composed map lies on the diagonal."""


class UnsupportedLengthError(ValueError):
    """Closed pseudo-orbit length must be a multiple of the sequence period."""


class NotChainMixingError(RuntimeError):
    """Reachable sets failed to saturate: the system is not chain mixing."""

    def __init__(self, message, worst_node=None):
        super().__init__(message)
        self.worst_node = worst_node


class NumericError(RuntimeError):
    """An iterative numeric routine failed to converge."""

    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations
