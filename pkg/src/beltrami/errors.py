"""Exception hierarchy shared by the package."""


class BeltramiError(Exception):
    """Base class for all errors raised by :mod:`beltrami`."""


class InvalidArgument(BeltramiError, ValueError):
    pass


class SamplingFailure(BeltramiError, ValueError):
    """A pointwise function returned a non-finite value at a grid node."""

    def __init__(self, message, nodes=()):
        super().__init__(message)
        self.nodes = list(nodes)


class SupportOverflow(BeltramiError, ValueError):
    """A density handed to a singular-integral transform touches the window margin."""


class DegenerateNode(BeltramiError, ValueError):
    """A derivative pair with ``|g_w| <= |g_wbar|`` (non sense-preserving or singular)."""


class SolverDivergence(BeltramiError, RuntimeError):
    pass


class NoConvergence(BeltramiError, RuntimeError):
    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class FormatError(BeltramiError, ValueError):
    """Malformed input file; the message names the offending line."""
