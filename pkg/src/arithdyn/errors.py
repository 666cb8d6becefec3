"""Exception types shared across the package."""


class ArithDynError(Exception):
    """Base class for domain errors raised by arithdyn."""


class ParseError(ArithDynError, ValueError):
    pass


class DegreeMismatch(ArithDynError, ValueError):
    pass


class DegenerateFamily(ArithDynError, ValueError):
    """The two forms of a family share a factor over Q(t)."""


class DegenerateParameter(ArithDynError, ValueError):
    """The specialized map drops degree (resultant vanishes at the parameter)."""


class DegreeOverflow(ArithDynError, RuntimeError):
    """An orbit degree exceeded the configured ceiling."""


class IdenticallyZero(ArithDynError, ValueError):
    """An orbit relation holds identically in t."""


class PreperiodicInput(ArithDynError, ValueError):
    """A marked point that is preperiodic was passed where non-preperiodic is required."""


class NonConvergence(ArithDynError, RuntimeError):
    """Root iteration did not converge; ``partial`` carries what was found."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class EmptyInput(ArithDynError, ValueError):
    pass
