"""Exception hierarchy shared by every module of the package."""


class HumbertVolterraError(Exception):
    """Base class for all errors raised by this package."""


class PoleParameter(HumbertVolterraError, ValueError):
    """A lower series parameter hits a nonpositive integer."""


class DomainError(HumbertVolterraError, ValueError):
    """An argument lies outside the region where the quantity is defined."""


class RegimeError(HumbertVolterraError, ValueError):
    """Parameters violate the inequalities an operation depends on."""


class StencilOutOfDomain(DomainError):
    """A finite-difference stencil leaves the admissible region."""


class ConfigError(HumbertVolterraError, ValueError):
    """Invalid command-line or run configuration."""


class NotConverged(HumbertVolterraError, ArithmeticError):
    """A series hit its term cap before meeting the tail bound.

    The partially summed result is kept on ``partial`` so callers can still
    inspect it.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
