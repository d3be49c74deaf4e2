"""Exception types shared across the package."""


class GpelabError(Exception):
    """Base class for all gpelab errors."""


class GridMismatch(GpelabError):
    """Fields in one operation live on different grids."""


class ZeroField(GpelabError):
    """An operation that needs a nonzero field received (numerically) zero."""


class NoBracket(GpelabError):
    """Shooting bisection could not establish a valid bracket."""


class NotConverged(GpelabError):
    """An iterative procedure exhausted its budget."""


class CollapseDetected(GpelabError):
    """The flow is concentrating past grid resolvability (supercritical coupling)."""


class OutOfRange(GpelabError):
    """A radial profile was queried beyond its resolvable coverage."""


class UnderResolved(GpelabError):
    """The requested scale cannot be represented on the given grid."""


class OutOfRegime(GpelabError):
    """Parameters fall outside the asymptotic regime an estimate requires."""


class InsufficientPoints(GpelabError):
    """A trend classification needs more schedule points."""


class DegenerateInput(GpelabError):
    """A regression received degenerate data."""


class TailUnresolved(GpelabError):
    """A field tail has too little dynamic range for a decay fit."""


class ConfigError(GpelabError):
    """A run configuration failed validation."""
