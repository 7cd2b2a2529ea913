"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: schema problems exit 2, numeric
failures exit 3, calibration non-convergence exit 4.
"""


class CapstructError(Exception):
    """Base class for all package-specific errors."""


class SchemaError(CapstructError):
    """Malformed input file, unknown column, or out-of-range field."""


class NumericError(CapstructError):
    """A pricing computation could not produce a trustworthy number."""


class DomainError(NumericError):
    """Argument outside the analytic domain (branch cut, pole, bad contour)."""


class TruncationError(NumericError):
    """Integrand has not decayed at the grid boundary; result untrusted."""


class InversionQualityError(NumericError):
    """Fourier-inverted density failed a sanity check (negative lobes, mass)."""


class PriceBoundsError(NumericError):
    """Option price violates its arbitrage bounds; nothing to invert."""


class ConvergenceError(CapstructError):
    """Iterative solver or optimizer failed to converge."""
