"""Exception types raised by the library."""


class UnphysicalStateError(ValueError):
    """Covariance matrix violates the uncertainty principle or is malformed."""


class SubtractionFromVacuumError(ValueError):
    """Photon subtraction attempted on a mode with (numerically) zero photons."""


class InconsistentRowError(ValueError):
    """Mode-transform coefficients violate the Bogoliubov normalization."""


class NumericDegenerateError(ValueError):
    """A determinant or denominator underflowed past the point of usability."""


class TruncationInsufficientError(RuntimeError):
    """Number-basis cutoff too small: leaked population exceeds the tolerance."""


class GridExtentError(RuntimeError):
    """Quadrature grid misses probability mass; extend or re-center it."""
