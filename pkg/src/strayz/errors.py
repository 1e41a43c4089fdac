"""Exception types shared across the package."""


class StrayzError(Exception):
    """Base class for all package errors."""


class ValidationError(StrayzError):
    """A circuit file or parameter violates an invariant."""


class DimensionLimitError(StrayzError):
    """The truncated Hilbert space exceeds the configured size limit."""


class ResonanceError(StrayzError):
    """A perturbative denominator fell below the resonance floor.

    ``divergences`` lists the offending detunings as tuples of
    (kind, labels..., value_mhz) so sweep code can record the cell as
    divergent instead of propagating huge numbers.
    """

    def __init__(self, message: str, divergences=None):
        super().__init__(message)
        self.divergences = list(divergences or [])


class HybridizationError(StrayzError):
    """Dressed-state bookkeeping broke down (overlap too small or an
    overlap submatrix lost rank)."""


class MissingStateError(StrayzError):
    """A computational energy required for a Pauli transform is absent."""


class FitError(StrayzError):
    """A scaling-law fit did not reach the required residual."""
