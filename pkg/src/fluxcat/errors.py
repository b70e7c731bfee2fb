"""Exception types shared across the package."""


class FluxcatError(Exception):
    """Base class for all package errors."""


class ConfigError(FluxcatError, ValueError):
    """Invalid parameters, options, or configuration input."""


class NumericalError(FluxcatError, RuntimeError):
    """A numerical routine failed or produced an untrustworthy result."""


class EigensolveError(NumericalError):
    """Dense eigendecomposition failed to converge or violated its residual bound."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class BoundaryLeakError(NumericalError):
    """Wavefunction tail does not decay below tolerance at the grid boundary."""


class ResolutionError(NumericalError):
    """Grid spacing too coarse for the requested computation."""


class TruncationLossError(NumericalError):
    """Projection onto the truncated oscillator basis lost too much trace weight."""


class InvalidDensityError(NumericalError):
    """Matrix fails trace or positivity requirements of a density matrix."""


class MonotonicityError(NumericalError):
    """Response function is not monotone on the inversion bracket."""


class BinningMismatchError(ConfigError):
    """Two outcome distributions do not share the same binning."""
