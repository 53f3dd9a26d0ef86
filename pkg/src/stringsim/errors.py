"""Exception types shared across the simulator."""


class StringSimError(Exception):
    """Base class for all simulator errors."""


class SizeLimit(StringSimError):
    """Requested system size exceeds the supported enumeration/memory scale."""


class MemoryLimit(StringSimError):
    """Dense storage would exceed the configured memory budget."""


class GaussViolation(StringSimError):
    """Gauge configuration does not satisfy the Gauss-law constraint."""


class InvalidProfile(StringSimError):
    """Interaction profile violates its preconditions (e.g. J_1 <= 0)."""


class DegenerateGeometry(StringSimError):
    """Two ion positions coincide; the Coulomb Hessian is singular."""


class ResonanceError(StringSimError):
    """Drive detuning too close to a motional mode frequency."""


class NoConvergence(StringSimError):
    """Optimizer failed to converge; carries the best iterate found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class IllConditioned(StringSimError):
    """Fit problem has too few independent data points."""


class ToleranceNotMet(StringSimError):
    """Propagator could not meet the requested error tolerance."""


class IndexOutOfRange(StringSimError):
    """Charge-pair coordinates outside the allowed triangle."""


class ResonantDenominator(StringSimError):
    """A perturbative energy denominator is (near) zero; the expansion is invalid."""


class InsufficientSpread(StringSimError):
    """Observable front never left the initial site; no velocity to fit."""


class NoOscillation(StringSimError):
    """Mean charge position is monotone over the window; no period to fit."""


class OutOfBracket(StringSimError):
    """Target energy outside the range reachable by a canonical ensemble."""


class ConfigError(StringSimError):
    """Scenario configuration file failed validation."""
