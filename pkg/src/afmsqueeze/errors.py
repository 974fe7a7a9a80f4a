"""Exception hierarchy shared by all modules."""


class AfmSqueezeError(Exception):
    """Base class for every error raised by the package."""


class ConfigurationError(AfmSqueezeError, ValueError):
    """Invalid user input: unknown path label, malformed config, bad ranges."""


class DomainError(AfmSqueezeError, ValueError):
    """Argument outside the mathematical domain of a function."""


class DegeneratePointError(AfmSqueezeError, ArithmeticError):
    """A mode energy vanishes so the Bogoliubov coefficients diverge."""


class InstabilityError(AfmSqueezeError, ArithmeticError):
    """Mean-field mode softening: (eps + eps_tilde)^2 < |g|^2 somewhere."""

    def __init__(self, message, q=None, params=None):
        super().__init__(message)
        self.q = q
        self.params = params


class ConvergenceError(AfmSqueezeError, RuntimeError):
    """The self-consistent loop did not reach the requested tolerance."""

    def __init__(self, message, residuals=()):
        super().__init__(message)
        self.residuals = list(residuals)


class InvalidTransformError(AfmSqueezeError, ArithmeticError):
    """A composite transform violates |w| > |nu|."""


class CutoffTooSmallError(AfmSqueezeError, RuntimeError):
    """The Fock cutoff truncates a noticeable part of a state."""
