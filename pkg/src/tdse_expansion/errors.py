"""Exception types shared across the package."""


class RangeError(OverflowError):
    """A special-function evaluation left the representable range."""


class GridTooSmallError(ValueError):
    """Quadrature grid does not cover the support of the integrand."""


class DomainOverflowError(RuntimeError):
    """Grid wavefunction reached the box boundary."""


class NumericalFailure(ArithmeticError):
    """Non-finite values appeared in a propagated state."""


class ConfigError(ValueError):
    """Invalid or unknown experiment configuration."""
