"""Exception hierarchy shared across the package."""


class UdngcError(Exception):
    """Base class for all package errors."""


class ParameterError(UdngcError, ValueError):
    """A parameter violates its documented domain (non-positive density,
    eta1 > eta2, a divergent integral order, ...)."""


class InsufficientPointsError(UdngcError):
    """A query needs more base stations than the deployment provides."""


class ConfigError(UdngcError):
    """A scenario file is malformed or names an unknown key."""


class NumericalError(UdngcError):
    """Quadrature or another numerical routine failed to converge."""
