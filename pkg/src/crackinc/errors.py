"""Exception types shared across the package."""


class CrackincError(Exception):
    """Base class for all package errors."""


class DomainError(CrackincError, ValueError):
    """A parameter lies outside the mathematically admissible domain."""


class EndpointError(CrackincError, ValueError):
    """Evaluation requested at or beyond a segment endpoint.

    Endpoint behavior is handled analytically through exponent metadata;
    pointwise evaluation there is refused rather than extrapolated.
    """


class CutContactError(CrackincError, ValueError):
    """A complex argument touches a branch cut."""


class ConvergenceError(CrackincError, RuntimeError):
    """An adaptive rule failed to converge within its doubling budget."""


class ProfileError(CrackincError, ValueError):
    """A load profile required by the configuration is missing or invalid."""
