class ParameterError(ValueError):
    """A physical or numerical parameter is outside its domain."""


class ConstructionError(ValueError):
    """An initial state cannot be built inside the truncation window."""


class DegenerateWindowError(ValueError):
    """A fit window holds too few usable samples."""


class ConfigError(ValueError):
    """A run configuration is malformed or has unknown keys."""


class ConservationError(RuntimeError):
    """Norm, angular momentum or energy drifted past the guard threshold."""


class SingularityError(RuntimeError):
    """The imbalance reached |z| = 1, where the phase equation diverges."""


class IntegrationError(RuntimeError):
    """The integrator exhausted its step budget."""
