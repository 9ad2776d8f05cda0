"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the supported mathematical domain."""


class SingularityError(ValueError):
    """Field evaluation requested at a singular point (on top of a source)."""


class SolverError(RuntimeError):
    """Sparse solver failed: divergence or an unsolvable linear system."""


class ConfigError(ValueError):
    """Run configuration failed validation."""
