"""Error taxonomy shared across the package.

Each class maps to one CLI exit code so failures surface with a stable
category instead of a bare traceback.
"""


class ToolkitError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class DimensionError(ToolkitError, ValueError):
    """Operands have incompatible shapes."""

    exit_code = 2


class ParameterError(ToolkitError, ValueError):
    """A parameter violates its documented precondition."""

    exit_code = 2


class ConfigError(ToolkitError, ValueError):
    """A config file is malformed, has unknown keys, or violates invariants."""

    exit_code = 2


class DivergenceError(ToolkitError, RuntimeError):
    """A descent run produced non-finite or exploding iterates."""

    exit_code = 3


class CapacityError(ToolkitError, RuntimeError):
    """An exact computation was refused because it exceeds the enumeration cap."""

    exit_code = 4


class SingularityError(ToolkitError, RuntimeError):
    """A linear system required by an estimator is singular."""

    exit_code = 2
