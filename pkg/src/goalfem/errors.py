"""Exception types shared across the package."""


class GoalFemError(Exception):
    """Base class for all package errors."""


class MeshError(GoalFemError):
    """Invalid mesh construction or topology."""


class SpaceError(GoalFemError):
    """Invalid finite element space request."""


class AssemblyError(GoalFemError):
    """Form/space incompatibility during assembly."""


class DomainError(GoalFemError):
    """A functional was evaluated outside its domain of definition."""


class SolverError(GoalFemError):
    """Linear solve failed.  ``code`` is NOT_CONVERGED or INDEFINITE."""

    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


class ConfigError(GoalFemError):
    """Malformed scenario configuration."""
