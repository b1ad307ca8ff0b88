"""Exception types raised across the package."""


class ParameterError(ValueError):
    """Invalid generator or learner parameter."""


class AssignmentError(RuntimeError):
    """Role assignment could not satisfy its constraints."""

    def __init__(self, constraint, attempts):
        self.constraint = constraint
        self.attempts = attempts
        super().__init__(
            f"role assignment failed after {attempts} attempts; "
            f"last violated constraint: {constraint}"
        )


class DomainError(ValueError):
    """A period label or role outside the configured vocabularies."""


class NoJointTask(KeyError):
    """The role pair has no game table."""


class ProtocolError(RuntimeError):
    """A role-pair link is missing a decision on one of its endpoints."""


class ConfigError(ValueError):
    """Scenario configuration failed validation.

    ``path`` is the dotted location of the offending field.
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
