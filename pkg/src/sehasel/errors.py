"""Exception types shared across the package."""


class ValidationError(ValueError):
    """A parameter record violates its invariants."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class RangeError(ValueError):
    """A requested target cannot be reached by the model."""

    def __init__(self, message, attained=None):
        self.attained = attained
        super().__init__(message)


class ConfigError(ValueError):
    """A simulation or scenario configuration is invalid.

    ``problems`` lists every violated field, not only the first one.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class DataError(ValueError):
    """Measured data cannot be used as given (non-positive, gaps, ...)."""


class RankError(DataError):
    """A least-squares problem is rank deficient."""


class NumericalError(RuntimeError):
    """A numerical procedure failed; ``state`` carries diagnostic context."""

    def __init__(self, message, state=None):
        self.state = state
        super().__init__(message)
