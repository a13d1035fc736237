"""Exception types. The CLI maps these onto exit codes 1 and 2."""


class InputError(ValueError):
    """Malformed user input: bad dimensions, bad config, unparseable files."""


class NumericalError(ArithmeticError):
    """A linear-algebra step failed even after jitter escalation."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition
