"""Exception hierarchy shared by every module."""


class MealyError(Exception):
    """Base class for all errors raised by this package."""


class MealySyntaxError(MealyError):
    def __init__(self, message, line, column):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class IncompleteMachine(MealyError):
    pass


class NondeterministicMachine(MealyError):
    pass


class UnknownLabel(MealyError):
    pass


class InvalidIndex(MealyError):
    pass


class AlphabetMismatch(MealyError):
    pass


class NotInvertible(MealyError):
    pass


class NotReversible(MealyError):
    pass


class PreconditionViolated(MealyError):
    pass


class HypothesisUnmet(MealyError):
    def __init__(self, hypothesis, witness=None):
        msg = f"hypothesis-unmet: {hypothesis}"
        if witness is not None:
            msg += f" (witness: {witness})"
        super().__init__(msg)
        self.hypothesis = hypothesis
        self.witness = witness


class SizeLimitExceeded(MealyError):
    def __init__(self, required, allowed):
        super().__init__(f"size-limit-exceeded: required {required}, allowed {allowed}")
        self.required = required
        self.allowed = allowed


class BudgetExceeded(MealyError):
    pass


class CapExceeded(MealyError):
    pass
