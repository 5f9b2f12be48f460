"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class ValgapError(Exception):
    exit_code = 1


class InvalidInput(ValgapError, ValueError):
    exit_code = 2


class NotASubgroup(ValgapError, ValueError):
    exit_code = 2


class InvariantFailure(ValgapError, AssertionError):
    exit_code = 1


class ChainTerminated(ValgapError):
    """Raised when both parameters carry equal value and no monomial
    quadratic transform is left to take."""

    exit_code = 1


class NotACenter(ValgapError):
    exit_code = 2


class NotDivisible(ValgapError, ArithmeticError):
    exit_code = 1

    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class ResourceError(ValgapError):
    exit_code = 3
