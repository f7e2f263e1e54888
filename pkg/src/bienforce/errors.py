"""Exception hierarchy shared by every module of the workbench."""


class EnforceError(Exception):
    """Base class for all workbench errors."""


class ParseError(EnforceError):
    """A syntax error in one of the surface grammars, with a source position."""

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{where}")


class UnguardedRecursion(ParseError):
    pass


class FreeVariable(ParseError):
    pass


class UnguardedFixpointVariable(ParseError):
    pass


class PayloadConstrainedInput(ParseError):
    pass


class BothDot(ParseError):
    pass


class DirectionMismatch(ParseError):
    pass


class OpenTerm(ParseError):
    pass


class EvalError(EnforceError):
    pass


class UnboundVariable(EvalError):
    pass


class TypeMismatch(EvalError):
    pass


class OpenSymbolicAction(EnforceError):
    pass


class BoundExceeded(EnforceError):
    """An exploration bound was hit before the search quiesced."""


class StateBoundExceeded(BoundExceeded):
    pass


class ClosureBoundExceeded(BoundExceeded):
    pass


class NotNormalForm(EnforceError):
    def __init__(self, message, witness=None):
        self.witness = witness
        super().__init__(message)


class UnknownName(EnforceError, KeyError):
    __str__ = Exception.__str__
