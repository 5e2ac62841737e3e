"""Exception types shared across the package."""


class CouralgError(Exception):
    """Base class for all package errors."""


class SignatureMismatchError(CouralgError):
    """Two values from different coordinate models were combined."""


class DegreeError(CouralgError):
    """A value does not have the degree an operation requires."""


class MasterEquationError(CouralgError):
    """The degree-3 element does not satisfy the master equation."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotSkewError(CouralgError):
    """The endomorphism is not skew-symmetric for the pairing."""


class NotCpsError(CouralgError):
    """The endomorphism square is not a rational multiple of the identity."""


class BialgebroidError(CouralgError):
    """One of the compatibility brackets of a double is nonzero."""

    def __init__(self, message, failures=None):
        super().__init__(message)
        # list of (name, nonzero bracket) pairs
        self.failures = failures or []


class TorsionNonzeroError(CouralgError):
    """A vanishing-torsion precondition failed."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ParseError(CouralgError):
    """Syntax error in an expression or model file, with location."""

    def __init__(self, message, line=None, col=None, expected=None):
        loc = ""
        if line is not None:
            loc = f"{line}:{col}: " if col is not None else f"{line}: "
        detail = f" (expected {expected})" if expected else ""
        super().__init__(f"{loc}{message}{detail}")
        self.line = line
        self.col = col
        self.expected = expected


class ModelError(CouralgError):
    """A model file is syntactically valid but semantically inconsistent."""
