"""Exception types shared across the package."""


class DualQRError(Exception):
    """Base class for all errors raised by dualqr."""

    exit_code = 1


class SingularStandardPart(DualQRError):
    """The standard part of a square dual matrix is numerically singular."""

    exit_code = 2


class RankDeficient(DualQRError):
    """The standard part does not have the rank an algorithm requires."""

    exit_code = 2

    def __init__(self, message, rank=None, required=None):
        super().__init__(message)
        self.rank = rank
        self.required = required


class DegenerateDiagonal(DualQRError):
    """A diagonal entry of R_s inside the declared rank is below tolerance."""

    exit_code = 2

    def __init__(self, message, index=None, value=None):
        super().__init__(message)
        self.index = index
        self.value = value


class ExistenceConditionViolated(DualQRError):
    """The infinitesimal part is incompatible with the requested factorization."""

    exit_code = 3

    def __init__(self, message, residual=None, tolerance=None):
        super().__init__(message)
        self.residual = residual
        self.tolerance = tolerance


class ParseError(DualQRError):
    """Malformed ``.dmx`` input."""

    exit_code = 4

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f"line {line}"
            if column is not None:
                loc += f", column {column}"
            loc += ": "
        super().__init__(loc + message)
        self.line = line
        self.column = column
