"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: :class:`InvalidInput` and its subclasses
are usage/validation errors (2), :class:`NumericalFailure` subclasses are
numerical failures (3), :class:`ParseError` subclasses are input-file errors (4).
"""


class RidgeCondError(Exception):
    """Base class for all errors raised by ridgecond."""


class InvalidInput(RidgeCondError, ValueError):
    """Input violates a documented precondition."""


class PenaltyOutOfDomain(InvalidInput):
    """Penalty value outside the estimator's admissible domain."""


class SingularTarget(InvalidInput):
    """A data-driven target could not be formed (zero variance or zero trace)."""


class TargetNotPD(InvalidInput):
    """Target matrix must be positive definite for the requested estimator."""


class NotPositiveSemiDefinite(InvalidInput):
    """Matrix has an eigenvalue below the p.s.d. tolerance."""


class DegenerateVariance(InvalidInput):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"variable {index} has non-positive variance")


class NumericalFailure(RidgeCondError, ArithmeticError):
    """A computation produced a result that fails its own post-conditions."""


class NearSingular(NumericalFailure):
    """Matrix too close to singular to invert reliably."""


class ConvergenceFailure(NumericalFailure):
    def __init__(self, message, best_x=None, best_f=None):
        self.best_x = best_x
        self.best_f = best_f
        super().__init__(message)


class ParseError(RidgeCondError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class MissingData(ParseError):
    def __init__(self, cells):
        self.cells = list(cells)
        self.count = len(self.cells)
        line, column = self.cells[0]
        super().__init__(
            f"{self.count} missing value(s); first at", line=line, column=column
        )
