"""Exception hierarchy shared across the package."""


class GepaggError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(GepaggError):
    """Input data or model parameters violate a documented invariant."""


class InvalidAggregationError(ValidationError):
    """An aggregation does not partition the horizon it is applied to."""


class BudgetViolationError(ValidationError):
    """Fixed capacities exceed the investment budget."""


class InfeasibleTargetError(ValidationError):
    """A clustering target cannot be met (fewer runs than requested groups)."""


class UndefinedGapError(GepaggError):
    """Optimality gap is undefined because the upper bound is zero."""


class SchemaError(ValidationError):
    """A file does not match its declared schema."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f" [{path}" + (f":{line}]" if line is not None else "]")
        super().__init__(message + where)


class SolverError(GepaggError):
    """Base class for LP solver failures."""


class IterationLimitError(SolverError):
    """The solver hit its iteration budget before reaching a verdict."""


class NumericalFailureError(SolverError):
    """The solver lost numerical control (singular basis, residual blow-up)."""


class DimensionError(ValidationError):
    """Problem is too large for an enumeration-based routine."""
