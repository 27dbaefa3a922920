"""
Exception hierarchy shared by every numerical app.
"""


class LoopCurveError(Exception):
    """Base class for all library errors."""


class DomainError(LoopCurveError, ValueError):
    """Parameter outside the domain where a quantity is defined."""


class PoleError(LoopCurveError, ZeroDivisionError):
    """Evaluation at (or numerically on top of) a pole."""


class ConfigurationError(LoopCurveError):
    """Contour, truncation or run configuration that cannot be honoured."""


class ConvergenceError(LoopCurveError):
    """
    Iterative method failed to converge.

    Args:
        message: Human readable reason
        last_iterate: Last iterate reached before giving up
        residual: Residual norm at the last iterate
    """

    def __init__(self, message, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual

    def diagnostics(self):
        return {
            'message': str(self),
            'last_iterate': _jsonable(self.last_iterate),
            'residual': _jsonable(self.residual),
        }


class IllConditionedError(LoopCurveError):
    """Local data too close to degenerate (e.g. near-critical branch point)."""


class DegenerateBasisError(LoopCurveError):
    """The (f, f-hat) basis does not exist for this loop fugacity."""


class ResourceGuardError(LoopCurveError):
    """A requested enumeration would exceed the configured size limit."""


class MissingCorrelatorError(LoopCurveError, KeyError):
    """A recursion step needs a correlator that has not been computed."""


def _jsonable(value):
    if value is None:
        return None
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    try:
        return float(value)
    except (TypeError, ValueError):
        try:
            c = complex(value)
            return [c.real, c.imag]
        except (TypeError, ValueError):
            return str(value)
