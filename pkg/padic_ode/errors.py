"""
Exception hierarchy for p-adic differential operator computations
Every error carries a machine-readable code used in CLI reports and pipeline verdicts
"""

from typing import Any, Dict, Optional


class PadicError(Exception):
    """Base class for all library errors"""

    code = "padic-error"
    exit_code = 1

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def as_dict(self) -> Dict[str, Any]:
        """Structured form used in reports"""
        out: Dict[str, Any] = {"error": self.code, "detail": self.message}
        if self.details:
            out["context"] = {k: str(v) for k, v in self.details.items()}
        return out


class PreconditionError(PadicError):
    """An operation was called outside its documented domain"""

    code = "precondition-violation"
    exit_code = 2


class RadiiNotSeparatedError(PreconditionError):
    """f_i(M,0) > f_{i+1}(M,0) does not hold"""

    code = "radii-not-separated"


class WindowInsufficientError(PadicError):
    """The exponent window is too small for a reliable answer"""

    code = "window-insufficient"
    exit_code = 3


class PrecisionExhaustedError(PadicError):
    """Scalar precision ran out during an iteration"""

    code = "precision-exhausted"
    exit_code = 3


class CyclicVectorError(PadicError):
    """No cyclic vector was found within the configured attempts"""

    code = "search-exhausted"
    exit_code = 3


class InputFormatError(PadicError):
    """Malformed input document"""

    code = "malformed-input"
    exit_code = 1

    def __init__(self, message: str, location: Optional[str] = None, **details: Any):
        super().__init__(message, **details)
        self.location = location

    def as_dict(self) -> Dict[str, Any]:
        out = super().as_dict()
        if self.location:
            out["location"] = self.location
        return out


class InternalError(PadicError):
    """An unexpected exception escaped a command"""

    code = "internal-error"
    exit_code = 4
