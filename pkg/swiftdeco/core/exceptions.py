"""Custom exception classes"""

from typing import Any, Optional

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_TOLERANCE = 3
EXIT_RUNTIME = 4


class AppException(Exception):
    """Base exception for application errors"""

    def __init__(
        self,
        message: str,
        exit_code: int = EXIT_RUNTIME,
        error_type: str = "AppError",
        details: Optional[Any] = None,
    ):
        self.message = message
        self.exit_code = exit_code
        self.error_type = error_type
        self.details = details
        super().__init__(self.message)


class ParseError(AppException):
    """Scenario or table parse error, naming the offending key and line"""

    def __init__(
        self,
        message: str,
        key: Optional[str] = None,
        line: Optional[int] = None,
        details: Optional[Any] = None,
    ):
        self.key = key
        self.line = line
        location = []
        if key is not None:
            location.append(f"key '{key}'")
        if line is not None:
            location.append(f"line {line}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(
            message=message,
            exit_code=EXIT_PARSE,
            error_type="ParseError",
            details=details,
        )


class ParameterError(AppException):
    """Inconsistent or out-of-range parameters"""

    def __init__(self, message: str, details: Optional[Any] = None):
        super().__init__(
            message=message,
            exit_code=EXIT_PARSE,
            error_type="ParameterError",
            details=details,
        )


class DomainError(AppException):
    """Input outside the domain of a formula"""

    def __init__(self, message: str, details: Optional[Any] = None):
        super().__init__(
            message=message,
            exit_code=EXIT_PARSE,
            error_type="DomainError",
            details=details,
        )


class ModelInvalidError(AppException):
    """Cross-section model produced an invalid value"""

    def __init__(self, message: str, details: Optional[Any] = None):
        super().__init__(
            message=message,
            exit_code=EXIT_RUNTIME,
            error_type="ModelInvalidError",
            details=details,
        )


class RegimeError(AppException):
    """Model outside the regime an approximation requires"""

    def __init__(self, message: str, details: Optional[Any] = None):
        super().__init__(
            message=message,
            exit_code=EXIT_TOLERANCE,
            error_type="RegimeError",
            details=details,
        )


class ToleranceError(AppException):
    """Numerical procedure failed to reach its tolerance"""

    def __init__(
        self,
        message: str,
        residual: Optional[float] = None,
        details: Optional[Any] = None,
    ):
        self.residual = residual
        super().__init__(
            message=message,
            exit_code=EXIT_TOLERANCE,
            error_type="ToleranceError",
            details=details,
        )


class GridError(AppException):
    """Momentum grid does not contain the test field"""

    def __init__(self, message: str, details: Optional[Any] = None):
        super().__init__(
            message=message,
            exit_code=EXIT_TOLERANCE,
            error_type="GridError",
            details=details,
        )


class StepRejectedError(AppException):
    """Ensemble time step violates the accuracy bound"""

    def __init__(self, message: str, details: Optional[Any] = None):
        super().__init__(
            message=message,
            exit_code=EXIT_RUNTIME,
            error_type="StepRejectedError",
            details=details,
        )


class NumericalError(AppException):
    """Non-finite value produced while averaging"""

    def __init__(
        self,
        message: str,
        sample: Optional[Any] = None,
        details: Optional[Any] = None,
    ):
        self.sample = sample
        super().__init__(
            message=message,
            exit_code=EXIT_RUNTIME,
            error_type="NumericalError",
            details=details,
        )
