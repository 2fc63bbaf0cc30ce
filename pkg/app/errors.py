from typing import Any, Dict, List, Optional, Tuple


EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_ACCEPTANCE = 4


class LucasError(Exception):
    """Base class; `kind` and `exit_status` drive the CLI diagnostic line."""

    kind = "error"
    exit_status = EXIT_VALIDATION

    def details(self) -> Dict[str, Any]:
        return {}

    def to_event(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"event": "error", "kind": self.kind, "message": str(self)}
        payload.update(self.details())
        return payload


class ConfigurationError(LucasError):
    kind = "configuration"

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None, column: Optional[int] = None):
        super().__init__(message)
        self.key = key
        self.line = line
        self.column = column

    def details(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {}
        if self.key is not None:
            out["key"] = self.key
        if self.line is not None:
            out["line"] = self.line
            out["column"] = self.column
        return out


class DomainError(LucasError):
    kind = "domain"


class PreconditionError(LucasError):
    kind = "precondition"


class ArithmeticOverflowError(LucasError):
    kind = "overflow"

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index

    def details(self) -> Dict[str, Any]:
        return {"index": self.index}


class NumericalFailure(LucasError):
    kind = "numerical"
    exit_status = EXIT_NUMERICAL

    def __init__(self, message: str, shape: Optional[Tuple[int, ...]] = None, residual: Optional[float] = None):
        super().__init__(message)
        self.shape = shape
        self.residual = residual

    def details(self) -> Dict[str, Any]:
        return {"shape": list(self.shape) if self.shape else None, "residual": self.residual}


class TrackingAmbiguityError(NumericalFailure):
    kind = "tracking"

    def __init__(self, message: str, interval: Tuple[float, float], overlap: float):
        super().__init__(message)
        self.interval = interval
        self.overlap = overlap

    def details(self) -> Dict[str, Any]:
        return {"interval": list(self.interval), "overlap": self.overlap}


class BracketError(NumericalFailure):
    kind = "bracket"


class EPInterferenceError(NumericalFailure):
    kind = "ep_interference"

    def __init__(self, message: str, parameter: float, re_energy: float):
        super().__init__(message)
        self.parameter = parameter
        self.re_energy = re_energy

    def details(self) -> Dict[str, Any]:
        return {"parameter": self.parameter, "re_E": self.re_energy}


class SymmetryViolation(NumericalFailure):
    kind = "symmetry"

    def __init__(self, message: str, offenders: List[Dict[str, float]]):
        super().__init__(message)
        self.offenders = offenders

    def details(self) -> Dict[str, Any]:
        return {"offenders": self.offenders}


class AcceptanceFailure(LucasError):
    kind = "acceptance"
    exit_status = EXIT_ACCEPTANCE

    def __init__(self, message: str, failed: List[str]):
        super().__init__(message)
        self.failed = failed

    def details(self) -> Dict[str, Any]:
        return {"failed": self.failed}
