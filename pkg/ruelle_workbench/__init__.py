from .exceptions import (
    ContractViolation,
    ConvergenceError,
    JuliaIntervalError,
    NotHarmonicError,
    NotMarkovError,
    SingularDensityError,
    WorkbenchError,
)
from .laurent import FilterSpec, LaurentPoly
from .settings import WorkbenchSettings, get_settings

__version__ = "0.1.0"

__all__ = [
    "ContractViolation",
    "ConvergenceError",
    "FilterSpec",
    "JuliaIntervalError",
    "LaurentPoly",
    "NotHarmonicError",
    "NotMarkovError",
    "SingularDensityError",
    "WorkbenchError",
    "WorkbenchSettings",
    "get_settings",
]
