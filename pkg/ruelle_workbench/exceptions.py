class WorkbenchError(ValueError):
    """
    Base class for every error raised deliberately by the workbench.

    It derives from `ValueError`, so callers catching invalid-input errors keep working.
    """


class ContractViolation(WorkbenchError):
    """
    An input misses a documented precondition, or a verified identity fails its tolerance
    """


class NotHarmonicError(ContractViolation):
    pass


class SingularDensityError(ContractViolation):
    pass


class ConvergenceError(WorkbenchError):
    pass


class NotMarkovError(ContractViolation):
    pass


class JuliaIntervalError(ContractViolation):
    pass
