import logging
from dataclasses import dataclass
from traceback import format_exception
from typing import Callable, List, Optional, Sequence, Tuple

from .timing import Stopwatch

CheckResult = Tuple[bool, str]
CheckFunc = Callable[[], CheckResult]


@dataclass(frozen=True)
class CheckOutcome:
    name: str
    passed: bool
    detail: str
    seconds: float


def run_checks(
    checks: Sequence[Tuple[str, CheckFunc]],
    *,
    logger: Optional[logging.Logger] = None,
    raise_exceptions: bool = False,
    record: Optional[Callable[[str], None]] = None,
) -> List[CheckOutcome]:
    """
    Runs named checks in order and collects one outcome per check.

    Parameters
    ----------
    checks: Sequence[Tuple[str, CheckFunc]]
        Pairs of (name, callable); each callable takes no arguments and returns (passed, detail)
    logger: Optional[logging.Logger] (default None)
        The logger to use to log any exceptions raised by a check.
        If not provided, exceptions are only reflected in the failing outcome's detail.
    raise_exceptions: bool (default False)
        If True, the first exception raised by a check propagates and the remaining checks do not run.
        Otherwise, a raising check counts as failed and the run continues.
    record: Optional[Callable[[str], None]] (default None)
        Receives the TIMING line of every check; timing lines are dropped when not provided
    """
    outcomes = []
    for name, check in checks:
        stopwatch = Stopwatch(name, record=record or (lambda message: None))
        with stopwatch:
            try:
                passed, detail = check()
            except Exception as exc:
                if logger is not None:
                    formatted_exception = "".join(format_exception(type(exc), exc, exc.__traceback__))
                    logger.error(formatted_exception)
                if raise_exceptions:
                    raise exc
                passed, detail = False, f"{type(exc).__name__}: {exc}"
        outcomes.append(CheckOutcome(name=name, passed=bool(passed), detail=detail, seconds=stopwatch.time))
    return outcomes
