import logging

import pytest
from _pytest.logging import LogCaptureFixture

from ruelle_workbench.battery import CheckResult, run_checks


def passing() -> CheckResult:
    return True, "fine"


def failing() -> CheckResult:
    return False, "residual 0.5"


def raising() -> CheckResult:
    raise RuntimeError("singular matrix")


def test_outcomes_keep_order() -> None:
    outcomes = run_checks([("a", passing), ("b", failing)])
    assert [(o.name, o.passed, o.detail) for o in outcomes] == [("a", True, "fine"), ("b", False, "residual 0.5")]
    assert all(o.seconds >= 0.0 for o in outcomes)


def test_raising_check_fails_and_run_continues(caplog: LogCaptureFixture) -> None:
    logger = logging.getLogger("battery-test")
    with caplog.at_level(logging.ERROR, logger="battery-test"):
        outcomes = run_checks([("boom", raising), ("after", passing)], logger=logger)
    assert outcomes[0].passed is False
    assert outcomes[0].detail == "RuntimeError: singular matrix"
    assert outcomes[1].passed
    assert "Traceback" in caplog.text


def test_raise_exceptions() -> None:
    with pytest.raises(RuntimeError):
        run_checks([("boom", raising), ("never", passing)], raise_exceptions=True)


def test_record_receives_timing_lines() -> None:
    messages = []
    run_checks([("a", passing), ("b", failing)], record=messages.append)
    assert len(messages) == 2
    assert messages[0].startswith("TIMING:")
    assert messages[1].endswith("| b")
