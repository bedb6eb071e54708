"""
Wall clock and CPU timing for numerical checks and for requests to the HTTP service.

A `Stopwatch` emits one line per split,

    TIMING: Wall:   12.3ms | CPU:   12.1ms | <name> (<note>)

through a `record` callable. `add_timing_middleware` runs every request of a FastAPI app inside a stopwatch named
after the matched route, and `record_timing` takes an extra split from inside an endpoint.
"""
import time
from typing import Any, Callable, NamedTuple, Optional

import psutil
from fastapi import FastAPI
from starlette.middleware.base import RequestResponseEndpoint
from starlette.requests import Request
from starlette.responses import Response
from starlette.routing import Match, Mount
from starlette.types import Scope

TIMER_ATTRIBUTE = "__ruelle_workbench_timer__"

Recorder = Callable[[str], None]


class Reading(NamedTuple):
    wall: float
    cpu: float


def format_timing(name: Optional[str], elapsed: Reading, note: Optional[str] = None) -> str:
    line = f"TIMING: Wall: {1000 * elapsed.wall:6.1f}ms | CPU: {1000 * elapsed.cpu:6.1f}ms | {name}"
    return line if note is None else f"{line} ({note})"


class Stopwatch:
    """
    Measures elapsed wall clock time and CPU time (user plus system) of the current process.

    name:
        Included in every emitted line
    record:
        Receives the emitted lines; `print` when omitted
    exclude:
        When given and contained in `name`, splits are still taken but nothing is emitted
    """

    def __init__(self, name: Optional[str] = None, record: Optional[Recorder] = None, exclude: Optional[str] = None):
        self.name = name
        self.record: Recorder = record or print
        self.silent = name is not None and exclude is not None and exclude in name
        self._process = psutil.Process()
        self._started = Reading(0.0, 0.0)
        self._split = Reading(0.0, 0.0)

    def _read(self) -> Reading:
        cpu = self._process.cpu_times()
        return Reading(time.perf_counter(), cpu.user + cpu.system)

    def start(self) -> None:
        self._started = self._split = self._read()

    def take_split(self) -> Reading:
        self._split = self._read()
        return self.elapsed

    @property
    def elapsed(self) -> Reading:
        return Reading(self._split.wall - self._started.wall, self._split.cpu - self._started.cpu)

    @property
    def time(self) -> float:
        return self.elapsed.wall

    @property
    def cpu_time(self) -> float:
        return self.elapsed.cpu

    def emit(self, note: Optional[str] = None) -> None:
        elapsed = self.take_split()
        if not self.silent:
            self.record(format_timing(self.name, elapsed, note))

    def __enter__(self) -> "Stopwatch":
        self.start()
        return self

    def __exit__(self, exc_type: Any, exc_value: Any, traceback: Any) -> None:
        self.emit()


def route_metric_name(app: FastAPI, scope: Scope, prefix: str = "") -> str:
    """
    `{prefix}.{endpoint module}.{route name}` for endpoints, `{app type}<{mount name}>` for mounts and
    `<Path: {path}>` when no route matches
    """
    route = next((r for r in app.router.routes if r.matches(scope)[0] == Match.FULL), None)
    if isinstance(route, Mount):
        return f"{type(route.app).__name__}<{route.name!r}>"
    endpoint = getattr(route, "endpoint", None)
    if endpoint is None or not hasattr(route, "name"):
        return f"<Path: {scope['path']}>"
    qualifier = f"{prefix}." if prefix else ""
    return f"{qualifier}{endpoint.__module__}.{route.name}"  # type: ignore


def add_timing_middleware(
    app: FastAPI, record: Optional[Recorder] = None, prefix: str = "", exclude: Optional[str] = None
) -> None:
    """
    Times every request of `app` and passes the TIMING line to `record` (e.g. `logger.info`).

    Requests whose metric name contains `exclude` are timed silently.
    """

    @app.middleware("http")
    async def timing_middleware(request: Request, call_next: RequestResponseEndpoint) -> Response:
        with Stopwatch(route_metric_name(app, request.scope, prefix), record=record, exclude=exclude) as stopwatch:
            setattr(request.state, TIMER_ATTRIBUTE, stopwatch)
            return await call_next(request)


def record_timing(request: Request, note: Optional[str] = None) -> None:
    """
    Emits the time spent so far on `request`, e.g. right after an expensive matrix build.

    Only requests served by an app with `add_timing_middleware` carry a stopwatch.
    """
    stopwatch = getattr(request.state, TIMER_ATTRIBUTE, None)
    if not isinstance(stopwatch, Stopwatch):
        raise ValueError("No timer present on request")
    stopwatch.emit(note)
