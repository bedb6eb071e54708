from pathlib import Path

import pytest
from _pytest.capture import CaptureFixture
from fastapi import FastAPI
from starlette.requests import Request
from starlette.staticfiles import StaticFiles
from starlette.testclient import TestClient

from ruelle_workbench.timing import Reading, Stopwatch, add_timing_middleware, format_timing, record_timing

app = FastAPI()
add_timing_middleware(app, exclude="health")
app.mount(path="/static", app=StaticFiles(directory="."), name="static")


@app.get("/fixed-space")
def get_fixed_space() -> None:
    pass


@app.get("/health")
def get_health() -> None:
    pass


@app.get("/matrix")
def get_matrix(request: Request) -> None:
    record_timing(request, note="transfer matrix")


client = TestClient(app)


def timing_lines(capsys: CaptureFixture) -> list:
    out, err = capsys.readouterr()
    assert err == ""
    return out.splitlines()


def test_route_timing(capsys: CaptureFixture) -> None:
    client.get("/fixed-space")
    [line] = timing_lines(capsys)
    assert line.startswith("TIMING: Wall:")
    assert "| CPU:" in line
    assert line.endswith("tests.test_timing.get_fixed_space")


def test_excluded_route_is_silent(capsys: CaptureFixture) -> None:
    client.get("/health")
    assert timing_lines(capsys) == []


def test_mount_and_missing_route(capsys: CaptureFixture) -> None:
    client.get(f"/static/{Path(__file__).name}")
    client.get("/no-such-route")
    mount, missing = timing_lines(capsys)
    assert mount.endswith("StaticFiles<'static'>")
    assert missing.endswith("<Path: /no-such-route>")


def test_intermediate_split(capsys: CaptureFixture) -> None:
    client.get("/matrix")
    split, final = timing_lines(capsys)
    assert split.endswith("tests.test_timing.get_matrix (transfer matrix)")
    assert final.endswith("tests.test_timing.get_matrix")


def test_prefix() -> None:
    lines: list = []
    prefixed = FastAPI()
    add_timing_middleware(prefixed, record=lines.append, prefix="ruelle")

    @prefixed.get("/")
    def get_root() -> None:
        pass

    TestClient(prefixed).get("/")
    assert lines[0].endswith("| ruelle.tests.test_timing.get_root")


def test_recording_fails_without_middleware() -> None:
    bare = FastAPI()

    @bare.get("/")
    def get_root(request: Request) -> None:
        record_timing(request)

    with pytest.raises(ValueError) as exc_info:
        TestClient(bare).get("/")
    assert str(exc_info.value) == "No timer present on request"


def test_format_timing() -> None:
    assert format_timing("ulam", Reading(0.0125, 0.003)) == "TIMING: Wall:   12.5ms | CPU:    3.0ms | ulam"
    assert format_timing("ulam", Reading(0.0, 0.0), note="rows").endswith("| ulam (rows)")


def test_stopwatch_splits() -> None:
    lines: list = []
    with Stopwatch("ulam", record=lines.append) as stopwatch:
        sum(range(1000))
        stopwatch.emit("half way")
    assert len(lines) == 2
    assert lines[0].endswith("| ulam (half way)")
    assert stopwatch.time >= 0.0


def test_silent_stopwatch_still_splits() -> None:
    lines: list = []
    with Stopwatch("health check", record=lines.append, exclude="health") as stopwatch:
        sum(range(1000))
    assert lines == []
    assert stopwatch.time > 0.0
