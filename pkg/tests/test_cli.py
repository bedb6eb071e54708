import json
import math
from pathlib import Path

import pytest
from _pytest.capture import CaptureFixture
from _pytest.monkeypatch import MonkeyPatch

from ruelle_workbench import cli
from ruelle_workbench.battery import CheckOutcome
from ruelle_workbench.settings import get_settings


def test_check(capsys: CaptureFixture) -> None:
    assert cli.run(["check", "--filter", "example31"]) == 0
    out, _ = capsys.readouterr()
    assert out == "quadrature=true lowpass=true\n"


def test_check_json_output(tmp_path: Path) -> None:
    path = tmp_path / "check.json"
    assert cli.run(["check", "--filter", "trivial", "--out", str(path)]) == 0
    assert json.loads(path.read_text()) == {"N": 2, "quadrature": True, "lowpass": False}


def test_eigenspace(capsys: CaptureFixture) -> None:
    assert cli.run(["eigenspace", "--filter", "example31"]) == 0
    out, _ = capsys.readouterr()
    assert out.startswith("dimension=2 pure=false spectral_radius=")


def test_moments_csv(tmp_path: Path, capsys: CaptureFixture) -> None:
    path = tmp_path / "moments.csv"
    args = ["moments", "--filter", "example31", "--h", "h_phi", "--n", "1", "--fmax", "1"]
    assert cli.run(args + ["--format", "csv", "--out", str(path)]) == 0
    out, _ = capsys.readouterr()
    assert out == "rows=6 normalization=eval_at_1\n"
    lines = path.read_text().splitlines()
    assert lines[0] == "k,n,f,re,im"
    assert lines[1].startswith("0,0,0,0.333333333333")


def test_cascade(capsys: CaptureFixture) -> None:
    assert cli.run(["cascade", "--filter", "haar", "--iters", "3"]) == 0
    out, _ = capsys.readouterr()
    assert out.startswith("iterations=3 level=3 capped=false diverged=false integral=1")


def test_cascade_from_filter_file(tmp_path: Path, capsys: CaptureFixture) -> None:
    path = tmp_path / "haar.json"
    root = 1 / math.sqrt(2.0)
    path.write_text(json.dumps({"N": 2, "m0": {"lo": 0, "coeffs": [root, root]}}))
    assert cli.run(["cascade", "--filter", str(path), "--iters", "4", "--init", "unitbox"]) == 0
    out, _ = capsys.readouterr()
    assert out.startswith("iterations=4 level=4 capped=false diverged=false integral=1")
    assert cli.run(["cascade", "--filter", str(path), "--init", "hat"]) == 2


def test_duality(capsys: CaptureFixture) -> None:
    assert cli.run(["duality", "--filter", "haar", "--p", "7"]) == 0
    out, _ = capsys.readouterr()
    assert out == "p=7 orbits=3 dimension=3 equal=true reciprocity=true\n"


def test_julia(capsys: CaptureFixture) -> None:
    assert cli.run(["julia", "--poly", "1,0,-2", "--seed", "1", "--samples", "100", "--depth", "10"]) == 0
    out, _ = capsys.readouterr()
    assert out == "a=-2 b=2 case=mapped_a degree=2 samples=100\n"


def test_ulam(capsys: CaptureFixture) -> None:
    assert cli.run(["ulam", "--map", "doubling", "--bins", "16"]) == 0
    out, _ = capsys.readouterr()
    assert out.startswith("map=doubling bins=16 ")
    values = dict(item.split("=") for item in out.split())
    assert abs(float(values["min_density"]) - 1.0) < 1e-9


def test_bohr(capsys: CaptureFixture) -> None:
    assert cli.run(["bohr", "--filter", "example31", "--h", "h_phi", "--n", "2", "--kmax", "1"]) == 0
    out, _ = capsys.readouterr()
    assert out.endswith("psd=true\n")


def test_cuntz(capsys: CaptureFixture) -> None:
    assert cli.run(["cuntz", "--filter", "haar"]) == 0
    out, _ = capsys.readouterr()
    values = dict(item.split("=") for item in out.split())
    assert float(values["relations"]) < 1e-12
    assert float(values["completeness"]) < 1e-12


@pytest.mark.parametrize(
    "argv",
    [
        ["transmogrify"],
        ["julia", "--poly", "1,0,-2"],
        ["julia", "--poly", "1,x,-2", "--seed", "3"],
        ["check", "--filter", "no-such-filter.json"],
        ["moments", "--filter", "example31"],
    ],
)
def test_invalid_input_exits_2(argv: list) -> None:
    assert cli.run(argv) == 2


def test_cuntz_needs_quadrature(tmp_path: Path) -> None:
    path = tmp_path / "filter.json"
    path.write_text(json.dumps({"N": 2, "m0": {"lo": 0, "coeffs": [math.sqrt(2.0)]}}))
    assert cli.run(["cuntz", "--filter", str(path)]) == 2


def test_internal_error_exits_1(monkeypatch: MonkeyPatch) -> None:
    def broken(config: cli.RunConfig) -> cli.Output:
        raise RuntimeError("unexpected")

    monkeypatch.setitem(cli.HANDLERS, "check", broken)
    assert cli.run(["check", "--filter", "haar"]) == 1


def test_tolerance_overrides() -> None:
    assert cli.run(["check", "--filter", "haar", "--eig-tol", "1e-6", "--grid", "512"]) == 0
    settings = get_settings()
    assert settings.eig_tol == 1e-6
    assert settings.grid_size == 512


@pytest.mark.parametrize("passed,code", [(True, 0), (False, 1)])
def test_reproduce_exit_code(
    monkeypatch: MonkeyPatch, capsys: CaptureFixture, tmp_path: Path, passed: bool, code: int
) -> None:
    monkeypatch.setattr(
        cli, "run_acceptance", lambda record=None: [CheckOutcome(name="one", passed=passed, detail="", seconds=0.0)]
    )
    path = tmp_path / "table.txt"
    assert cli.run(["reproduce-paper", "--out", str(path)]) == code
    out, _ = capsys.readouterr()
    assert out.endswith(f"{int(passed)}/1 passed\n")
    assert path.read_text() == out
