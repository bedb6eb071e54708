import pytest
from _pytest.monkeypatch import MonkeyPatch
from pydantic import ValidationError
from starlette.status import HTTP_200_OK, HTTP_404_NOT_FOUND
from starlette.testclient import TestClient

from ruelle_workbench.service import get_app
from ruelle_workbench.settings import WorkbenchSettings, get_settings


@pytest.mark.parametrize("disable_docs,status_code", [("1", HTTP_404_NOT_FOUND), ("0", HTTP_200_OK)])
def test_enable_docs(monkeypatch: MonkeyPatch, disable_docs: str, status_code: int) -> None:
    monkeypatch.setenv("RUELLE_DISABLE_DOCS", disable_docs)
    get_settings.cache_clear()
    response = TestClient(get_app()).get("/docs")
    assert response.status_code == status_code


def test_numeric_settings_from_environment(monkeypatch: MonkeyPatch) -> None:
    monkeypatch.setenv("RUELLE_EIG_TOL", "1e-6")
    monkeypatch.setenv("RUELLE_GRID_SIZE", "512")
    settings = WorkbenchSettings()
    assert settings.eig_tol == 1e-6
    assert settings.grid_size == 512
    assert settings.threads == 1


def test_invalid_settings(monkeypatch: MonkeyPatch) -> None:
    monkeypatch.setenv("RUELLE_THREADS", "0")
    with pytest.raises(ValidationError):
        WorkbenchSettings()


def test_assignments_are_validated() -> None:
    settings = get_settings()
    with pytest.raises(ValidationError):
        settings.eig_tol = -1.0
    assert get_settings() is settings
