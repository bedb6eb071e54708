from functools import lru_cache
from typing import Any, Dict

from pydantic import BaseSettings, Field

DOCS_ROUTES = ("docs_url", "openapi_url", "redoc_url")


class WorkbenchSettings(BaseSettings):
    """
    Tolerances, grid sizes and service options, each overridable through a `RUELLE_`-prefixed environment variable
    (`grid_size` is read from `RUELLE_GRID_SIZE`, `threads` from `RUELLE_THREADS`, and so on).

    Assignments are validated too: the command line writes its `--eig-tol` / `--rank-rtol` / `--grid` overrides
    into the cached instance.
    """

    threads: int = Field(1, ge=1, description="worker threads for Ulam matrix assembly")
    grid_size: int = Field(256, ge=8)
    eig_tol: float = Field(1e-8, gt=0)
    rank_rtol: float = Field(1e-9, gt=0)
    power_steps: int = Field(200, ge=1)
    log_level: str = "WARNING"

    # HTTP service
    debug: bool = False
    title: str = "Ruelle Workbench"
    version: str = "0.1.0"
    docs_url: str = "/docs"
    redoc_url: str = "/redoc"
    openapi_url: str = "/openapi.json"
    disable_docs: bool = False

    @property
    def fastapi_kwargs(self) -> Dict[str, Any]:
        """
        Keyword arguments for `FastAPI(...)`; the docs and schema routes are switched off by `disable_docs`
        """
        kwargs: Dict[str, Any] = {"debug": self.debug, "title": self.title, "version": self.version}
        for route in DOCS_ROUTES:
            kwargs[route] = None if self.disable_docs else getattr(self, route)
        return kwargs

    class Config:
        env_prefix = "ruelle_"
        validate_assignment = True


@lru_cache()
def get_settings() -> WorkbenchSettings:
    """
    The process-wide settings, read from the environment once; tests call `get_settings.cache_clear()`
    """
    return WorkbenchSettings()
