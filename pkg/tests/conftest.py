from typing import Iterator

import pytest

from ruelle_workbench.filters import example31, h_phi, haar
from ruelle_workbench.laurent import FilterSpec, LaurentPoly
from ruelle_workbench.settings import get_settings


@pytest.fixture(autouse=True)
def fresh_settings() -> Iterator[None]:
    # the command line mutates the cached settings in place
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def haar_filter() -> FilterSpec:
    return haar()


@pytest.fixture
def example_filter() -> FilterSpec:
    return example31()


@pytest.fixture
def density() -> LaurentPoly:
    return h_phi()
