import numpy as np
import pytest

from ruelle_workbench.rng import make_rng


def test_same_seed_and_stream_repeat() -> None:
    assert np.array_equal(make_rng(7, 2).random(5), make_rng(7, 2).random(5))


def test_streams_differ() -> None:
    assert not np.array_equal(make_rng(7, 0).random(5), make_rng(7, 1).random(5))


@pytest.mark.parametrize("seed", [-1, 2 ** 64])
def test_seed_range(seed: int) -> None:
    with pytest.raises(ValueError):
        make_rng(seed)
