"""Shared fixtures."""

from collections.abc import Callable, Iterator

import numpy as np
import pytest

from qfi_optics.config import get_settings
from qfi_optics.core import ProbeState


@pytest.fixture(autouse=True)
def fresh_settings() -> Iterator[None]:
    """Settings are re-read from the environment in every test."""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def random_state(rng: np.random.Generator) -> Callable[[int], ProbeState]:
    """Interior probe state with N photons and weights bounded away from zero."""

    def make(n_photons: int) -> ProbeState:
        weights = rng.uniform(0.1, 1.0, n_photons + 1)
        return ProbeState.from_weights(weights / weights.sum())

    return make
