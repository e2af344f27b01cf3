import numpy as np
import pytest

from embezzle import TargetState


def seeded_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def random_target(rng: np.random.Generator, rank: int) -> TargetState:
    w = np.sort(rng.uniform(0.1, 1.0, rank))[::-1]
    return TargetState.normalized(tuple(w))


@pytest.fixture
def rng():
    return seeded_rng(20240811)
