import math

import numpy as np
import pytest

from axisorbits.configuration import MassSystem, circular_config

TWO_PI = 2.0 * math.pi


def log_uniform_masses(rng: np.random.Generator, n: int, lo: float = 1e-3, hi: float = 1e3):
    return tuple(float(m) for m in np.exp(rng.uniform(math.log(lo), math.log(hi), n)))


def random_systems(seed: int, n: int, count: int, lo: float = 1e-3, hi: float = 1e3,
                   period: float = TWO_PI) -> list[MassSystem]:
    rng = np.random.default_rng(seed)
    return [MassSystem(log_uniform_masses(rng, n, lo, hi), period) for _ in range(count)]


@pytest.fixture
def equal_two():
    system = MassSystem((0.5, 0.5))
    return system, circular_config(system)


@pytest.fixture
def equal_three():
    system = MassSystem((1.0 / 3.0,) * 3)
    return system, circular_config(system)
