import numpy as np
import pytest

from shadenorm.core import RingSpec, gen_ring, synth_sphere
from shadenorm.render import render_shading

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def sphere256():
    return synth_sphere(256)


@pytest.fixture(scope="session")
def sphere64():
    return synth_sphere(64)


@pytest.fixture(scope="session")
def ring9():
    return gen_ring(RingSpec(9, 45.0, 0.0))


@pytest.fixture(scope="session")
def seq256(sphere256, ring9):
    return render_shading(sphere256, ring9)


def random_rotation(rng):
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
