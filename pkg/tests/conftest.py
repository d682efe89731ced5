import numpy as np
import pytest

from mlmsim import block_stream, make_lattice, scale_to_second_moment


@pytest.fixture(scope="session")
def e8_unit():
    """E8 scaled to unit per-element power."""
    return scale_to_second_moment(make_lattice("e8"), 1.0)


@pytest.fixture(scope="session")
def cubic1_unit():
    """Scalar lattice scaled to unit per-element power (spacing sqrt(12))."""
    return scale_to_second_moment(make_lattice("cubic", 1), 1.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


def stream(experiment: int, block: int = 0, seed: int = 97):
    return block_stream(seed, experiment, block)
