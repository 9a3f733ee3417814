import numpy as np
import pytest

from nfsim import (
    FieldRecord,
    GridConfig,
    PulseConfig,
    gaussian_input,
)


@pytest.fixture
def short_grid():
    # enough record for a few beats, cheap to run
    return GridConfig(dt=0.005, t_end=100.0, n_slabs=32)


@pytest.fixture
def pulse():
    return PulseConfig()


@pytest.fixture
def short_pulse_record(pulse, short_grid):
    return gaussian_input(pulse, short_grid)


def rel_l2(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    return np.linalg.norm(a - b) / np.linalg.norm(b)
