from pathlib import Path

import numpy as np
import pytest

from psfeec.api.config import Config
from psfeec.api.mesh import powell_sabin_refine, reference_triangle, unit_square

DATA = Path(__file__).resolve().parent / "data"


@pytest.fixture(autouse=True)
def config():
    config = Config()
    yield config
    Config()


@pytest.fixture
def split():
    return powell_sabin_refine(reference_triangle())[0]


@pytest.fixture
def square():
    return powell_sabin_refine(unit_square())


@pytest.fixture
def rng():
    return np.random.default_rng(0)
