import math

import numpy as np
import pytest

from thinfd import Epsilon, Mat2, UnitalLattice
from thinfd.linalg import KANCoords, from_kan
from thinfd.verify import random_group_element

HEX_A = (4.0 / 3.0) ** 0.25


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@pytest.fixture
def rng():
    return make_rng(12345)


@pytest.fixture
def eps12():
    return Epsilon(math.pi / 12)


@pytest.fixture
def eps6():
    return Epsilon(math.pi / 6, allow_max=True)


@pytest.fixture
def hex_basis() -> Mat2:
    """Basis whose six shortest vectors form a regular hexagon."""
    return from_kan(KANCoords(0.0, HEX_A, 0.5))


def random_lattice(rng) -> UnitalLattice:
    return UnitalLattice(random_group_element(rng))
