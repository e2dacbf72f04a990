import random

import pytest

from roabp_pit import PrimeField

BIG = 2147483647


@pytest.fixture
def F7():
    return PrimeField(7)


@pytest.fixture
def F101():
    return PrimeField(101)


@pytest.fixture
def Fbig():
    return PrimeField(BIG)


@pytest.fixture
def rng():
    return random.Random(20240611)
