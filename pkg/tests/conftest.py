import numpy as np
import pytest

from fidlab.algebra import TracialAlgebra


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def m2():
    return TracialAlgebra.matrix(2)


@pytest.fixture
def two_block():
    """M_2 (+) M_3 with weights 1 and 1/2."""
    return TracialAlgebra([(2, 1.0), (3, 0.5)])
