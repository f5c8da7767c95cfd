import numpy as np
import pytest

from mirror_sinkhorn import TransportPolytope


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_polytope(rng, m, n, concentration=2.0):
    return TransportPolytope(rng.dirichlet(np.full(m, concentration)),
                             rng.dirichlet(np.full(n, concentration)))


def random_probability_matrix(rng, m, n, concentration=2.0):
    return rng.dirichlet(np.full(m * n, concentration)).reshape(m, n)
