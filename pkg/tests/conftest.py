import numpy as np
import pytest

from isac_jscc import (Alphabet, ChannelSpec, Distribution, SourceSpec,
                       build_binary_isac_channel, build_binary_source)


def random_channel(rng, max_size=4, zero_cost=True):
    """A random valid SDMC with dirichlet rows and zero-diagonal distortion."""
    S, X, Y, Z = (int(v) for v in rng.integers(2, max_size + 1, size=4))
    law = rng.dirichlet(np.ones(Y * Z), size=(S, X)).reshape(S, X, Y, Z)
    prior = rng.dirichlet(np.ones(S))
    dmat = rng.uniform(0.0, 1.0, (S, S))
    np.fill_diagonal(dmat, 0.0)
    cost = np.zeros(X) if zero_cost else rng.uniform(0.0, 1.0, X)
    return ChannelSpec(Alphabet(S), Alphabet(X), Alphabet(Y), Alphabet(Z),
                       Distribution(prior), law, cost, dmat)


def random_source(rng, max_size=5):
    U, V = (int(v) for v in rng.integers(2, max_size + 1, size=2))
    prior = rng.dirichlet(np.ones(U))
    d = rng.uniform(0.0, 1.0, (U, V))
    return SourceSpec(Alphabet(U), Alphabet(V), Distribution(prior), d)


@pytest.fixture
def binary_channel():
    return build_binary_isac_channel(0.4)


@pytest.fixture
def binary_source():
    return build_binary_source(0.4)
