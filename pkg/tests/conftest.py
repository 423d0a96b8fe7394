import numpy as np
import pytest

from rdslab.network import PartiallyDirectedNetwork


@pytest.fixture
def toy3():
    """z = [1, 1, 0]; 0 -> 1, 2 -> 0 and 1 <-> 2."""
    return PartiallyDirectedNetwork(3, [1, 1, 0], [(0, 1), (2, 0)], [(1, 2)])


def random_network(rng, n, p_dir=0.3, p_und=0.15, p_inf=0.4):
    """Small random canonical network with at least one node of each status."""
    z = (rng.random(n) < p_inf).astype(int)
    z[0], z[-1] = 1, 0
    d, u = [], []
    for i in range(n):
        for j in range(i + 1, n):
            r = rng.random()
            if r < p_und:
                u.append((i, j))
            elif r < p_und + p_dir:
                d.append((i, j) if rng.random() < 0.5 else (j, i))
    return PartiallyDirectedNetwork(n, z, d, u)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
