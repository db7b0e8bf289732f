import itertools

import numpy as np
import pytest

from freiman import GroupSpec, SubsetSample


def random_group(rng, max_order, max_factors=3):
    """A random factor list with product at most ``max_order``."""
    while True:
        k = int(rng.integers(1, max_factors + 1))
        factors = [int(rng.integers(2, max_order + 1)) for _ in range(k)]
        if np.prod(factors) <= max_order:
            return GroupSpec(tuple(factors))


def random_subset(rng, group, max_size, min_size=1):
    k = int(rng.integers(min_size, min(max_size, group.order) + 1))
    return SubsetSample.explicit(group, rng.choice(group.order, size=k, replace=False))


def quads_by_definition(A):
    """Ordered non-degenerate quadruples straight from the definition."""
    g = A.group
    out = set()
    for x, y, z, w in itertools.product(A.tolist(), repeat=4):
        if g.add(x, y) == g.add(z, w) and x not in (z, w) and y not in (z, w):
            out.add((x, y, z, w))
    return out


def is_hom_by_definition(A, phi, target):
    g = A.group
    for a, b, c, d in itertools.product(A.tolist(), repeat=4):
        if g.add(a, b) == g.add(c, d) and target.add(phi[a], phi[b]) != target.add(phi[c], phi[d]):
            return False
    return True


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def Z6_B():
    """{0, 1, 3} inside Z_6: one relation 0+0 = 3+3 and the isolated element 1."""
    return SubsetSample.explicit(GroupSpec.cyclic(6), [0, 1, 3])


@pytest.fixture
def Z5_A():
    return SubsetSample.explicit(GroupSpec.cyclic(5), [0, 1, 2])
