import itertools
import math

import numpy as np
import pytest

from freiman import (GroupSpec, IsolationWitness, SubsetSample, Verdict, extension_property_exact,
                     has_extension_property, is_additively_connected, is_isolated_subset, propagate_affine,
                     sumset_vvv)

from conftest import random_group, random_subset

Z5, Z6, Z7 = GroupSpec.cyclic(5), GroupSpec.cyclic(6), GroupSpec.cyclic(7)

# not (1 - 0.4)-additively connected ({2, 10} is isolated), yet every Freiman
# hom agreeing with an affine map on 3 of the 5 elements is that affine map
CONVERSE = SubsetSample.explicit(GroupSpec.cyclic(13), [0, 2, 6, 7, 10])
CONVERSE_ETA = 0.4


def vvv_by_loops(g, V):
    return sorted({g.sub(g.add(a, b), c) for a in V for b in V for c in V})


def least_isolated_by_search(U, max_size):
    for size in range(1, max_size + 1):
        for W in itertools.combinations(U.tolist(), size):
            if not set(W) & set(vvv_by_loops(U.group, [x for x in U.tolist() if x not in W])):
                return W
    return None


def test_sumset_examples():
    assert sumset_vvv(Z5, []).tolist() == []
    assert sumset_vvv(Z5, range(5)).tolist() == list(range(5))
    assert sumset_vvv(Z7, [0, 1]).tolist() == [0, 1, 2, 6]


def test_sumset_matches_loops(rng):
    for _ in range(30):
        g = random_group(rng, 40)
        V = rng.choice(g.order, size=int(rng.integers(1, 6)), replace=False).tolist()
        assert sumset_vvv(g, V).tolist() == vvv_by_loops(g, V)


def test_isolation_examples(Z6_B):
    assert is_isolated_subset(Z6_B, [1])
    U = SubsetSample.explicit(Z5, range(5))
    assert not any(is_isolated_subset(U, [w]) for w in range(5))
    assert is_isolated_subset(Z6_B, Z6_B.tolist())
    with pytest.raises(ValueError):
        is_isolated_subset(Z6_B, [])
    with pytest.raises(ValueError):
        is_isolated_subset(Z6_B, [2])


def test_witness_serialization(Z6_B):
    w = IsolationWitness.build(Z6_B, [1])
    assert w.to_json() == {"W": [1], "V": [0, 3]}
    with pytest.raises(ValueError):
        IsolationWitness.build(SubsetSample.explicit(Z5, range(5)), [0])


def test_connectivity_examples(Z6_B):
    res = is_additively_connected(SubsetSample.explicit(Z5, range(5)), 1 / 5)
    assert res.verdict is Verdict.CONNECTED and res.witness is None
    res = is_additively_connected(Z6_B, 1 / 3)
    assert res.verdict is Verdict.WITNESS
    # every singleton of {0, 1, 3} is isolated; the least one in index order is returned
    assert res.witness.W == (0,) and is_isolated_subset(Z6_B, res.witness.W)
    assert is_isolated_subset(Z6_B, [1])
    single = SubsetSample.explicit(Z5, [2])
    res = is_additively_connected(single, 1.0)
    assert res.verdict is Verdict.WITNESS and res.witness.W == (2,) and res.witness.V == ()


def test_inconclusive_verdict():
    U = SubsetSample.explicit(GroupSpec.cyclic(40), range(0, 40, 2))
    res = is_additively_connected(U, 0.5, w_max=2)
    assert res.verdict is Verdict.INCONCLUSIVE and res.limit == 10 and res.searched_up_to == 2
    assert res.to_json()["verdict"] == "inconclusive"
    with pytest.raises(ValueError):
        is_additively_connected(U, 0.0)


def test_search_matches_exhaustive(rng):
    for _ in range(80):
        U = random_subset(rng, random_group(rng, 30), 8, min_size=2)
        eta = float(rng.choice([0.2, 0.3, 0.5]))
        limit = math.floor(eta * len(U) + 1e-12)
        res = is_additively_connected(U, eta, w_max=8)
        want = least_isolated_by_search(U, limit)
        if want is None:
            assert res.verdict is Verdict.CONNECTED
        else:
            assert res.verdict is Verdict.WITNESS and res.witness.W == tuple(sorted(want))


def test_propagate_examples(Z6_B):
    U5 = SubsetSample.explicit(Z5, range(5))
    assert propagate_affine(Z6_B, Z6_B.tolist()).tolist() == [0, 1, 3]
    assert propagate_affine(Z6_B, [0, 3]).tolist() == [0, 3]
    for V0 in itertools.combinations(range(5), 4):
        assert propagate_affine(U5, V0).tolist() == list(range(5))
    assert propagate_affine(U5, []).tolist() == []


def closure_by_loops(U, V0):
    S = set(V0)
    while True:
        new = (set(vvv_by_loops(U.group, sorted(S))) & set(U.tolist())) - S
        if not new:
            return sorted(S)
        S |= new


def test_propagate_matches_naive_and_is_monotone(rng):
    for _ in range(40):
        U = random_subset(rng, random_group(rng, 50), 10, min_size=2)
        elems = U.tolist()
        V0 = [x for x in elems if rng.random() < 0.5]
        V1 = sorted(set(V0) | {x for x in elems if rng.random() < 0.3})
        P0 = propagate_affine(U, V0)
        assert P0.tolist() == closure_by_loops(U, V0)
        assert propagate_affine(U, P0).tolist() == P0.tolist()
        assert set(P0.tolist()) <= set(propagate_affine(U, V1).tolist())


def test_connected_implies_full_propagation(rng):
    checked = 0
    for _ in range(60):
        U = random_subset(rng, GroupSpec.cyclic(int(rng.integers(8, 30))), 14, min_size=6)
        eta = 0.25
        if is_additively_connected(U, eta, w_max=4).verdict is not Verdict.CONNECTED:
            continue
        k = len(U)
        need = math.ceil((1 - eta) * k - 1e-12)
        for size in range(need, k + 1):
            for V0 in itertools.combinations(U.tolist(), size):
                assert len(propagate_affine(U, V0)) == k
        checked += 1
    assert checked >= 5


def test_converse_fixture():
    res = is_additively_connected(CONVERSE, CONVERSE_ETA)
    assert res.verdict is Verdict.WITNESS
    assert is_isolated_subset(CONVERSE, [2, 10])
    assert extension_property_exact(CONVERSE, CONVERSE_ETA)
    assert has_extension_property(CONVERSE, CONVERSE_ETA, 5)


def test_extension_property_agrees_with_brute_force(rng):
    for _ in range(25):
        U = random_subset(rng, GroupSpec.cyclic(int(rng.integers(5, 16))), 5, min_size=3)
        exact = extension_property_exact(U, 0.3)
        if not exact:
            continue
        assert has_extension_property(U, 0.3, 4)


def test_connected_sets_have_extension_property(rng):
    for _ in range(30):
        U = random_subset(rng, GroupSpec.cyclic(int(rng.integers(5, 25))), 9, min_size=4)
        if is_additively_connected(U, 0.3).verdict is Verdict.CONNECTED:
            assert extension_property_exact(U, 0.3)
