"""Additive isolation, additive connectivity and affine propagation.

For ``W`` a nonempty subset of ``U`` and ``V = U \\ W``, ``W`` is additively
isolated in ``U`` when no ``v1 + v2 - v3`` with ``v_i`` in ``V`` lands in
``W``.  ``U`` is ``(1 - eta)``-additively connected when no ``W`` with
``|W| <= eta |U|`` is isolated.  The empty ``W`` never counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .groups import GroupSpec
from .quadruples import SubsetSample


def sumset_vvv(group: GroupSpec, V) -> np.ndarray:
    """Sorted array of ``{v1 + v2 - v3 : v_i in V}``."""
    V = np.unique(np.asarray(list(V) if not isinstance(V, np.ndarray) else V, dtype=np.int64))
    if V.size == 0:
        return V
    pair = np.unique(group.add(V[:, None], V[None, :]))
    return np.unique(group.sub(pair[:, None], V[None, :]))


@dataclass(frozen=True)
class IsolationWitness:
    """A nonempty ``W`` with ``(V + V - V) & W`` empty, where ``V = U \\ W``."""

    W: tuple[int, ...]
    V: tuple[int, ...]

    @classmethod
    def build(cls, U: SubsetSample, W) -> "IsolationWitness":
        W = tuple(sorted(int(w) for w in W))
        V = tuple(x for x in U.tolist() if x not in set(W))
        if not is_isolated_subset(U, W):
            raise ValueError(f"{W} is not additively isolated")
        return cls(W, V)

    def to_json(self) -> dict:
        return {"W": list(self.W), "V": list(self.V)}


def is_isolated_subset(U: SubsetSample, W) -> bool:
    W = {int(w) for w in W}
    if not W:
        raise ValueError("W must be nonempty")
    if not W.issubset(U.index):
        raise ValueError("W must be a subset of U")
    V = [x for x in U.tolist() if x not in W]
    hits = sumset_vvv(U.group, V)
    return not any(w in set(hits.tolist()) for w in W)


class Verdict(str, Enum):
    CONNECTED = "connected"
    WITNESS = "witness"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ConnectivityResult:
    verdict: Verdict
    witness: IsolationWitness | None
    searched_up_to: int
    limit: int

    def to_json(self) -> dict:
        out = {"verdict": self.verdict.value, "searched_up_to": self.searched_up_to, "limit": self.limit}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


class _TripleIndex:
    """Finds, for ``w`` in ``U``, a triple ``v1 + v2 - v3 = w`` avoiding a set."""

    def __init__(self, U: SubsetSample):
        self.group = U.group
        self.elems = U.elements
        e = U.elements
        k = e.size
        x = np.repeat(np.arange(k), k)
        y = np.tile(np.arange(k), k)
        sums = U.group.add(e[x], e[y])
        order = np.argsort(sums, kind="stable")
        self.sums = sums[order]
        self.px = x[order]
        self.py = y[order]

    def find(self, w_pos: int, blocked: set[int]):
        """A triple of positions ``(i, j, l)`` with ``e_i + e_j - e_l = e_w`` and
        no position in ``blocked``, or ``None``."""
        e = self.elems
        targets = self.group.add(e[w_pos], e)  # v1 + v2 = w + v3
        lo = np.searchsorted(self.sums, targets, side="left")
        hi = np.searchsorted(self.sums, targets, side="right")
        for l in np.flatnonzero(hi > lo).tolist():
            if l in blocked:
                continue
            for t in range(lo[l], hi[l]):
                i, j = int(self.px[t]), int(self.py[t])
                if i not in blocked and j not in blocked:
                    return (i, j, l)
        return None


def _isolated_sets(index: _TripleIndex, k: int, max_size: int) -> list[tuple[int, ...]]:
    """Every W (as positions) of size <= max_size reached by the branching search.

    Each seed position starts a search; a W that is not yet isolated has a
    triple avoiding it for some member, and any isolated superset must
    contain one of that triple's positions, so branching over them is
    exhaustive for minimal isolated sets.
    """
    found = set()
    seen = set()

    def grow(W: frozenset):
        if W in seen:
            return
        seen.add(W)
        for w in sorted(W):
            t = index.find(w, set(W))
            if t is not None:
                break
        else:
            found.add(tuple(sorted(W)))
            return
        if len(W) >= max_size:
            return
        for pos in sorted(set(t)):
            grow(W | {pos})

    for seed in range(k):
        grow(frozenset([seed]))
    return sorted(found, key=lambda W: (len(W), W))


def is_additively_connected(U: SubsetSample, eta: float, w_max: int = 4) -> ConnectivityResult:
    """Exhaustive search for an isolated ``W`` with ``|W| <= min(eta |U|, w_max)``.

    Returns the least witness in (size, lexicographic) order if one exists,
    ``connected`` if the full range ``|W| <= eta |U|`` was searched, and
    ``inconclusive`` otherwise.
    """
    if not 0 < eta <= 1:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    k = len(U)
    limit = math.floor(eta * k + 1e-12)
    depth = min(limit, w_max)
    if depth >= 1 and k:
        found = _isolated_sets(_TripleIndex(U), k, depth)
        if found:
            W = [int(U.elements[p]) for p in found[0]]
            return ConnectivityResult(Verdict.WITNESS, IsolationWitness.build(U, W), depth, limit)
    verdict = Verdict.CONNECTED if limit <= w_max else Verdict.INCONCLUSIVE
    return ConnectivityResult(verdict, None, depth, limit)


def propagate_affine(U: SubsetSample, V0) -> np.ndarray:
    """Least superset of ``V0`` inside ``U`` closed under ``w = v1 + v2 - v3``.

    Worklist closure: when ``v`` joins, only sums involving ``v`` are new.
    """
    g = U.group
    members = set(int(v) for v in V0)
    if not members.issubset(U.index):
        raise ValueError("V0 must be a subset of U")
    universe = set(U.tolist())
    S = sorted(members)
    queue = list(S)
    current = np.array(S, dtype=np.int64)
    while queue and len(members) < len(universe):
        v = queue.pop()
        cur = current
        # v in position 1/2: v + s - t ; v in position 3: s + t - v
        a = g.sub(g.add(v, cur)[:, None], cur[None, :]).reshape(-1)
        pairs = g.add(cur[:, None], cur[None, :]).reshape(-1)
        b = g.sub(pairs, v)
        new = (set(a.tolist()) | set(b.tolist())) & (universe - members)
        if new:
            members |= new
            queue.extend(sorted(new))
            current = np.array(sorted(members), dtype=np.int64)
    return np.array(sorted(members), dtype=np.int64)


def has_extension_property(U: SubsetSample, eta: float, max_modulus: int) -> bool:
    """Brute-force ``(1 - eta)``-extension property over targets ``Z_m``, ``m <= max_modulus``.

    Checks that every Freiman hom agreeing with some affine map on at least
    ``(1 - eta)|U|`` elements agrees with it everywhere.
    """
    from .homs import all_affine_maps, homs_to_cyclic

    k = len(U)
    need = math.ceil((1 - eta) * k - 1e-12)
    for m in range(2, max_modulus + 1):
        target = GroupSpec.cyclic(m)
        affine_vals = [np.asarray(a(U.elements)) for a in all_affine_maps(U.group, target)]
        for phi in homs_to_cyclic(U, m):
            v = np.asarray(phi)
            for av in affine_vals:
                agree = int(np.sum(av == v))
                if need <= agree < k:
                    return False
    return True


def extension_property_exact(U: SubsetSample, eta: float) -> bool:
    """``(1 - eta)``-extension property over every Abelian target.

    A Freiman hom that vanishes on ``V`` is zero for every target iff the
    classes of ``V`` generate ``Z^U / L``; this is checked for every ``V`` of
    the minimal admissible size.
    """
    from itertools import combinations

    from .homs import build_relations
    from .intlinalg import lattice_basis, smith_form

    k = len(U)
    need = max(0, math.ceil((1 - eta) * k - 1e-12))
    basis = lattice_basis(build_relations(U).orbits, k)
    for V in combinations(range(k), need):
        rows = basis + [[int(c == v) for c in range(k)] for v in V]
        S = smith_form(rows, ncols=k)
        if S.rank < k or any(d != 1 for d in S.invariants):
            return False
    return True
