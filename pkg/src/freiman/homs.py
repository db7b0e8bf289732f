"""Spaces of Freiman homomorphisms, computed exactly.

A map ``phi`` on ``A`` is a Freiman homomorphism iff it is killed by every
relation ``e_x + e_y - e_z - e_w`` with ``(x, y, z, w)`` a non-degenerate
quadruple of ``A``.  The relation lattice ``L`` therefore determines
everything: homs ``A -> H`` are ``Hom(Z^A / L, H)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .groups import GroupSpec
from .intlinalg import (
    CapExceeded,
    bareiss_rank,
    kernel_mod,
    lattice_basis,
    modular_rank,
    random_primes,
    rational_nullspace,
    relation_rows_dense,
    smith_form,
    solve_congruences,
)
from .quadruples import QuadrupleSet, SubsetSample, pair_orbits

DEFAULT_PRIMES = tuple(random_primes(2, seed=20240601))


@dataclass(frozen=True, eq=False)
class RelationMatrix:
    """One row ``e_i + e_j - e_k - e_l`` per quadruple orbit.

    ``orbits`` holds column positions into ``subset.elements``.
    """

    subset: SubsetSample
    orbits: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.orbits), len(self.subset))

    def dense(self) -> list[list[int]]:
        return relation_rows_dense(self.orbits, len(self.subset))

    def to_array(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.int64)
        for r, (i, j, k, l) in enumerate(self.orbits.tolist()):
            out[r, i] += 1
            out[r, j] += 1
            out[r, k] -= 1
            out[r, l] -= 1
        return out


def build_relations(A: SubsetSample, quads: QuadrupleSet | None = None) -> RelationMatrix:
    """Relation matrix of ``A``, deduplicated up to quadruple symmetries."""
    if quads is None:
        return RelationMatrix(A, pair_orbits(A))
    if quads.group != A.group or not np.array_equal(quads.elements, A.elements):
        raise ValueError("quadruple set does not belong to this subset")
    if len(quads) == 0:
        return RelationMatrix(A, np.zeros((0, 4), dtype=np.int64))
    pos = np.searchsorted(A.elements, quads.quads)
    P = np.sort(pos[:, :2], axis=1)
    Q = np.sort(pos[:, 2:], axis=1)
    swap = (P[:, 0] > Q[:, 0]) | ((P[:, 0] == Q[:, 0]) & (P[:, 1] > Q[:, 1]))
    first = np.where(swap[:, None], Q, P)
    second = np.where(swap[:, None], P, Q)
    rows = np.unique(np.concatenate([first, second], axis=1), axis=0)
    return RelationMatrix(A, rows)


def component_count(ncols: int, orbits: np.ndarray) -> int:
    """Connected components of the hypergraph whose edges are quadruples.

    Constants on each component are Freiman homomorphisms, so
    ``ncols - component_count`` bounds the rank from above.
    """
    if ncols == 0:
        return 0
    orbits = np.asarray(orbits).reshape(-1, 4)
    src = np.repeat(orbits[:, 0], 3)
    dst = orbits[:, 1:].reshape(-1)
    graph = coo_matrix((np.ones(src.size), (src, dst)), shape=(ncols, ncols))
    n, _ = connected_components(graph, directed=False)
    return int(n)


@dataclass
class RankResult:
    rank: int
    upper: int
    certified: bool
    primes_agree: bool | None
    method: str


def relation_rank(rel: RelationMatrix, exact: bool = False, primes=DEFAULT_PRIMES, seed: int = 0) -> RankResult:
    """Rank over Q of the relation matrix.

    Modular ranks never exceed the rational rank, and the rank never exceeds
    ``|A| - #components``; a modular rank that reaches that bound is exact.
    Otherwise a second prime is tried and the larger value kept.
    ``exact=True`` runs fraction-free rational elimination instead.
    """
    k = len(rel.subset)
    upper = k - component_count(k, rel.orbits)
    if exact:
        r = bareiss_rank(rel.dense())
        return RankResult(r, upper, True, None, "bareiss")
    if len(rel.orbits) == 0:
        return RankResult(0, upper, True, None, "empty")
    r1 = modular_rank(rel.orbits, k, primes[0], upper=upper, seed=seed)
    if r1 == upper:
        return RankResult(r1, upper, True, None, "modular")
    r2 = modular_rank(rel.orbits, k, primes[1], upper=upper, seed=seed + 1)
    return RankResult(max(r1, r2), upper, max(r1, r2) == upper, r1 == r2, "modular2")


def freiman_dimension(A: SubsetSample, exact: bool = False, relations: RelationMatrix | None = None) -> int:
    """One less than the dimension of the space of Freiman homs ``A -> R``."""
    if len(A) == 0:
        raise ValueError("Freiman dimension of the empty set is undefined")
    rel = relations if relations is not None else build_relations(A)
    return len(A) - relation_rank(rel, exact=exact).rank - 1


@dataclass
class HomSpace:
    """Freiman homomorphisms out of ``subset``."""

    subset: SubsetSample
    relations: RelationMatrix
    rank_q: int
    freiman_dim: int
    _smith: object = field(default=None, repr=False)

    @property
    def smith(self):
        if self._smith is None:
            basis = lattice_basis(self.relations.orbits, len(self.subset))
            self._smith = smith_form(basis, ncols=len(self.subset))
        return self._smith

    @property
    def smith_invariants(self) -> list[int]:
        return list(self.smith.invariants)

    @property
    def torsion(self) -> list[int]:
        """Invariant factors > 1 of ``Z^A / L``."""
        return [d for d in self.smith.invariants if d > 1]

    def nullspace_basis(self) -> list[list[Fraction]]:
        return rational_nullspace(self.relations.dense(), len(self.subset))


def hom_space(A: SubsetSample, exact: bool = False) -> HomSpace:
    if len(A) == 0:
        raise ValueError("empty set")
    rel = build_relations(A)
    r = relation_rank(rel, exact=exact).rank
    return HomSpace(A, rel, r, len(A) - r - 1)


# ---------------------------------------------------------------------------
# maps
# ---------------------------------------------------------------------------


def _values(A: SubsetSample, phi) -> np.ndarray:
    """Values of ``phi`` aligned with ``A.elements``; ``phi`` may be a mapping or a sequence."""
    if isinstance(phi, Mapping):
        missing = [x for x in A.tolist() if x not in phi]
        if missing:
            raise ValueError(f"map is not defined on {missing[:5]}")
        return np.array([int(phi[x]) for x in A.tolist()], dtype=np.int64)
    vals = np.asarray(phi, dtype=np.int64).reshape(-1)
    if vals.size != len(A):
        raise ValueError(f"expected {len(A)} values, got {vals.size}")
    return vals


def is_freiman_hom(A: SubsetSample, phi, target: GroupSpec, relations: RelationMatrix | None = None) -> bool:
    vals = _values(A, phi)
    target.check(vals)
    rel = relations if relations is not None else build_relations(A)
    if len(rel.orbits) == 0:
        return True
    v = vals[rel.orbits]
    lhs = target.add(v[:, 0], v[:, 1])
    rhs = target.add(v[:, 2], v[:, 3])
    return bool(np.all(lhs == rhs))


@dataclass(frozen=True)
class AffineMap:
    """``x -> r(x) + shift`` with ``r`` the homomorphism sending the ``j``-th
    generator of ``source`` to ``images[j]``."""

    source: GroupSpec
    target: GroupSpec
    images: tuple[int, ...]
    shift: int

    def __post_init__(self):
        images = tuple(int(v) for v in self.images)
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "shift", int(self.shift))
        if len(images) != self.source.rank:
            raise ValueError("need one image per source generator")
        self.target.check(list(images) + [self.shift])
        for d, img in zip(self.source.factors, images):
            if self.target.mul(d, img) != 0:
                raise ValueError(f"image {img} of a generator of order {d} does not define a homomorphism")

    def __call__(self, x):
        coords = self.source.decode(x)
        img = self.target.decode(np.array(self.images, dtype=np.int64))
        out = coords @ img + self.target.decode(self.shift)
        res = self.target.encode(out)
        return res

    @property
    def linear(self) -> "AffineMap":
        return AffineMap(self.source, self.target, self.images, 0)

    def to_json(self) -> dict:
        return {"hom": list(self.images), "shift": self.shift}

    @classmethod
    def from_json(cls, source: GroupSpec, target: GroupSpec, data: Mapping) -> "AffineMap":
        return cls(source, target, tuple(data["hom"]), data["shift"])


def all_affine_maps(source: GroupSpec, target: GroupSpec) -> Iterator[AffineMap]:
    """Every affine map ``source -> target`` (small groups only)."""
    choices = []
    for d in source.factors:
        choices.append([h for h in range(target.order) if target.mul(d, h) == 0])
    for images in itertools.product(*choices):
        for s in range(target.order):
            yield AffineMap(source, target, images, s)


def _solve_affine(source: GroupSpec, elements: np.ndarray, coords: np.ndarray, moduli: list[int]):
    """Per-coordinate solve of ``value_l(a) = sum_j c_jl a_j + s_l`` (mod ``moduli[l]``).

    ``moduli[l] == 0`` stands for an infinite cyclic coordinate.  Returns
    ``(c, s)`` as integer lists or ``None``.
    """
    a = source.decode(elements).tolist()
    c_all, s_all = [], []
    for l, e in enumerate(moduli):
        steps = [e // math.gcd(d, e) for d in source.factors]
        M = [[steps[j] * row[j] for j in range(source.rank)] + [1] for row in a]
        b = [int(v) for v in coords[:, l].tolist()]
        sol = solve_congruences(M, b, e)
        if sol is None:
            return None
        c_all.append([steps[j] * sol[j] for j in range(source.rank)])
        s_all.append(sol[-1])
    return c_all, s_all


def is_affine(group: GroupSpec, A: SubsetSample, phi, target: GroupSpec) -> AffineMap | None:
    """Find ``r`` in ``Hom(G, H)`` and ``s`` in ``H`` with ``phi(a) = r(a) + s`` on ``A``.

    Each cyclic factor of ``H`` is handled separately by solving linear
    congruences for the images of the generators of ``G``.
    """
    if A.group != group:
        raise ValueError("subset lives in a different group")
    vals = _values(A, phi)
    target.check(vals)
    if len(A) == 0:
        return AffineMap(group, target, (0,) * group.rank, 0)
    sol = _solve_affine(group, A.elements, target.decode(vals), list(target.factors))
    if sol is None:
        return None
    c, s = sol
    images = [target.encode([c[l][j] for l in range(target.rank)]) for j in range(group.rank)]
    return AffineMap(group, target, tuple(images), target.encode(s))


@dataclass
class CyclicHoms:
    """All Freiman homs ``A -> Z_m`` as the span of independent cyclic generators."""

    subset: SubsetSample
    modulus: int
    generators: list[list[int]]
    orders: list[int]
    cap: int = 10**6

    @property
    def count(self) -> int:
        return math.prod(self.orders)

    def __len__(self):
        return self.count

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        """Every hom as a tuple of values aligned with ``subset.elements``."""
        if self.count > self.cap:
            raise CapExceeded(f"{self.count} homomorphisms exceed the enumeration cap {self.cap}; use generators")
        k = len(self.subset)
        G = np.array(self.generators, dtype=np.int64).reshape(-1, k)
        for coeffs in itertools.product(*(range(o) for o in self.orders)):
            v = (np.asarray(coeffs, dtype=np.int64) @ G) % self.modulus if len(coeffs) else np.zeros(k, dtype=np.int64)
            yield tuple(v.tolist())

    def as_dicts(self) -> Iterator[dict[int, int]]:
        keys = self.subset.tolist()
        for v in self:
            yield dict(zip(keys, v))


def homs_to_cyclic(A: SubsetSample, m: int, cap: int = 10**6, space: HomSpace | None = None) -> CyclicHoms:
    """Freiman homs ``A -> Z_m`` from the Smith form of the relation lattice."""
    if m < 1:
        raise ValueError("modulus must be >= 1")
    if m == 1:
        return CyclicHoms(A, 1, [], [], cap)
    if len(A) == 0:
        return CyclicHoms(A, m, [], [], cap)
    if space is None:
        rel = build_relations(A)
        S = smith_form(lattice_basis(rel.orbits, len(A)), ncols=len(A))
    else:
        S = space.smith
    gens, orders = kernel_mod(S, m)
    return CyclicHoms(A, m, gens, orders, cap)


def universal_hom(A: SubsetSample, space: HomSpace | None = None):
    """The canonical Freiman hom ``A -> F = Z^A / L``.

    Returns ``(coords, moduli)``: row ``i`` gives the image of
    ``A.elements[i]`` in ``F = Z_{d_1} + ... + Z^f``, with modulus 0 marking
    infinite cyclic coordinates.
    """
    space = space if space is not None else hom_space(A)
    S = space.smith
    k = len(A)
    cols, moduli = [], []
    for i in range(k):
        d = S.invariants[i] if i < S.rank else 0
        if d == 1:
            continue
        cols.append(i)
        moduli.append(d)
    V = np.array(S.V, dtype=object).reshape(k, k)
    coords = V[:, cols] if cols else np.zeros((k, 0), dtype=object)
    for c, d in enumerate(moduli):
        if d:
            coords[:, c] = coords[:, c] % d
    return coords, moduli


def is_universally_rigid(A: SubsetSample, space: HomSpace | None = None) -> bool:
    """Whether every Freiman hom from ``A`` into every Abelian group is affine.

    Holds iff the universal hom ``A -> Z^A / L`` is affine, i.e. iff the
    evaluation map ``Z^A / L -> Z + G`` is a split monomorphism.
    """
    if len(A) == 0:
        raise ValueError("empty set")
    space = space if space is not None else hom_space(A)
    if space.freiman_dim > 0:
        return False
    coords, moduli = universal_hom(A, space)
    return _solve_affine(A.group, A.elements, coords, moduli) is not None


def find_nonaffine_hom(A: SubsetSample, max_modulus: int, cap: int = 10**5):
    """Brute-force search for a Freiman hom into some ``Z_m`` (``m <= max_modulus``)
    that is not affine.  Returns ``(m, phi_dict)`` or ``None``."""
    for m in range(2, max_modulus + 1):
        target = GroupSpec.cyclic(m)
        for phi in homs_to_cyclic(A, m, cap=cap).as_dicts():
            if is_affine(A.group, A, phi, target) is None:
                return m, phi
    return None
