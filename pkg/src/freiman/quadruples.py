"""Random subsets of finite Abelian groups and their additive quadruples.

Randomness comes from numpy's PCG64 generator (``numpy.random.default_rng``).
Per-trial seeds are derived from a master seed with :func:`derive_seed`, which
hashes ``(master, index)`` through ``numpy.random.SeedSequence`` and keeps the
first 64-bit word of its state.  Runs are reproducible from the master seed
within one installation; bit-identical streams across numpy versions are not
promised.

A quadruple ``(x, y, z, w)`` with ``x + y = z + w`` is *non-degenerate* when
neither ``x`` nor ``y`` equals ``z`` or ``w``.  Only non-degenerate quadruples
are ever stored.  Internally they are grouped into orbits under
``(x,y,z,w) -> (y,x,z,w), (x,y,w,z), (z,w,x,y)``; an orbit is a pair of
distinct unordered pairs ``{x, y}``, ``{z, w}`` with the same sum.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .groups import GroupSpec


def derive_seed(master: int, index: int) -> int:
    """64-bit seed for trial ``index`` of a run with seed ``master``."""
    ss = np.random.SeedSequence([int(master) & (2**64 - 1), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True, eq=False)
class SubsetSample:
    """A subset of ``group`` with the provenance of how it was produced.

    ``mode`` is ``"binomial"`` (``param`` = p), ``"fixed"`` (``param`` = size)
    or ``"explicit"``.
    """

    group: GroupSpec
    elements: np.ndarray
    mode: str = "explicit"
    param: float | int | None = None
    seed: int | None = None
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        elems = np.array(self.elements, dtype=np.int64).reshape(-1)
        if elems.size and np.any(np.diff(elems) <= 0):
            raise ValueError("subset elements must be strictly increasing")
        self.group.check(elems)
        elems.setflags(write=False)
        object.__setattr__(self, "elements", elems)
        if self.mode not in ("binomial", "fixed", "explicit"):
            raise ValueError(f"unknown sampling mode {self.mode!r}")

    @classmethod
    def explicit(cls, group: GroupSpec, elements) -> "SubsetSample":
        """Build from any iterable of indices (sorted and deduplicated here)."""
        return cls(group, np.unique(np.asarray(list(elements), dtype=np.int64)))

    def __len__(self):
        return int(self.elements.size)

    def __iter__(self):
        return iter(self.elements.tolist())

    def __contains__(self, x):
        return int(x) in self.index

    def __eq__(self, other):
        if not isinstance(other, SubsetSample):
            return NotImplemented
        return self.group == other.group and np.array_equal(self.elements, other.elements)

    def __hash__(self):
        return hash((self.group, self.elements.tobytes()))

    def __repr__(self):
        body = self.elements.tolist() if len(self) <= 12 else f"<{len(self)} elements>"
        return f"SubsetSample(group={self.group}, elements={body}, mode={self.mode!r})"

    @property
    def index(self) -> dict[int, int]:
        """Map element -> column position in :attr:`elements`."""
        if self._index is None:
            object.__setattr__(self, "_index", {x: i for i, x in enumerate(self.elements.tolist())})
        return self._index

    def with_elements(self, elements) -> "SubsetSample":
        return SubsetSample.explicit(self.group, elements)

    def tolist(self) -> list[int]:
        return self.elements.tolist()


def sample_binomial(group: GroupSpec, p: float, seed: int) -> SubsetSample:
    """Include each element independently with probability ``p``.

    One uniform variate is drawn per element in index order, so samples with
    the same seed and growing ``p`` are nested.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    u = rng.random(group.order)
    return SubsetSample(group, np.flatnonzero(u < p), mode="binomial", param=float(p), seed=seed)


def sample_fixed(group: GroupSpec, t: int, seed: int) -> SubsetSample:
    """A uniformly random ``t``-subset."""
    if not 0 <= t <= group.order:
        raise ValueError(f"subset size {t} outside [0, {group.order}]")
    rng = np.random.default_rng(seed)
    elems = np.sort(rng.choice(group.order, size=t, replace=False))
    return SubsetSample(group, elems, mode="fixed", param=int(t), seed=seed)


# ---------------------------------------------------------------------------
# quadruple enumeration
# ---------------------------------------------------------------------------


def _buckets(keys: np.ndarray):
    """Sort ``keys`` and yield ``(size, members)`` where ``members`` is a
    ``(count, size)`` array of positions sharing a key, one row per key."""
    order = np.argsort(keys, kind="stable")
    sk = keys[order]
    if sk.size == 0:
        return
    starts = np.flatnonzero(np.r_[True, sk[1:] != sk[:-1]])
    sizes = np.diff(np.r_[starts, sk.size])
    for g in np.unique(sizes):
        s = starts[sizes == g]
        yield int(g), order[s[:, None] + np.arange(g)]


def pair_orbits(A: SubsetSample) -> np.ndarray:
    """Orbit representatives of the non-degenerate quadruples of ``A``.

    Returns an ``(m, 4)`` array of *column positions* ``(i, j, k, l)`` into
    ``A.elements`` with ``i <= j``, ``k <= l``, ``(i, j) < (k, l)`` and
    ``a_i + a_j = a_k + a_l``.  Rows are sorted lexicographically.
    """
    k = len(A)
    if k < 2:
        return np.zeros((0, 4), dtype=np.int64)
    iu, ju = np.triu_indices(k)
    e = A.elements
    sums = A.group.add(e[iu], e[ju])
    out = []
    for g, members in _buckets(sums):
        if g < 2:
            continue
        a, b = np.triu_indices(g, 1)
        P = members[:, a].reshape(-1)
        Q = members[:, b].reshape(-1)
        out.append(np.stack([iu[P], ju[P], iu[Q], ju[Q]], axis=1))
    if not out:
        return np.zeros((0, 4), dtype=np.int64)
    rows = np.concatenate(out)
    return rows[np.lexsort(rows.T[::-1])]


def ordered_count(orbits: np.ndarray) -> int:
    """Number of ordered quadruples represented by orbit rows."""
    if len(orbits) == 0:
        return 0
    op = np.where(orbits[:, 0] == orbits[:, 1], 1, 2)
    oq = np.where(orbits[:, 2] == orbits[:, 3], 1, 2)
    return int(np.sum(2 * op * oq))


@dataclass(frozen=True, eq=False)
class QuadrupleSet:
    """All ordered non-degenerate additive quadruples of a set.

    ``quads`` holds element indices, one quadruple per row, sorted
    lexicographically.  ``degree[i]`` counts quadruples that contain
    ``elements[i]`` in at least one position.
    """

    group: GroupSpec
    elements: np.ndarray
    quads: np.ndarray
    degree: np.ndarray

    def __len__(self):
        return int(self.quads.shape[0])

    def as_set(self) -> set[tuple[int, int, int, int]]:
        return {tuple(q) for q in self.quads.tolist()}

    def degree_of(self, x: int) -> int:
        pos = np.searchsorted(self.elements, x)
        if pos >= self.elements.size or self.elements[pos] != x:
            raise KeyError(x)
        return int(self.degree[pos])

    def containing(self, x: int) -> np.ndarray:
        """The quadruples in which ``x`` appears (the set Gamma_x)."""
        return self.quads[np.any(self.quads == x, axis=1)]


def _degrees(elements: np.ndarray, quads: np.ndarray) -> np.ndarray:
    deg = np.zeros(elements.size, dtype=np.int64)
    if len(quads) == 0:
        return deg
    pos = np.searchsorted(elements, quads)
    # x may equal y and z may equal w; no other coincidences survive the filter
    np.add.at(deg, pos[:, 0], 1)
    np.add.at(deg, pos[:, 1][quads[:, 1] != quads[:, 0]], 1)
    np.add.at(deg, pos[:, 2], 1)
    np.add.at(deg, pos[:, 3][quads[:, 3] != quads[:, 2]], 1)
    return deg


def enumerate_quadruples(A: SubsetSample) -> QuadrupleSet:
    """Bucket ordered pairs by their sum, pair them up, drop degenerate ones.

    Runs in ``O(|A|^2 + E(A))`` where ``E(A)`` is the additive energy.
    """
    e = A.elements
    k = e.size
    chunks = []
    if k:
        x = np.repeat(e, k)
        y = np.tile(e, k)
        sums = A.group.add(x, y)
        for g, members in _buckets(sums):
            if g < 2:
                continue
            a, b = (m.reshape(-1) for m in np.meshgrid(np.arange(g), np.arange(g), indexing="ij"))
            P = members[:, a].reshape(-1)
            Q = members[:, b].reshape(-1)
            q = np.stack([x[P], y[P], x[Q], y[Q]], axis=1)
            keep = (q[:, 0] != q[:, 2]) & (q[:, 0] != q[:, 3]) & (q[:, 1] != q[:, 2]) & (q[:, 1] != q[:, 3])
            chunks.append(q[keep])
    quads = np.concatenate(chunks) if chunks else np.zeros((0, 4), dtype=np.int64)
    if len(quads):
        quads = quads[np.lexsort(quads.T[::-1])]
    return QuadrupleSet(A.group, e, quads, _degrees(e, quads))


def brute_force_quadruples(A: SubsetSample) -> set[tuple[int, int, int, int]]:
    """Reference enumeration over all of ``A^4``."""
    g = A.group
    out = set()
    for x, y, z, w in product(A.tolist(), repeat=4):
        if x in (z, w) or y in (z, w):
            continue
        if g.add(x, y) == g.add(z, w):
            out.add((x, y, z, w))
    return out


def expand_orbits(A: SubsetSample, orbits: np.ndarray) -> set[tuple[int, int, int, int]]:
    """All ordered quadruples (as element tuples) represented by orbit rows."""
    e = A.elements.tolist()
    out = set()
    for i, j, k, l in orbits.tolist():
        x, y, z, w = e[i], e[j], e[k], e[l]
        for p in ((x, y), (y, x)):
            for q in ((z, w), (w, z)):
                out.add(p + q)
                out.add(q + p)
    return out


def isolated_elements(A: SubsetSample, quads: QuadrupleSet | None = None) -> np.ndarray:
    """Elements of ``A`` lying in no non-degenerate quadruple of ``A``."""
    if quads is not None:
        return A.elements[quads.degree == 0]
    orbits = pair_orbits(A)
    touched = np.zeros(len(A), dtype=bool)
    touched[orbits.reshape(-1)] = True
    return A.elements[~touched]


class IncrementalQuadruples:
    """Quadruple structure of a set grown one element at a time.

    Keeps pair-sum buckets of unordered pairs; inserting ``a`` costs
    ``O(|A|)`` bucket updates plus one step per new orbit.
    """

    def __init__(self, group: GroupSpec):
        self.group = group
        self.elements: list[int] = []
        self._members: set[int] = set()
        self._buckets: dict[int, list[tuple[int, int]]] = defaultdict(list)
        self.orbits: list[tuple[int, int, int, int]] = []
        self.orbit_degree: dict[int, int] = {}
        self._n_isolated = 0

    def __len__(self):
        return len(self.elements)

    @property
    def n_isolated(self) -> int:
        return self._n_isolated

    def isolated(self) -> list[int]:
        return sorted(x for x in self.elements if self.orbit_degree[x] == 0)

    def _bump(self, x):
        if self.orbit_degree[x] == 0:
            self._n_isolated -= 1
        self.orbit_degree[x] += 1

    def add(self, a: int) -> int:
        """Insert ``a``; returns the number of new orbits."""
        a = int(a)
        if a in self._members:
            raise ValueError(f"{a} already present")
        self.group.check(a)
        self.elements.append(a)
        self._members.add(a)
        self.orbit_degree[a] = 0
        self._n_isolated += 1
        partners = np.asarray(self.elements, dtype=np.int64)
        sums = self.group.add(a, partners).tolist()
        before = len(self.orbits)
        for b, s in zip(partners.tolist(), sums):
            pair = (a, b) if a <= b else (b, a)
            bucket = self._buckets[s]
            for other in bucket:
                self.orbits.append(other + pair)
                for x in set(other + pair):
                    self._bump(x)
            bucket.append(pair)
        return len(self.orbits) - before

    def subset(self) -> SubsetSample:
        return SubsetSample.explicit(self.group, self.elements)

    def orbit_rows(self) -> tuple[SubsetSample, np.ndarray]:
        """Current set and its orbit rows as column positions (see :func:`pair_orbits`)."""
        A = self.subset()
        if not self.orbits:
            return A, np.zeros((0, 4), dtype=np.int64)
        pos = np.searchsorted(A.elements, np.asarray(self.orbits, dtype=np.int64))
        return A, pos

    def quadruple_set(self) -> set[tuple[int, int, int, int]]:
        A, rows = self.orbit_rows()
        return expand_orbits(A, rows)
