"""Exact linear algebra over the integers, the rationals and prime fields.

Dense matrices are lists of lists of Python ints.  Sparse relation rows are
``(m, 4)`` arrays ``(i, j, k, l)`` standing for ``e_i + e_j - e_k - e_l``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import flint
import numpy as np


class CapExceeded(RuntimeError):
    """A configured enumeration or search cap was exceeded."""


def relation_rows_dense(orbits: np.ndarray, ncols: int) -> list[list[int]]:
    rows = []
    for i, j, k, l in np.asarray(orbits).tolist():
        r = [0] * ncols
        r[i] += 1
        r[j] += 1
        r[k] -= 1
        r[l] -= 1
        rows.append(r)
    return rows


# ---------------------------------------------------------------------------
# rank
# ---------------------------------------------------------------------------


def bareiss_rank(rows: list[list[int]]) -> int:
    """Rank over Q by fraction-free (Bareiss) elimination."""
    M = [list(r) for r in rows]
    if not M:
        return 0
    m, n = len(M), len(M[0])
    rank = 0
    prev = 1
    for c in range(n):
        piv = next((i for i in range(rank, m) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        p = M[rank][c]
        for i in range(rank + 1, m):
            a = M[i][c]
            row_i = M[i]
            row_r = M[rank]
            for j in range(c + 1, n):
                row_i[j] = (p * row_i[j] - a * row_r[j]) // prev
            row_i[c] = 0
        prev = p
        rank += 1
        if rank == m:
            break
    return rank


def is_prime(n: int) -> bool:
    return n >= 2 and bool(flint.fmpz(n).is_prime())


def random_primes(count: int, seed: int = 0, low: int = 2**60, high: int = 2**62) -> list[int]:
    """``count`` distinct primes drawn uniformly-ish from ``[low, high)``."""
    rng = np.random.default_rng(seed)
    out: list[int] = []
    while len(out) < count:
        c = low + int(rng.integers(0, 2**62)) % (high - low)
        c |= 1
        while not is_prime(c):
            c += 2
        if c < high and c not in out:
            out.append(c)
    return out


def _nmod_from_sparse(orbits: np.ndarray, ncols: int, p: int, head=None):
    head = head or []
    M = flint.nmod_mat(len(head) + len(orbits), ncols, p)
    for r, row in enumerate(head):
        for c, v in enumerate(row):
            if v:
                M[r, c] = v
    base = len(head)
    for r, (i, j, k, l) in enumerate(np.asarray(orbits).tolist()):
        coeffs = {i: 0, j: 0, k: 0, l: 0}
        coeffs[i] += 1
        coeffs[j] += 1
        coeffs[k] -= 1
        coeffs[l] -= 1
        for c, v in coeffs.items():
            if v:
                M[base + r, c] = v % p
    return M


def modular_rank(orbits: np.ndarray, ncols: int, p: int, upper: int | None = None, seed: int = 0) -> int:
    """Rank of the sparse relation matrix over ``GF(p)``.

    The first chunk is a random sample of rows topped up so that every
    column that occurs at all is touched; later chunks walk the remaining
    rows in random order, each folded into the running reduced basis.
    Stops as soon as the rank reaches ``upper``, which must be a valid
    upper bound for the rank.
    """
    orbits = np.asarray(orbits, dtype=np.int64).reshape(-1, 4)
    m = len(orbits)
    if m == 0 or ncols == 0:
        return 0
    if upper is None:
        upper = min(m, ncols)
    rng = np.random.default_rng(seed)
    size0 = min(m, int(1.2 * ncols) + 16)
    first = np.sort(rng.choice(m, size=size0, replace=False))
    present = np.zeros(ncols, dtype=bool)
    present[orbits.reshape(-1)] = True
    covered = np.zeros(ncols, dtype=bool)
    covered[orbits[first].reshape(-1)] = True
    missing = present & ~covered
    if missing.any():
        # one row per uncovered column, so no column is starved in chunk one
        cand = np.flatnonzero(missing[orbits].any(axis=1))
        cols = orbits[cand]
        extra = []
        for c in np.flatnonzero(missing).tolist():
            if missing[c]:
                r = cand[np.flatnonzero((cols == c).any(axis=1))[0]]
                extra.append(r)
                missing[orbits[r]] = False
        first = np.union1d(first, np.array(extra, dtype=np.int64))
    M = _nmod_from_sparse(orbits[first], ncols, p)
    R, rank = M.rref()
    if rank >= upper or first.size == m:
        return rank
    rest = np.setdiff1d(np.arange(m), first, assume_unique=True)
    rest = rest[rng.permutation(rest.size)]
    basis = [[int(v) for v in row] for row in R.tolist()[:rank]]
    for pos in range(0, rest.size, max(64, ncols)):
        M = _nmod_from_sparse(orbits[rest[pos:pos + max(64, ncols)]], ncols, p, head=basis)
        R, rank = M.rref()
        if rank >= upper:
            break
        basis = [[int(v) for v in row] for row in R.tolist()[:rank]]
    return rank


# ---------------------------------------------------------------------------
# Hermite / Smith normal forms
# ---------------------------------------------------------------------------


def hnf_rows(rows: list[list[int]], ncols: int) -> list[list[int]]:
    """Nonzero rows of the row Hermite normal form: a basis of the row lattice."""
    if not rows:
        return []
    H = flint.fmpz_mat(rows).hnf()
    out = []
    for r in H.tolist():
        r = [int(v) for v in r]
        if any(r):
            out.append(r)
    return out


def lattice_basis(orbits: np.ndarray, ncols: int, chunk: int | None = None) -> list[list[int]]:
    """Hermite basis of the lattice spanned by sparse relation rows.

    Rows are folded in chunks so the dense matrix never exceeds
    ``basis + chunk`` rows.
    """
    orbits = np.asarray(orbits, dtype=np.int64).reshape(-1, 4)
    chunk = chunk or max(64, 2 * ncols)
    basis: list[list[int]] = []
    for start in range(0, len(orbits), chunk):
        dense = relation_rows_dense(orbits[start:start + chunk], ncols)
        basis = hnf_rows(basis + dense, ncols)
    return basis


@dataclass
class SmithForm:
    """``U @ M @ V == diag(invariants)`` padded with zeros.

    ``invariants`` lists the nonzero diagonal entries ``d_1 | d_2 | ...``;
    its length is the rank.  ``U`` is ``None`` unless requested.
    """

    invariants: list[int]
    V: list[list[int]]
    U: list[list[int]] | None
    shape: tuple[int, int]

    @property
    def rank(self) -> int:
        return len(self.invariants)


def _identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_form(M: list[list[int]], ncols: int | None = None, track_left: bool = False) -> SmithForm:
    """Smith normal form with unimodular column transform (and optionally row)."""
    A = [list(map(int, r)) for r in M]
    m = len(A)
    n = ncols if ncols is not None else (len(A[0]) if A else 0)
    V = _identity(n)
    U = _identity(m) if track_left else None

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        if U is not None:
            U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row_dst += q * row_src
        rd, rs = A[dst], A[src]
        for c in range(n):
            if rs[c]:
                rd[c] += q * rs[c]
        if U is not None:
            ud, us = U[dst], U[src]
            for c in range(m):
                if us[c]:
                    ud[c] += q * us[c]

    def add_col(dst, src, q):  # col_dst += q * col_src
        for row in A:
            if row[src]:
                row[dst] += q * row[src]
        for row in V:
            if row[src]:
                row[dst] += q * row[src]

    invariants = []
    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            row = A[i]
            for j in range(t, n):
                v = row[j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            p = A[t][t]
            dirty = False
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // p))
                    dirty |= A[i][t] != 0
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // p))
                    dirty |= A[t][j] != 0
            if dirty:
                # bring the smallest remainder of row/column t into the pivot
                cands = [(abs(A[i][t]), i, t) for i in range(t + 1, m) if A[i][t]]
                cands += [(abs(A[t][j]), t, j) for j in range(t + 1, n) if A[t][j]]
                _, i, j = min(cands)
                if i != t:
                    swap_rows(t, i)
                else:
                    swap_cols(t, j)
                continue
            bad = next((i for i in range(t + 1, m) if any(A[i][j] % p for j in range(t + 1, n))), None)
            if bad is None:
                break
            add_row(t, bad, 1)
        if A[t][t] < 0:
            A[t] = [-v for v in A[t]]
            if U is not None:
                U[t] = [-v for v in U[t]]
        invariants.append(A[t][t])
        t += 1
    return SmithForm(invariants, V, U, (m, n))


def lattice_smith(rows: list[list[int]], ncols: int) -> SmithForm:
    """Smith form of the row lattice (row transform discarded).

    Compresses to a Hermite basis first, so tall relation matrices are cheap.
    """
    return smith_form(hnf_rows(rows, ncols), ncols=ncols)


def _modinv(a: int, m: int) -> int:
    return pow(a, -1, m) if m > 1 else 0


def solve_congruences(M: list[list[int]], b: list[int], modulus: int) -> list[int] | None:
    """An integer ``x`` with ``M x = b (mod modulus)``, or ``None``.

    ``modulus == 0`` asks for an exact integer solution.
    """
    m = len(M)
    n = len(M[0]) if M else 0
    if m == 0:
        return [0] * n
    S = smith_form(M, ncols=n, track_left=True)
    c = [sum(u * v for u, v in zip(row, b)) for row in S.U]
    y = [0] * n
    for i, d in enumerate(S.invariants):
        if modulus == 0:
            if c[i] % d:
                return None
            y[i] = c[i] // d
        else:
            g = math.gcd(d, modulus)
            if c[i] % g:
                return None
            mg = modulus // g
            y[i] = (c[i] // g) * _modinv((d // g) % mg, mg) % mg if mg > 1 else 0
    for i in range(S.rank, m):
        if (c[i] if modulus == 0 else c[i] % modulus) != 0:
            return None
    x = [sum(V_row[j] * y[j] for j in range(n)) for V_row in S.V]
    if modulus:
        x = [v % modulus for v in x]
    return x


def kernel_mod(S: SmithForm, modulus: int) -> tuple[list[list[int]], list[int]]:
    """Generators and their orders for ``{x in Z_m^n : M x = 0 mod m}``.

    ``S`` is the Smith form of ``M``.  The group is the direct sum of the
    cyclic groups generated by the returned vectors.
    """
    n = S.shape[1]
    gens, orders = [], []
    for i in range(n):
        col = [S.V[r][i] for r in range(n)]
        if i < S.rank:
            g = math.gcd(S.invariants[i], modulus)
            step = modulus // g
            order = g
        else:
            step, order = 1, modulus
        if order <= 1:
            continue
        gens.append([(step * v) % modulus for v in col])
        orders.append(order)
    return gens, orders


# ---------------------------------------------------------------------------
# rational nullspace
# ---------------------------------------------------------------------------


def rational_nullspace(rows: list[list[int]], ncols: int) -> list[list[Fraction]]:
    """Basis of ``{v in Q^n : M v = 0}`` from the reduced row echelon form."""
    R = [[Fraction(v) for v in r] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(R)) if R[i][c] != 0), None)
        if piv is None:
            continue
        R[r], R[piv] = R[piv], R[r]
        inv = 1 / R[r][c]
        R[r] = [v * inv for v in R[r]]
        for i in range(len(R)):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                R[i] = [a - f * b for a, b in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == len(R):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * ncols
        v[fcol] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -R[i][fcol]
        basis.append(v)
    return basis
