"""Seeded Monte Carlo drivers: threshold scans in C and hitting times.

Trial ``t`` of a run with master seed ``s`` uses ``derive_seed(s, t)``; in a
scan the same trial seed is reused for every grid point, so the sets for
different ``C`` are nested (each element draws one uniform and is kept when
it falls below ``p``).  Output rows are sorted before writing, so results do
not depend on the number of worker processes.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import binomtest

from .groups import GroupSpec
from .homs import RelationMatrix, relation_rank
from .intlinalg import random_primes
from .quadruples import (IncrementalQuadruples, SubsetSample, derive_seed, ordered_count,
                         pair_orbits, sample_binomial)

SCAN_COLUMNS = ["n", "C", "p", "trials", "frac_no_isolated", "frac_dim0", "mean_dim", "std_dim",
                "ci_half", "seed", "n_empty"]
HITTING_COLUMNS = ["trial", "seed", "n", "tau_iso", "tau_iso_final", "tau_dim0", "coincide"]


def threshold_p(n: int, C: float) -> float:
    """``C n^{-2/3} (log n)^{1/3}``."""
    return C * n ** (-2.0 / 3.0) * math.log(n) ** (1.0 / 3.0)


def equivalent_C(n: int, p: float) -> float:
    return p / threshold_p(n, 1.0)


@dataclass
class TrialRecord:
    trial: int
    seed: int
    size: int
    n_quads: int
    isolated: int
    freiman_dim: int | None
    dim_zero: bool | None
    rigid: bool | None = None
    wall_time: float = field(default=0.0, compare=False)

    def check(self):
        """Cross-invariants; sets of size 1 are exempt (a lone element is
        isolated yet has dimension 0)."""
        if self.freiman_dim is None:
            assert self.size == 0
            return
        assert self.dim_zero == (self.freiman_dim == 0)
        if self.size >= 2 and self.isolated > 0:
            assert self.freiman_dim >= 1, self


def analyze_trial(A: SubsetSample, trial: int = 0, exact_rank: bool = False) -> TrialRecord:
    t0 = time.perf_counter()
    k = len(A)
    if k == 0:
        return TrialRecord(trial, A.seed, 0, 0, 0, None, None, wall_time=time.perf_counter() - t0)
    orbits = pair_orbits(A)
    touched = np.zeros(k, dtype=bool)
    touched[orbits.reshape(-1)] = True
    rank = relation_rank(RelationMatrix(A, orbits), exact=exact_rank).rank
    dim = k - rank - 1
    rec = TrialRecord(trial, A.seed, k, ordered_count(orbits), int(k - touched.sum()), dim, dim == 0,
                      wall_time=time.perf_counter() - t0)
    rec.check()
    return rec


def wilson_half_width(successes: int, trials: int) -> float:
    if trials == 0:
        return float("nan")
    ci = binomtest(successes, trials).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.high - ci.low) / 2


# -- threshold scan -------------------------------------------------------------


@dataclass
class ScanPoint:
    C: float
    p: float


def _scan_trial(args):
    group, points, trial, master, exact_rank = args
    seed = derive_seed(master, trial)
    out = []
    for pt in points:
        A = sample_binomial(group, pt.p, seed)
        out.append(analyze_trial(A, trial, exact_rank))
    return trial, out


def _map(fn, jobs, workers: int):
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def scan_points(n: int, C_grid=(), p_grid=()) -> list[ScanPoint]:
    pts = [ScanPoint(float(C), threshold_p(n, C)) for C in C_grid]
    pts += [ScanPoint(equivalent_C(n, p), float(p)) for p in p_grid]
    if not pts:
        raise ValueError("the C/p grid is empty")
    for pt in pts:
        if not 0 <= pt.p <= 1:
            raise ValueError(f"C={pt.C} gives p={pt.p} outside [0, 1]")
    return sorted(pts, key=lambda pt: (pt.C, pt.p))


def run_threshold_scan(group: GroupSpec, C_grid=(), p_grid=(), trials: int = 100, seed: int = 0,
                       exact_rank: bool = False, workers: int = 1):
    """Per grid point: fraction of sets with no isolated element and with dimension 0.

    Empty sets have undefined dimension; they are excluded from every
    fraction and mean and counted in ``n_empty``.  ``ci_half`` is the Wilson
    95% half-width for ``frac_dim0``.  Returns ``(rows, records)``.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    n = group.order
    points = scan_points(n, C_grid, p_grid)
    jobs = [(group, points, t, seed, exact_rank) for t in range(trials)]
    results = sorted(_map(_scan_trial, jobs, workers), key=lambda r: r[0])
    rows = []
    records: dict[float, list[TrialRecord]] = {}
    for i, pt in enumerate(points):
        recs = [res[1][i] for res in results]
        records[pt.C] = recs
        live = [r for r in recs if r.size > 0]
        m = len(live)
        dims = np.array([r.freiman_dim for r in live], dtype=float)
        n_dim0 = sum(r.dim_zero for r in live)
        rows.append({
            "n": n,
            "C": pt.C,
            "p": pt.p,
            "trials": trials,
            "frac_no_isolated": sum(r.isolated == 0 for r in live) / m if m else float("nan"),
            "frac_dim0": n_dim0 / m if m else float("nan"),
            "mean_dim": float(dims.mean()) if m else float("nan"),
            "std_dim": float(dims.std()) if m else float("nan"),
            "ci_half": wilson_half_width(n_dim0, m),
            "seed": seed,
            "n_empty": trials - m,
        })
    return rows, records


# -- hitting times --------------------------------------------------------------


class IncrementalRank:
    """Reduced row basis over ``GF(p)`` of a relation matrix whose columns
    arrive one at a time.

    Columns are indexed by insertion order.  ``p < 2^25`` keeps the int64
    reduction products exact for up to 2^11 pivots.
    """

    def __init__(self, p: int):
        if p >= 2**25:
            raise ValueError("prime too large for int64 reduction")
        self.p = p
        self.B = np.zeros((0, 64), dtype=np.int64)
        self.pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def _widen(self, ncols):
        if ncols > self.B.shape[1]:
            width = max(ncols, 2 * self.B.shape[1])
            B = np.zeros((self.B.shape[0], width), dtype=np.int64)
            B[:, :self.B.shape[1]] = self.B
            self.B = B

    def add_rows(self, R: np.ndarray, upper: int) -> int:
        """Fold rows in (chunks of 32) until the rank reaches ``upper``."""
        p = self.p
        self._widen(R.shape[1])
        width = self.B.shape[1]
        for s in range(0, R.shape[0], 32):
            if self.rank >= upper:
                break
            X = np.zeros((min(32, R.shape[0] - s), width), dtype=np.int64)
            X[:, :R.shape[1]] = R[s:s + 32] % p
            if self.pivots:
                X = (X - X[:, self.pivots] @ self.B) % p
            for i in range(X.shape[0]):
                nz = np.flatnonzero(X[i])
                if nz.size == 0:
                    continue
                c = int(nz[0])
                row = X[i] * pow(int(X[i, c]), -1, p) % p
                # keep the basis fully reduced in the new pivot column
                self.B = (self.B - np.outer(self.B[:, c], row)) % p
                X[i + 1:] = (X[i + 1:] - np.outer(X[i + 1:, c], row)) % p
                self.B = np.vstack([self.B, row])
                self.pivots.append(c)
        return self.rank


class _UnionFind:
    def __init__(self):
        self.parent: list[int] = []
        self.components = 0

    def add(self):
        self.parent.append(len(self.parent))
        self.components += 1

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb
            self.components -= 1


@dataclass
class HittingTimeRecord:
    trial: int
    seed: int
    n: int
    tau_iso: int | None
    tau_iso_final: int | None
    tau_dim0: int | None
    coincide: bool
    uncertified: int = 0

    def check(self):
        if self.tau_iso is not None and self.tau_dim0 is not None:
            assert self.tau_dim0 >= self.tau_iso, self
            assert self.tau_iso_final <= self.tau_dim0, self


def hitting_trial(group: GroupSpec, trial: int, master: int, shadow=None) -> HittingTimeRecord:
    """Insert a random ordering of ``G`` until the Freiman dimension first hits 0.

    Sizes below 2 never count as hits.  The relation rank is maintained
    modulo a random prime below 2^25 at every insertion; it is exact when it
    equals ``|A| - #components``, which is the only case in which a hit is
    declared.  ``tau_iso_final`` is one more than the last size (up to
    ``tau_dim0``) that still had an isolated element.  ``shadow(inc)`` is
    called after each insertion when given.
    """
    seed = derive_seed(master, trial)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(group.order)
    p = random_primes(1, seed=seed, low=2**24, high=2**25)[0]
    inc = IncrementalQuadruples(group)
    ranker = IncrementalRank(p)
    uf = _UnionFind()
    pos: dict[int, int] = {}
    tau_iso = tau_dim0 = None
    last_isolated = 0
    uncertified = 0
    for a in perm.tolist():
        before = len(inc.orbits)
        inc.add(a)
        pos[a] = len(pos)
        uf.add()
        new = np.asarray(inc.orbits[before:], dtype=np.int64).reshape(-1, 4)
        k = len(inc)
        if new.size:
            cols = np.vectorize(pos.__getitem__, otypes=[np.int64])(new)
            for row in cols.tolist():
                for c in row[1:]:
                    uf.union(row[0], c)
            R = np.zeros((cols.shape[0], k), dtype=np.int64)
            r = np.arange(cols.shape[0])
            np.add.at(R, (r, cols[:, 0]), 1)
            np.add.at(R, (r, cols[:, 1]), 1)
            np.add.at(R, (r, cols[:, 2]), -1)
            np.add.at(R, (r, cols[:, 3]), -1)
            ranker.add_rows(R, upper=k - uf.components)
        if shadow is not None:
            shadow(inc)
        if inc.n_isolated > 0:
            last_isolated = k
        if k < 2:
            continue
        if tau_iso is None and inc.n_isolated == 0:
            tau_iso = k
        if ranker.rank == k - 1:
            tau_dim0 = k
            break
        if inc.n_isolated == 0 and uf.components == 1:
            uncertified += 1  # deficient mod p; exact over Q barring p-torsion
    tau_iso_final = last_isolated + 1 if tau_dim0 is not None else None
    rec = HittingTimeRecord(trial, seed, group.order, tau_iso, tau_iso_final, tau_dim0,
                            tau_iso is not None and tau_iso == tau_dim0, uncertified)
    rec.check()
    return rec


def _hitting_job(args):
    group, trial, master = args
    return hitting_trial(group, trial, master)


def run_hitting_time(group: GroupSpec, trials: int = 10, seed: int = 0, workers: int = 1) -> list[HittingTimeRecord]:
    if trials <= 0:
        raise ValueError("trials must be positive")
    jobs = [(group, t, seed) for t in range(trials)]
    return sorted(_map(_hitting_job, jobs, workers), key=lambda r: r.trial)


# -- serialisation ----------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "nan" if math.isnan(v) else repr(round(v, 12))
    return str(v)


def to_csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        d = row if isinstance(row, dict) else asdict(row)
        w.writerow([_fmt(d[c]) for c in columns])
    return buf.getvalue()


def hitting_summary(records: list[HittingTimeRecord]) -> dict:
    both = [r for r in records if r.tau_iso is not None and r.tau_dim0 is not None]
    return {
        "trials": len(records),
        "coincide": sum(r.coincide for r in records),
        "coincide_frac": sum(r.coincide for r in records) / len(records) if records else float("nan"),
        "mean_gap": float(np.mean([r.tau_dim0 - r.tau_iso for r in both])) if both else float("nan"),
        "nonmonotone_iso": sum(r.tau_iso_final is not None and r.tau_iso_final > r.tau_iso for r in both),
    }
