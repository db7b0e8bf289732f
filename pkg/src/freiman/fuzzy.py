"""Fuzzy values and the extraction of an affine map from a Freiman homomorphism.

A fuzzy value is a finitely supported nonnegative function on the target
group ``H``.  Given ``U`` and ``phi: U -> H``:

* ``psi(x)(h) = E{ mu(x1) mu(x2) mu(x3) : x1+x2+x3 = x, phi(x1)+phi(x2)+phi(x3) = h }``
  where ``mu`` is the characteristic measure of ``U`` and the expectation runs
  over the ``n^2`` triples of ``G`` summing to ``x``;
* ``theta(x) = E_{x1 - x2 = x} psi(x1) * psi_-(x2)`` with ``psi_-(y)(h) = psi(y)(-h)``;
* ``gamma(x)`` is the heaviest point of ``theta(x)``;
* ``alpha = gamma + shift``, the shift chosen by majority vote over ``U``.

Since ``mu`` is constant on ``U``, ``psi`` and ``theta`` are integer counts
times a single scale factor; "exact" mode keeps that factor as a Fraction.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .groups import GroupSpec
from .homs import AffineMap, _values, is_freiman_hom
from .quadruples import SubsetSample

EXACT_MAX_SIZE = 60
FULL_THETA_MAX_ORDER = 5000


class FuzzyDist:
    """A nonnegative finitely supported function on ``target``."""

    __slots__ = ("target", "values", "_mass")

    def __init__(self, target: GroupSpec, values: Mapping[int, object] | None = None):
        self.target = target
        vals = {}
        for h, v in (values or {}).items():
            if v < 0:
                raise ValueError("fuzzy values must be nonnegative")
            if v:
                vals[int(h)] = v
        target.check(list(vals))
        self.values = vals
        self._mass = sum(vals.values())

    @classmethod
    def delta(cls, target: GroupSpec, a: int) -> "FuzzyDist":
        return cls(target, {a: 1})

    @classmethod
    def zero(cls, target: GroupSpec) -> "FuzzyDist":
        return cls(target, {})

    def __repr__(self):
        return f"FuzzyDist({self.target}, {dict(sorted(self.values.items()))})"

    def __eq__(self, other):
        return isinstance(other, FuzzyDist) and self.target == other.target and self.values == other.values

    def __getitem__(self, h):
        return self.values.get(int(h), 0)

    @property
    def mass(self):
        return self._mass

    def support(self) -> list[int]:
        return sorted(self.values)

    def _same(self, other):
        if self.target != other.target:
            raise ValueError("fuzzy values live on different targets")

    def convolve(self, other: "FuzzyDist") -> "FuzzyDist":
        """``(p * q)(h) = sum_{h1 + h2 = h} p(h1) q(h2)``."""
        self._same(other)
        out: dict[int, object] = {}
        add = self.target.add
        for h1, a in self.values.items():
            for h2, b in other.values.items():
                h = add(h1, h2)
                out[h] = out.get(h, 0) + a * b
        return FuzzyDist(self.target, out)

    __mul__ = convolve

    def reflect(self) -> "FuzzyDist":
        """``h -> p(-h)``."""
        neg = self.target.neg
        return FuzzyDist(self.target, {neg(h): v for h, v in self.values.items()})

    def inner(self, other: "FuzzyDist"):
        """``sum_h p(h) q(h)``."""
        self._same(other)
        small, big = (self, other) if len(self.values) <= len(other.values) else (other, self)
        return sum((v * big.values[h] for h, v in small.values.items() if h in big.values), 0)

    def distance(self, other: "FuzzyDist"):
        """``1 - <p, q>``; may be negative when masses exceed 1."""
        return 1 - self.inner(other)

    def argmax(self) -> tuple[int | None, object]:
        """Heaviest point, ties broken by the least index."""
        if not self.values:
            return None, 0
        h = min(self.values, key=lambda k: (-self.values[k], k))
        return h, self.values[h]


def char_measure(U: SubsetSample, exact: bool = False) -> np.ndarray:
    """``n / |U|`` on ``U`` and 0 elsewhere, so that ``E_x mu(x) = 1``."""
    n, k = U.group.order, len(U)
    if k == 0:
        raise ValueError("the characteristic measure of the empty set is undefined")
    if exact:
        mu = np.array([Fraction(0)] * n, dtype=object)
        mu[U.elements] = Fraction(n, k)
        return mu
    mu = np.zeros(n)
    mu[U.elements] = n / k
    return mu


@dataclass
class FuzzyMap:
    """A map ``G -> pi(H)`` stored as sorted ``(x, h, count)`` triples times ``scale``.

    ``args`` lists the arguments at which the map was evaluated (``None``
    means all of ``G``; absent arguments are the zero distribution).
    """

    group: GroupSpec
    target: GroupSpec
    xs: np.ndarray
    hs: np.ndarray
    counts: np.ndarray
    scale: Fraction
    exact: bool
    args: np.ndarray | None = None
    _starts: dict = field(default=None, repr=False)

    def __post_init__(self):
        order = np.lexsort((self.hs, self.xs))
        self.xs, self.hs, self.counts = self.xs[order], self.hs[order], self.counts[order]

    def arguments(self) -> np.ndarray:
        return self.group.elements() if self.args is None else self.args

    def _coerce(self, c):
        if self.exact:
            return Fraction(int(c)) * self.scale
        return float(c) * float(self.scale)

    def _range(self, x):
        lo = np.searchsorted(self.xs, x, side="left")
        hi = np.searchsorted(self.xs, x, side="right")
        return lo, hi

    def __getitem__(self, x) -> FuzzyDist:
        lo, hi = self._range(int(x))
        return FuzzyDist(self.target, {int(h): self._coerce(c) for h, c in zip(self.hs[lo:hi], self.counts[lo:hi])})

    def mass(self, x):
        lo, hi = self._range(int(x))
        return self._coerce(int(self.counts[lo:hi].sum()) if self.exact else self.counts[lo:hi].sum())

    def support(self) -> np.ndarray:
        return np.unique(self.xs)

    def max_entry(self, x) -> tuple[int | None, object]:
        lo, hi = self._range(int(x))
        if hi == lo:
            return None, self._coerce(0)
        c = self.counts[lo:hi]
        i = int(np.argmax(c))  # first maximum = least h, since rows are sorted by h
        return int(self.hs[lo + i]), self._coerce(c[i])

    def to_dict(self) -> dict[int, FuzzyDist]:
        return {int(x): self[x] for x in self.support()}


def _accumulate(keys: np.ndarray, weights: np.ndarray):
    keys, inv = np.unique(keys, return_inverse=True)
    out = np.zeros(keys.size, dtype=weights.dtype)
    np.add.at(out, inv, weights)
    return keys, out


def build_psi(U: SubsetSample, phi, target: GroupSpec, exact: bool | None = None) -> FuzzyMap:
    """The fuzzy triple-sum map ``psi``; only ``U^3`` is visited."""
    vals = _values(U, phi)
    target.check(vals)
    G = U.group
    k = len(U)
    if k == 0:
        raise ValueError("empty set")
    if exact is None:
        exact = k <= EXACT_MAX_SIZE
    e = U.elements
    m = target.order
    pk = G.add(e[:, None], e[None, :]).reshape(-1) * m + target.add(vals[:, None], vals[None, :]).reshape(-1)
    pk, pc = _accumulate(pk, np.ones(pk.size, dtype=np.int64))
    px, ph = pk // m, pk % m
    keys, weights = [], []
    step = max(1, 4_000_000 // max(1, pk.size))
    for s in range(0, k, step):
        xs = G.add(px[None, :], e[s:s + step, None]).reshape(-1)
        hs = target.add(ph[None, :], vals[s:s + step, None]).reshape(-1)
        kk, ww = _accumulate(xs * m + hs, np.tile(pc, min(step, k - s)))
        keys.append(kk)
        weights.append(ww)
    keys, counts = _accumulate(np.concatenate(keys), np.concatenate(weights))
    scale = Fraction(G.order, k**3)
    return FuzzyMap(G, target, keys // m, keys % m, counts, scale, exact)


def default_theta_args(group: GroupSpec, sample_size: int = 256, seed: int = 0) -> np.ndarray | None:
    """All of ``G`` for small groups, else 0, the generators and a uniform sample."""
    if group.order <= FULL_THETA_MAX_ORDER:
        return None
    rng = np.random.default_rng(seed)
    sample = rng.choice(group.order, size=min(sample_size, group.order), replace=False)
    return np.unique(np.concatenate([[0], group.generators(), sample]).astype(np.int64))


def _theta_dense(psi: FuzzyMap, arg_list: np.ndarray):
    """Autocorrelation of the joint count array over ``G x H`` by FFT.

    Returns ``None`` when the float error bound cannot certify rounding to
    integers.
    """
    G, H = psi.group, psi.target
    C = psi.counts.astype(np.float64)
    energy = float(np.sum(C * C))  # bounds every output count
    size = G.order * H.order
    if energy * 1e-15 * (1 + np.log2(size)) * 8 > 0.05:
        return None
    grid = np.zeros(size)
    grid[psi.xs * H.order + psi.hs] = C
    # index x * |H| + h in C order: the H digits vary fastest, so H axes come last
    shape = G.factors[::-1] + H.factors[::-1]
    F = np.fft.fftn(grid.reshape(shape))
    raw = np.fft.ifftn(F * np.conj(F)).real.reshape(G.order, H.order)
    raw = raw[arg_list]
    out = np.rint(raw)
    if out.size and np.max(np.abs(raw - out)) > 0.25:
        return None
    xi, hi = np.nonzero(out > 0)
    return arg_list[xi], hi.astype(np.int64), out[xi, hi].astype(np.int64)


def _theta_sparse(psi: FuzzyMap, arg_list: np.ndarray):
    G, H = psi.group, psi.target
    X, Hh, C = psi.xs, psi.hs, psi.counts
    n_ent = X.size
    out_x, out_h, out_c = [], [], []
    for x in arg_list.tolist():
        targets = G.add(x, X)
        lo = np.searchsorted(X, targets, side="left")
        hi = np.searchsorted(X, targets, side="right")
        lengths = hi - lo
        total = int(lengths.sum())
        if total == 0:
            continue
        idx2 = np.repeat(np.arange(n_ent), lengths)
        offsets = np.cumsum(lengths) - lengths
        idx1 = lo[idx2] + (np.arange(total) - offsets[idx2])
        h = H.sub(Hh[idx1], Hh[idx2])
        hk, hc = _accumulate(h, C[idx1] * C[idx2])
        out_x.append(np.full(hk.size, x, dtype=np.int64))
        out_h.append(hk)
        out_c.append(hc)
    cat = lambda parts, dt: np.concatenate(parts) if parts else np.zeros(0, dtype=dt)  # noqa: E731
    return cat(out_x, np.int64), cat(out_h, np.int64), cat(out_c, C.dtype)


def build_theta(psi: FuzzyMap, args=None, method: str = "auto") -> FuzzyMap:
    """``theta(x) = E_{x1 - x2 = x} psi(x1) * psi_-(x2)`` at each argument.

    In counts this is ``sum_{x2, h2} c(x + x2, h + h2) c(x2, h2)``, an
    autocorrelation over ``G x H``.  ``method`` is ``"sparse"`` (merge over
    the support of ``psi``), ``"dense"`` (FFT over ``G x H``, certified
    integer rounding) or ``"auto"``, which picks the cheaper one.
    """
    G, H = psi.group, psi.target
    if args is None:
        args = default_theta_args(G)
    arg_list = G.elements() if args is None else np.unique(np.asarray(args, dtype=np.int64))
    if method not in ("auto", "sparse", "dense"):
        raise ValueError(f"unknown method {method!r}")
    size = G.order * H.order
    if method == "auto":
        ent = psi.xs.size
        sparse_cost = arg_list.size * (ent + ent * ent / G.order)
        dense_cost = 3 * size * (1 + np.log2(size))
        method = "dense" if size <= 2**23 and dense_cost < sparse_cost else "sparse"
    res = _theta_dense(psi, arg_list) if method == "dense" else None
    if res is None:
        res = _theta_sparse(psi, arg_list)
    scale = psi.scale * psi.scale / G.order
    return FuzzyMap(G, H, *res, scale, psi.exact, args=None if args is None else arg_list)


@dataclass
class GammaResult:
    """Outcome of reading a homomorphism off ``theta``."""

    gamma: dict[int, int]
    max_mass: dict[int, object]
    total: bool
    violations: int | None
    hom: AffineMap | None

    def histogram(self, bins=(0.0, 0.25, 0.5, 0.75, 0.9, 0.99, 1.01, float("inf"))) -> dict[str, int]:
        vals = np.array([float(v) for v in self.max_mass.values()])
        counts, edges = np.histogram(vals, bins=np.array(bins))
        return {f"[{edges[i]:g},{edges[i + 1]:g})": int(c) for i, c in enumerate(counts)}


def extract_gamma(theta: FuzzyMap, threshold: float) -> GammaResult:
    """``gamma(x) = argmax_h theta(x)(h)`` wherever the maximum reaches ``threshold``.

    When ``gamma`` is defined at every evaluated argument, ``violations``
    counts generator-order failures plus arguments where ``gamma`` differs
    from the homomorphism fixed by its values on the generators.
    """
    G, H = theta.group, theta.target
    gamma, max_mass = {}, {}
    for x in theta.arguments().tolist():
        h, v = theta.max_entry(x)
        max_mass[x] = v
        if h is not None and v >= threshold:
            gamma[x] = h
    total = len(gamma) == len(max_mass)
    if not total:
        return GammaResult(gamma, max_mass, False, None, None)
    gens = G.generators()
    if any(g not in gamma for g in gens):
        return GammaResult(gamma, max_mass, True, None, None)
    images = [gamma[g] for g in gens]
    violations = sum(int(H.mul(d, img) != 0) for d, img in zip(G.factors, images))
    xs = np.array(sorted(gamma), dtype=np.int64)
    coords = G.decode(xs)
    linear = H.encode(coords @ H.decode(np.array(images, dtype=np.int64)))
    violations += int(np.sum(np.asarray(linear) != np.array([gamma[x] for x in xs.tolist()])))
    hom = AffineMap(G, H, tuple(images), 0) if violations == 0 else None
    return GammaResult(gamma, max_mass, True, violations, hom)


@dataclass
class ExtractionReport:
    alpha: AffineMap | None
    agreement: float | None
    shift: int | None
    gamma: GammaResult
    input_is_freiman_hom: bool

    def to_json(self, histogram: bool = True) -> dict:
        out = {
            "gamma_total": self.gamma.total,
            "violations": self.gamma.violations,
            "shift": self.shift,
            "agreement": self.agreement,
            "input_is_freiman_hom": self.input_is_freiman_hom,
            "alpha": None if self.alpha is None else self.alpha.to_json(),
        }
        if histogram:
            out["per_x_max_mass"] = self.gamma.histogram()
        return out


def majority_shift(U: SubsetSample, vals: np.ndarray, linear: AffineMap) -> int:
    """Most common ``phi(u) - gamma(u)``; ties go to the least index."""
    diffs = linear.target.sub(vals, np.asarray(linear(U.elements)))
    counts = Counter(np.atleast_1d(diffs).tolist())
    return min(counts, key=lambda s: (-counts[s], s))


def extraction_report(U: SubsetSample, phi, target: GroupSpec, threshold: float = 0.5,
                      exact: bool | None = None, theta_args=None) -> ExtractionReport:
    """Run ``psi -> theta -> gamma -> alpha`` and report every stage."""
    vals = _values(U, phi)
    ok = is_freiman_hom(U, vals, target)
    psi = build_psi(U, vals, target, exact=exact)
    theta = build_theta(psi, args=theta_args)
    gres = extract_gamma(theta, threshold)
    if gres.hom is None:
        return ExtractionReport(None, None, None, gres, ok)
    shift = majority_shift(U, vals, gres.hom)
    alpha = AffineMap(U.group, target, gres.hom.images, shift)
    agreement = float(np.mean(np.asarray(alpha(U.elements)) == vals))
    return ExtractionReport(alpha, agreement, shift, gres, ok)


def extract_affine(U: SubsetSample, phi, target: GroupSpec, threshold: float = 0.5,
                   exact: bool | None = None, theta_args=None) -> tuple[AffineMap, float] | None:
    """The affine map recovered from ``phi`` and the fraction of ``U`` where they agree."""
    rep = extraction_report(U, phi, target, threshold, exact, theta_args)
    if rep.alpha is None:
        return None
    return rep.alpha, rep.agreement


def quadruple_consistency(psi: FuzzyMap):
    """``E_{z1+z2=z3+z4} <psi(z1) * psi(z2), psi(z3) * psi(z4)>`` over all of ``G``.

    Equals ``sum |c * c|^2`` of the joint count array convolved with itself
    over ``G x H``, normalised by ``n^3``.  Intended for small instances.
    """
    G, H = psi.group, psi.target
    X, Hh, C = psi.xs, psi.hs, psi.counts
    m = H.order
    keys = (G.add(X[:, None], X[None, :]) * m + H.add(Hh[:, None], Hh[None, :])).reshape(-1)
    _, conv = _accumulate(keys, (C[:, None] * C[None, :]).reshape(-1).astype(object if psi.exact else float))
    total = sum(int(v) * int(v) for v in conv) if psi.exact else float(np.sum(conv**2))
    scale = psi.scale**4 / G.order**3
    return Fraction(total) * scale if psi.exact else total * float(scale)
