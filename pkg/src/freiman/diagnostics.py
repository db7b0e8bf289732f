"""Numerical diagnostics: M(f), sparse triple convolutions, Fourier norms."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .groups import GroupSpec, lp_norm_hat
from .homs import _values
from .quadruples import QuadrupleSet, SubsetSample, pair_orbits


def M_value(f, quads: QuadrupleSet) -> complex:
    """``E_{(x,y,z,w) in Gamma} f(x) f(y) conj(f(z) f(w))`` over the stored quadruples."""
    if len(quads) == 0:
        raise ValueError("M is undefined on an empty quadruple set")
    f = np.asarray(f, dtype=complex)
    q = quads.quads
    terms = f[q[:, 0]] * f[q[:, 1]] * np.conj(f[q[:, 2]] * f[q[:, 3]])
    return complex(terms.mean())


def M_value_orbits(f, A: SubsetSample, orbits: np.ndarray | None = None) -> float:
    """Same average as :func:`M_value` but summed orbit by orbit.

    An orbit ``{P, Q}`` contributes ``2 o(P) o(Q) Re(f_P conj f_Q)``, where
    ``f_P`` is the product over the pair and ``o`` counts its orderings, so
    the result is real for any ``f``.
    """
    if orbits is None:
        orbits = pair_orbits(A)
    if len(orbits) == 0:
        raise ValueError("M is undefined on an empty quadruple set")
    f = np.asarray(f, dtype=complex)[A.elements]
    fp = f[orbits[:, 0]] * f[orbits[:, 1]]
    fq = f[orbits[:, 2]] * f[orbits[:, 3]]
    op = np.where(orbits[:, 0] == orbits[:, 1], 1, 2)
    oq = np.where(orbits[:, 2] == orbits[:, 3], 1, 2)
    w = 2 * op * oq
    return float(np.sum(w * np.real(fp * np.conj(fq))) / np.sum(w))


def max_pair_representation(group: GroupSpec, U1, U2) -> int:
    """``max_x #{(u1, u2) in U1 x U2 : u1 + u2 = x}``."""
    a = np.unique(np.asarray(list(U1), dtype=np.int64))
    b = np.unique(np.asarray(list(U2), dtype=np.int64))
    if a.size == 0 or b.size == 0:
        return 0
    group.check(a)
    group.check(b)
    return int(np.bincount(group.add(a[:, None], b[None, :]).ravel(), minlength=group.order).max())


def _indicator(group: GroupSpec, U) -> np.ndarray:
    f = np.zeros(group.order)
    f[np.asarray(list(U), dtype=np.int64)] = 1.0
    return f


def triple_counts(group: GroupSpec, U1, U2, U3) -> np.ndarray:
    """Integer array ``c(x) = #{(u1, u2, u3) : u1 + u2 - u3 = x}``.

    Uses pair sums directly when ``|U1||U2||U3|`` is small and an FFT
    otherwise; FFT output is rounded and rejected if any value sits farther
    than 0.25 from an integer.
    """
    e1, e2, e3 = (np.unique(np.asarray(list(U), dtype=np.int64)) for U in (U1, U2, U3))
    n = group.order
    if e1.size * e2.size * e3.size <= 4_000_000:
        s = group.add(e1[:, None], e2[None, :]).ravel()
        pairs = np.bincount(s, minlength=n)
        nz = np.flatnonzero(pairs)
        x = group.sub(nz[:, None], e3[None, :]).ravel()
        return np.bincount(x, weights=np.repeat(pairs[nz], e3.size), minlength=n).round().astype(np.int64)
    grid = group.factors[::-1]
    F = [np.fft.fftn(_indicator(group, e).reshape(grid)) for e in (e1, e2, e3)]
    raw = np.fft.ifftn(F[0] * F[1] * np.conj(F[2])).real.reshape(-1)
    out = np.rint(raw)
    if np.max(np.abs(raw - out)) > 0.25:
        raise ArithmeticError("FFT rounding too coarse to certify integer counts")
    return out.astype(np.int64)


def triple_conv_range(group: GroupSpec, U1, U2, U3) -> tuple[Fraction, Fraction]:
    """Exact ``(min, max)`` over ``G`` of ``mu1 * mu2 * mu3^-`` for normalised indicators."""
    sizes = [len(set(int(u) for u in U)) for U in (U1, U2, U3)]
    if min(sizes) == 0:
        raise ValueError("normalised indicator of an empty set is undefined")
    c = triple_counts(group, U1, U2, U3)
    scale = Fraction(group.order, sizes[0] * sizes[1] * sizes[2])
    return scale * int(c.min()), scale * int(c.max())


def mu3_values(U: SubsetSample) -> tuple[np.ndarray, Fraction]:
    """Counts ``c`` and scale ``s`` with ``mu * mu * mu = s * c`` exactly."""
    if len(U) == 0:
        raise ValueError("empty set")
    g = U.group
    e = U.elements
    c = triple_counts(g, e, e, g.neg(e))
    return c, Fraction(g.order, len(U) ** 3)


def sup_mu3_deviation(U: SubsetSample) -> Fraction:
    """``max_x |mu * mu * mu (x) - 1|`` as an exact rational."""
    c, s = mu3_values(U)
    return max(abs(s * int(c.max()) - 1), abs(s * int(c.min()) - 1))


def character_twist(U: SubsetSample, phi, target: GroupSpec, t: int) -> np.ndarray:
    """``f_chi = mu * (chi_t o phi)``: zero off ``U``, ``n/|U| chi_t(phi(u))`` on it."""
    vals = _values(U, phi)
    g = U.group
    f = np.zeros(g.order, dtype=complex)
    f[U.elements] = g.order / len(U) * np.asarray(target.char_eval(t, vals))
    return f


def l12_fourier(U: SubsetSample, phi, target: GroupSpec, t: int) -> float:
    """``||f_chi^||_12^12`` with the counting norm on the dual group."""
    f = character_twist(U, phi, target, t)
    fhat = U.group.dft(f, fast=True)
    return float(np.sum(np.abs(fhat) ** 12))


def u2_energy(group: GroupSpec, f) -> float:
    """``||f^||_4^4``, equal to ``E_{x+y=z+w} f(x) f(y) conj(f(z) f(w))``."""
    fhat = group.dft(np.asarray(f, dtype=complex), fast=True)
    return lp_norm_hat(fhat, 4) ** 4


def additive_energy(A: SubsetSample) -> int:
    """``#{(a, b, c, d) in A^4 : a + b = c + d}``, degenerate tuples included."""
    e = A.elements
    r = np.bincount(A.group.add(e[:, None], e[None, :]).ravel(), minlength=A.group.order)
    return int(np.sum(r.astype(np.int64) ** 2))


@dataclass
class DiagnosticsReport:
    M_mu: float | None
    l12_by_character: dict[int, float]
    sup_mu3_minus_1: float
    max_pair_rep: int
    energy_ordered: int
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "M_mu": self.M_mu,
            "l12_by_character": {str(k): v for k, v in sorted(self.l12_by_character.items())},
            "sup_mu3_minus_1": self.sup_mu3_minus_1,
            "max_pair_rep": self.max_pair_rep,
            "energy_ordered": self.energy_ordered,
            "notes": list(self.notes),
        }


def diagnostics_report(A: SubsetSample, phi=None, target: GroupSpec | None = None,
                       characters=None) -> DiagnosticsReport:
    """Bundle the diagnostics for one set (and optionally one map on it)."""
    if len(A) == 0:
        raise ValueError("empty set")
    notes = []
    n = A.group.order
    mu = np.zeros(n)
    mu[A.elements] = n / len(A)
    orbits = pair_orbits(A)
    if len(orbits):
        M_mu = M_value_orbits(mu, A, orbits)
    else:
        M_mu = None
        notes.append("no non-degenerate quadruples; M undefined")
    l12 = {}
    if phi is not None:
        target = target or A.group
        for t in (characters if characters is not None else target.generators()):
            l12[int(t)] = l12_fourier(A, phi, target, int(t))
    return DiagnosticsReport(
        M_mu=M_mu,
        l12_by_character=l12,
        sup_mu3_minus_1=float(sup_mu3_deviation(A)),
        max_pair_rep=max_pair_representation(A.group, A.elements, A.elements),
        energy_ordered=additive_energy(A),
        notes=notes,
    )
