"""Finite Abelian groups given by lists of cyclic factors.

Elements are plain integers in ``[0, n)`` using a mixed-radix encoding with the
first factor as the least significant digit, so ``Z_2 x Z_3`` element
``(x_1, x_2)`` has index ``x_1 + 2 * x_2``.  Characters are indexed the same
way: the character with index ``t`` is ``x -> exp(2 pi i sum_j t_j x_j / d_j)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class GroupSpec:
    """A finite Abelian group ``Z_{d_1} x ... x Z_{d_k}``.

    Arithmetic methods accept Python ints or integer numpy arrays and
    broadcast like numpy ufuncs.
    """

    factors: tuple[int, ...]

    def __post_init__(self):
        factors = tuple(int(d) for d in self.factors)
        if not factors:
            raise ValueError("a group needs at least one factor")
        if factors != (1,) and any(d < 2 for d in factors):
            raise ValueError(f"cyclic factors must be >= 2 (or the single factor 1), got {factors}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def parse(cls, text: str) -> "GroupSpec":
        """Parse ``"101"`` or ``"4,9"``."""
        try:
            factors = tuple(int(tok) for tok in str(text).replace(" ", "").split(","))
        except ValueError:
            raise ValueError(f"malformed group spec {text!r}") from None
        return cls(factors)

    @classmethod
    def cyclic(cls, n: int) -> "GroupSpec":
        return cls((int(n),))

    def __str__(self):
        return ",".join(str(d) for d in self.factors)

    @cached_property
    def order(self) -> int:
        return math.prod(self.factors)

    @property
    def rank(self) -> int:
        return len(self.factors)

    @property
    def is_cyclic_spec(self) -> bool:
        return len(self.factors) == 1

    @cached_property
    def exponent(self) -> int:
        return math.lcm(*self.factors)

    @cached_property
    def _strides(self) -> np.ndarray:
        strides = [1]
        for d in self.factors[:-1]:
            strides.append(strides[-1] * d)
        return np.array(strides, dtype=np.int64)

    @cached_property
    def _factor_array(self) -> np.ndarray:
        return np.array(self.factors, dtype=np.int64)

    # -- encoding -----------------------------------------------------------

    def check(self, x):
        """Raise ``IndexError`` unless every index in ``x`` lies in ``[0, n)``."""
        arr = np.asarray(x)
        if arr.size and (arr.min() < 0 or arr.max() >= self.order):
            raise IndexError(f"element index out of range for group of order {self.order}")
        return x

    def decode(self, x) -> np.ndarray:
        """Coordinates of ``x``; shape ``x.shape + (k,)``."""
        x = np.asarray(x, dtype=np.int64)
        return (x[..., None] // self._strides) % self._factor_array

    def encode(self, coords) -> np.ndarray | int:
        coords = np.asarray(coords, dtype=np.int64) % self._factor_array
        out = (coords * self._strides).sum(axis=-1)
        return int(out) if out.ndim == 0 else out

    def generators(self) -> list[int]:
        """Index of the unit vector of each cyclic factor."""
        return [int(s) for s in self._strides]

    # -- arithmetic ---------------------------------------------------------

    def _wrap(self, out, *inputs):
        if all(np.ndim(a) == 0 for a in inputs):
            return int(out)
        return out

    def add(self, a, b):
        if self.is_cyclic_spec:
            out = (np.asarray(a, dtype=np.int64) + np.asarray(b, dtype=np.int64)) % self.order
        else:
            out = self.encode(self.decode(a) + self.decode(b))
        return self._wrap(out, a, b)

    def neg(self, a):
        if self.is_cyclic_spec:
            out = (-np.asarray(a, dtype=np.int64)) % self.order
        else:
            out = self.encode(-self.decode(a))
        return self._wrap(out, a)

    def sub(self, a, b):
        if self.is_cyclic_spec:
            out = (np.asarray(a, dtype=np.int64) - np.asarray(b, dtype=np.int64)) % self.order
        else:
            out = self.encode(self.decode(a) - self.decode(b))
        return self._wrap(out, a, b)

    def mul(self, c, a):
        """The integer multiple ``c * a``."""
        if self.is_cyclic_spec:
            out = (np.asarray(c, dtype=np.int64) * np.asarray(a, dtype=np.int64)) % self.order
        else:
            out = self.encode(np.asarray(c, dtype=np.int64)[..., None] * self.decode(a))
        return self._wrap(out, c, a)

    def elements(self) -> np.ndarray:
        return np.arange(self.order, dtype=np.int64)

    # -- characters and Fourier analysis -------------------------------------

    def _phase_numerator(self, t, x):
        # exact phase as an integer numerator over the exponent
        scale = self.exponent // self._factor_array
        prod = (self.decode(t) * self.decode(x)) % self._factor_array
        return (prod * scale).sum(axis=-1) % self.exponent

    def char_eval(self, t, x):
        """Value of the character with index ``t`` at ``x``."""
        self.check(t)
        self.check(x)
        num = self._phase_numerator(t, x)
        out = np.exp(2j * np.pi * num / self.exponent)
        if np.ndim(t) == 0 and np.ndim(x) == 0:
            return complex(out)
        return out

    def character_matrix(self) -> np.ndarray:
        """``X[t, x] = chi_t(x)`` for all characters and elements."""
        idx = self.elements()
        return self.char_eval(idx[:, None], idx[None, :])

    def _as_grid(self, f):
        return np.asarray(f).reshape(self.factors[::-1])

    def dft(self, f, fast: bool = False) -> np.ndarray:
        """``fhat(t) = E_x f(x) conj(chi_t(x))``.

        The default is direct ``O(n^2)`` evaluation; ``fast=True`` uses one FFT
        per cyclic factor.
        """
        f = np.asarray(f, dtype=complex)
        if f.shape != (self.order,):
            raise ValueError(f"expected a function on {self.order} elements, got shape {f.shape}")
        if fast:
            return np.fft.fftn(self._as_grid(f)).reshape(-1) / self.order
        return self.character_matrix().conj() @ f / self.order

    def idft(self, fhat, fast: bool = False) -> np.ndarray:
        """``f(x) = sum_t fhat(t) chi_t(x)``."""
        fhat = np.asarray(fhat, dtype=complex)
        if fhat.shape != (self.order,):
            raise ValueError(f"expected {self.order} Fourier coefficients, got shape {fhat.shape}")
        if fast:
            return np.fft.ifftn(self._as_grid(fhat)).reshape(-1) * self.order
        return self.character_matrix().T @ fhat

    def convolve(self, f, g) -> np.ndarray:
        """``(f * g)(x) = E_{y+z=x} f(y) g(z)``, computed through the DFT."""
        fh = self.dft(f, fast=True)
        gh = self.dft(g, fast=True)
        return self.idft(fh * gh, fast=True)

    def reflect(self, f) -> np.ndarray:
        """``x -> f(-x)``."""
        f = np.asarray(f)
        return f[self.neg(self.elements())]


def lp_norm(f, p: float) -> float:
    """Expectation-normalised norm ``(E_x |f(x)|^p)^(1/p)`` on the group side."""
    return float(np.mean(np.abs(f) ** p) ** (1.0 / p))


def lp_norm_hat(fhat, p: float) -> float:
    """Counting-normalised norm ``(sum_t |fhat(t)|^p)^(1/p)`` on the dual side."""
    return float(np.sum(np.abs(fhat) ** p) ** (1.0 / p))
