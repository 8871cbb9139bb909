"""Arithmetic factors: complete Gauss sums, parity data and the ``b*`` twist.

All Gauss sums are evaluated by direct summation over ``h mod 2q`` with the
rational phase reduced in integer arithmetic, so they double as their own
ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .numkit import unit_phase


class FrameError(ValueError):
    """Raised when a rational frame is inconsistent or a convention check fails."""


@dataclass(frozen=True)
class GaussValue:
    """A normalised Gauss sum; ``|value|`` is 0 or 1."""

    value: complex

    def __complex__(self):
        return complex(self.value)

    def __abs__(self):
        return abs(self.value)


def _rational_phase_sum(a: int, b: int, q: int) -> complex:
    h = np.arange(2 * q, dtype=np.int64)
    num = (a * h + b * (h * h % (4 * q))) % (2 * q)
    return complex(np.exp(1j * np.pi * num / q).sum())


def _G(a: int, b: int, q: int) -> complex:
    if q < 1:
        raise ValueError("q must be positive")
    if math.gcd(b, q) != 1:
        raise ValueError(f"gcd(b, q) must be 1, got b={b}, q={q}")
    return _rational_phase_sum(a % (2 * q), b % (2 * q), q) / (2.0 * math.sqrt(q))


def gauss_G(a: int, b: int, q: int) -> GaussValue:
    """``G(a,b;2q) = (1/(2 sqrt q)) sum_{h<2q} e((a h + b h^2)/(2q))``."""
    return GaussValue(_G(a, b, q))


def gauss_g(b: int, q: int) -> GaussValue:
    """``g(b, q) = G(0, b; 2q)``; modulus 1 when ``bq`` is even, else 0."""
    return gauss_G(0, b, q)


def _bstar_candidates(b: int, q: int):
    binv = pow(b % q, -1, q) if q > 1 else 0
    for j in range(8):
        lift = binv + j * q
        if q % 2 == 1 and lift % 4 != 0:
            continue
        yield (-b * lift * lift) % (8 * q)


def all_shifts_G(b: int, q: int) -> np.ndarray:
    """``G(c, b; 2q)`` for every ``c`` in ``0..2q-1`` at once (one length-2q DFT)."""
    h = np.arange(2 * q, dtype=np.int64)
    seq = np.exp(1j * np.pi * ((b % (2 * q)) * (h * h % (4 * q)) % (2 * q)) / q)
    return np.fft.ifft(seq) * (2 * q) / (2.0 * math.sqrt(q))


def _identity_error(a: int, b: int, q: int, bstar: int) -> float:
    delta = (b * q) % 2
    g0 = _G(0, b + delta * q, q)
    m = np.arange(2 * q, dtype=np.int64)
    lhs = all_shifts_G(b, q)[(a + m) % (2 * q)]
    c = (a + m) % (8 * q)
    rhs = unit_phase((bstar * (c * c % (8 * q)) % (8 * q)) / (8.0 * q)) * g0
    rhs = np.where((b * q + a + m) % 2 == 0, rhs, 0.0)
    return float(np.max(np.abs(lhs - rhs)))


@lru_cache(maxsize=4096)
def b_star(b: int, q: int) -> int:
    """``b* = -b * bbar**2 (mod 8q)`` with the lift of ``b^-1 mod q`` validated.

    Every admissible lift (``4 | bbar`` when ``q`` is odd) is tried against
    the Gauss-sum shift identity for both parities of ``a``; the first one
    that holds for all residues is returned.
    """
    if math.gcd(b, q) != 1:
        raise ValueError(f"gcd(b, q) must be 1, got b={b}, q={q}")
    tried = []
    for cand in _bstar_candidates(b, q):
        if cand in tried:
            continue
        tried.append(cand)
        if max(_identity_error(a, b, q, cand) for a in (0, 1)) < 1e-9:
            return cand
    raise FrameError(f"no lift of 1/b mod q satisfies the shift identity (b={b}, q={q}, tried {tried})")


@dataclass(frozen=True)
class RationalFrame:
    """Rational data ``(a, b, q)`` with derived parity flags and ``b*``."""

    a: int
    b: int
    q: int
    delta: int = field(init=False)
    delta1: int = field(init=False)
    b_star: int = field(init=False)
    g0: complex = field(init=False, repr=False)

    def __post_init__(self):
        if self.q < 1:
            raise FrameError("q must be positive")
        if math.gcd(self.b, self.q) != 1:
            raise FrameError(f"gcd(b, q) must be 1, got b={self.b}, q={self.q}")
        object.__setattr__(self, "delta", (self.b * self.q) % 2)
        object.__setattr__(self, "delta1", (self.b * self.q + self.a) % 2)
        object.__setattr__(self, "b_star", b_star(self.b, self.q))
        object.__setattr__(self, "g0", _G(0, self.b + self.delta * self.q, self.q))

    def g_phase_num(self, m):
        """Integer numerator of ``g(m)`` reduced mod ``8q``."""
        c = (np.asarray(m, dtype=np.int64) + self.a) % (8 * self.q)
        return (self.b_star * (c * c % (8 * self.q))) % (8 * self.q)

    def twist(self, m):
        """``e(g(m)) * 1_{m in E}`` (vectorised over integer ``m``)."""
        m = np.asarray(m, dtype=np.int64)
        val = unit_phase(self.g_phase_num(m) / (8.0 * self.q))
        return np.where(in_E(m, self), val, 0.0)


def in_E(m, frame: RationalFrame):
    """``b q + a + m`` even."""
    return (np.asarray(m, dtype=np.int64) + frame.b * frame.q + frame.a) % 2 == 0


def g_phase(m: int, frame: RationalFrame) -> float:
    """``g(m) = b*(a+m)^2/(8q)`` reduced mod 1 into ``[0, 1)``."""
    return float(frame.g_phase_num(m)) / (8 * frame.q)


def arithmetic_factor_D(frame: RationalFrame, ell: int) -> complex:
    """``D_l = 1_{l = delta1 mod 2} * g(b + delta q, q)/sqrt(q) * e(b*(a+l)^2/(8q))``."""
    if (ell - frame.delta1) % 2 != 0:
        return 0j
    return frame.g0 / math.sqrt(frame.q) * unit_phase(g_phase(ell, frame))
