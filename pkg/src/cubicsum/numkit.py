"""Elementary numeric primitives shared across the package.

Rounding and sign conventions, unit phases with exact range reduction,
compensated summation, the symmetry reduction of a cubic phase, and a small
vectorised double-double kernel used wherever a phase argument is too large
for plain binary64 (``mu * n**3`` for large ``n``, saddle phases for tiny
``mu``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

TWO_PI = 2.0 * math.pi
TWO_PI_LO = 2.4492935982947064e-16  # 2*pi - TWO_PI
_SPLITTER = 134217729.0  # 2**27 + 1


@dataclass(frozen=True)
class CubicPhase:
    """Coefficients of ``f(x) = mu*x**3 + beta*x**2 + alpha*x``."""

    alpha: float
    beta: float
    mu: float

    def __post_init__(self):
        for name in ("alpha", "beta", "mu"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def f(self, x):
        return ((self.mu * x + self.beta) * x + self.alpha) * x

    def fprime(self, x):
        return (3.0 * self.mu * x + 2.0 * self.beta) * x + self.alpha


def nearest_int(x: float) -> int:
    """``[x] = floor(x + 1/2)``; half-integers round up."""
    if not math.isfinite(x):
        raise ValueError(f"nearest_int needs a finite argument, got {x!r}")
    # floor(x + 0.5) in floating point can misround just below a half-integer
    r = math.floor(x)
    return r + 1 if x - r >= 0.5 else r


def sign(x: float) -> int:
    return 1 if x >= 0 else -1


def frac_centered(x):
    """Reduce ``x`` modulo 1 into ``[-1/2, 1/2)``."""
    return x - np.floor(x + 0.5)


def unit_phase(x):
    """``e(x) = exp(2*pi*i*x)``, reducing ``x`` mod 1 before the trig call."""
    r = frac_centered(np.asarray(x, dtype=float))
    out = np.exp(1j * TWO_PI * r)
    return complex(out) if np.ndim(out) == 0 else out


def reduce_unit(x: float) -> float:
    """Reduce a real into ``[-1/2, 1/2)`` using the round-half-up tie-break."""
    return x - nearest_int(x)


def normalize(phase: CubicPhase) -> tuple[CubicPhase, bool]:
    """Map ``phase`` to an equivalent one with ``mu > 0`` and ``alpha, beta`` in ``[-1/2, 1/2)``.

    Returns the reduced phase and a flag; when the flag is set, sums over the
    original phase are the complex conjugates of sums over the returned one.
    Only ``alpha`` and ``beta`` are reduced: ``mu`` multiplies ``n**3`` and is
    kept as given (up to sign) so that the cubic scale is preserved.
    """
    if phase.mu == 0:
        raise ValueError("mu = 0 reduces to a quadratic sum, which is not handled here")
    alpha, beta, mu = phase.alpha, phase.beta, phase.mu
    conjugated = mu < 0
    if conjugated:
        alpha, beta, mu = -alpha, -beta, -mu
    return CubicPhase(reduce_unit(alpha), reduce_unit(beta), mu), conjugated


def compensated_sum(terms: Iterable[complex]) -> complex:
    """Sum complex terms with correctly rounded real and imaginary parts."""
    arr = np.asarray(list(terms) if not isinstance(terms, np.ndarray) else terms, dtype=complex)
    if arr.size == 0:
        return 0j
    return complex(math.fsum(arr.real.tolist()), math.fsum(arr.imag.tolist()))


# ---------------------------------------------------------------------------
# double-double kernel (vectorised; numpy float64 arrays or scalars)
# ---------------------------------------------------------------------------

def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ahi, alo = _split(a)
    bhi, blo = _split(b)
    err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, err


def dd_add(ahi, alo, bhi, blo):
    s, e = two_sum(ahi, bhi)
    t, f = two_sum(alo, blo)
    e = e + t
    s, e = two_sum(s, e)
    e = e + f
    return two_sum(s, e)


def dd_mul(ahi, alo, bhi, blo):
    p, e = two_prod(ahi, bhi)
    e = e + (ahi * blo + alo * bhi)
    return two_sum(p, e)


def dd_mul_d(ahi, alo, b):
    p, e = two_prod(ahi, b)
    e = e + alo * b
    return two_sum(p, e)


def dd_div_int(num, den):
    """Double-double quotient of two integers (exact below 2**53)."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    hi = num / den
    p, e = two_prod(hi, den)
    lo = ((num - p) - e) / den
    return two_sum(hi, lo)


def dd_frac(hi, lo):
    """Fractional part in ``[-1/2, 1/2)`` of a double-double, as a double."""
    k = np.floor(hi + 0.5)
    return frac_centered((hi - k) + lo)


def poly_phase_frac(x, c1_hi, c1_lo, c2, c3):
    """``c3*x**3 + c2*x**2 + c1*x`` modulo 1, evaluated by double-double Horner.

    ``x``, ``c2``, ``c3`` are doubles; the linear coefficient is given as a
    double-double pair so that rational shifts such as ``alpha - m/(2q)``
    survive without rounding.
    """
    hi, lo = two_prod(np.asarray(c3, float), np.asarray(x, float))
    hi, lo = dd_add(hi, lo, np.asarray(c2, float), 0.0)
    hi, lo = dd_mul_d(hi, lo, x)
    hi, lo = dd_add(hi, lo, c1_hi, c1_lo)
    hi, lo = dd_mul_d(hi, lo, x)
    return dd_frac(hi, lo)


def poly_derivs_dd(x, c1_hi, c1_lo, c2, c3):
    """First derivative and half the second derivative of the cubic at ``x``.

    Both suffer cancellation near critical and inflection points, so they
    are formed in double-double before rounding.
    """
    x = np.asarray(x, float)
    # P' = (3 c3 x + 2 c2) x + c1
    hi, lo = two_prod(3.0 * np.asarray(c3, float), x)
    hi, lo = dd_add(hi, lo, 2.0 * np.asarray(c2, float), 0.0)
    hi, lo = dd_mul_d(hi, lo, x)
    hi, lo = dd_add(hi, lo, c1_hi, c1_lo)
    d1 = hi + lo
    h2, l2 = two_prod(3.0 * np.asarray(c3, float), x)
    h2, l2 = dd_add(h2, l2, np.asarray(c2, float), 0.0)
    return d1, h2 + l2


def unit_phase_dd(x):
    """``e(x)`` for ``|x| <= 1/2`` with ``2*pi*x`` formed in double-double.

    Rounding ``2*pi`` itself biases every angle by the same relative amount;
    in long sums with slowly varying phase that bias adds up coherently, so
    the oracle routes use this variant.
    """
    x = np.asarray(x, dtype=float)
    hi, lo = two_prod(TWO_PI, x)
    lo = lo + TWO_PI_LO * x
    th, tl = two_sum(hi, lo)
    return np.exp(1j * th) * (1.0 + 1j * tl)
