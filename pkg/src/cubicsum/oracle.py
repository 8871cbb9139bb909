"""Brute-force ground truth.

Two independent routes evaluate every sum term by term:

``compensated64``
    each monomial ``alpha*n``, ``beta*n^2``, ``mu*n^3`` is formed exactly as
    a double-double, reduced mod 1, and the unit phases are accumulated with
    :func:`math.fsum` in fixed-size chunks (deterministic merge order).
``extended``
    the coefficients are converted to exact dyadic rationals and the whole
    phase numerator is reduced mod its denominator in integer arithmetic;
    unit phases and their sum are then formed by :mod:`mpmath` at 30 digits.
    Roughly 10 microseconds per term, so meant for ``N`` up to about ``1e6``.

Also here: real-axis reference quadrature for cubic phases and an Airy
function reference built on :mod:`mpmath`, both used only as test oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .gauss import FrameError
from .numkit import (
    CubicPhase,
    TWO_PI,
    dd_add,
    dd_div_int,
    dd_frac,
    dd_mul_d,
    frac_centered,
    unit_phase_dd,
    poly_derivs_dd,
    poly_phase_frac,
    two_prod,
)

CHUNK = 1 << 20
_EPS = np.finfo(float).eps
PRECISIONS = ("compensated64", "extended")


@dataclass(frozen=True)
class OracleValue:
    value: complex
    precision_tag: str
    est_err: float

    def __complex__(self):
        return complex(self.value)


def _monomial_frac(coef: float, n_hi, n_lo):
    """``coef * n`` mod 1 where ``n`` is the double-double ``(n_hi, n_lo)``."""
    hi, lo = dd_mul_d(n_hi, n_lo, coef)
    return dd_frac(hi, lo)


def _phases64(n: np.ndarray, a: int, b: int, q: int, phase: CubicPhase) -> np.ndarray:
    """Phase of every term mod 1, per-monomial double-double route."""
    ni = n.astype(np.int64)
    rat = (a % (2 * q) * ni + b % (2 * q) * (ni * ni % (4 * q))) % (2 * q)
    rh, rl = dd_div_int(rat, 2 * q)
    nf = n.astype(float)
    n2 = nf * nf  # exact below 2**26.5 ... checked by caller
    n3h, n3l = two_prod(n2, nf)
    total = dd_frac(rh, rl)
    total = total + _monomial_frac(phase.alpha, nf, 0.0)
    total = total + _monomial_frac(phase.beta, n2, 0.0)
    total = total + _monomial_frac(phase.mu, n3h, n3l)
    return frac_centered(total)


def _sum_compensated(N: int, a: int, b: int, q: int, phase: CubicPhase, weights=None) -> OracleValue:
    if N >= 94_906_265:
        raise ValueError("N too large for the exact n^2 representation")
    parts_re, parts_im = [], []
    for start in range(0, N + 1, CHUNK):
        n = np.arange(start, min(N + 1, start + CHUNK))
        terms = unit_phase_dd(_phases64(n, a, b, q, phase))
        if weights is not None:
            terms = terms * weights(n)
        parts_re.append(math.fsum(terms.real.tolist()))
        parts_im.append(math.fsum(terms.imag.tolist()))
    value = complex(math.fsum(parts_re), math.fsum(parts_im))
    scale = max(abs(phase.alpha) * N, abs(phase.beta) * N ** 2, abs(phase.mu) * float(N) ** 3, 1.0)
    per_term = TWO_PI * (4 * _EPS + 2.0 ** -100 * scale) + 2 * _EPS
    return OracleValue(value, "compensated64", float((N + 1) * per_term))


def _dyadic(x: float) -> tuple[int, int]:
    fr = Fraction(x)
    return fr.numerator, fr.denominator


def _sum_extended(N: int, a: int, b: int, q: int, phase: CubicPhase, weights=None) -> OracleValue:
    (A, DA), (B, DB), (C, DC) = (_dyadic(phase.alpha), _dyadic(phase.beta), _dyadic(phase.mu))
    D = max(DA, DB, DC)  # all powers of two
    A, B, C = A * (D // DA), B * (D // DB), C * (D // DC)
    mod = 2 * q * D
    parts = []
    for start in range(0, N + 1, CHUNK):
        n = np.arange(start, min(N + 1, start + CHUNK), dtype=np.int64).astype(object)
        n2 = n * n
        num = ((a * n + b * n2) * D + (A * n + B * n2 + C * (n2 * n)) * (2 * q)) % mod
        w = np.ones(len(n)) if weights is None else weights(n.astype(np.int64))
        with mpmath.workdps(30):
            m = mpmath.mpf(mod)
            parts.append(mpmath.fsum(mpmath.expjpi(2 * mpmath.mpf(int(k)) / m) * float(wt)
                                     for k, wt in zip(num, w)))
    with mpmath.workdps(30):
        value = complex(mpmath.fsum(parts))
    return OracleValue(value, "extended", float((N + 1) * 1e-28 + 2 * _EPS * abs(value)))


def _dispatch(N, a, b, q, phase, precision, weights=None):
    if precision == "compensated64":
        return _sum_compensated(N, a, b, q, phase, weights)
    if precision == "extended":
        return _sum_extended(N, a, b, q, phase, weights)
    raise ValueError(f"precision must be one of {PRECISIONS}")


def direct_C(N: int, a: int, b: int, q: int, phase: CubicPhase, precision: str = "compensated64") -> OracleValue:
    """``sum_{n=0}^N e((a n + b n^2)/(2q)) e(f(n))``."""
    if q < 1 or math.gcd(b, q) != 1:
        raise FrameError(f"need q >= 1 and gcd(b, q) = 1 (b={b}, q={q})")
    if N < 0:
        raise ValueError("N must be >= 0")
    return _dispatch(N, a, b, q, phase, precision)


def direct_H(alpha: float, beta: float, mu: float, N: int, precision: str = "compensated64") -> OracleValue:
    """``H_N(alpha, beta, mu)``; for negative ``N`` the range is ``N <= n <= 0``."""
    if N < 0:
        # n -> -n turns the range into 0..|N| with odd coefficients negated
        return _dispatch(-N, 0, 0, 1, CubicPhase(-alpha, beta, -mu), precision)
    return _dispatch(N, 0, 0, 1, CubicPhase(alpha, beta, mu), precision)


def direct_C_primed(N: int, a: int, b: int, q: int, mu: float, precision: str = "compensated64") -> OracleValue:
    """Like :func:`direct_C` with ``alpha = beta = 0`` and the ``n = 0``, ``n = N`` terms halved.

    For ``N = 0`` the lone term is weighted ``1/2`` once.
    """
    if q < 1 or math.gcd(b, q) != 1:
        raise FrameError(f"need q >= 1 and gcd(b, q) = 1 (b={b}, q={q})")
    if N < 0:
        raise ValueError("N must be >= 0")

    def half_ends(n):
        return np.where((n == 0) | (n == N), 0.5, 1.0)

    return _dispatch(N, a, b, q, CubicPhase(0.0, 0.0, mu), precision, half_ends)


def direct_terms(N: int, phase: CubicPhase, a: int = 0, b: int = 0, q: int = 1) -> np.ndarray:
    """All terms ``e((an+bn^2)/2q + f(n))`` for ``0 <= n <= N`` as an array."""
    n = np.arange(N + 1)
    return unit_phase_dd(_phases64(n, a, b, q, phase))


def direct_Hmax(alpha: float, beta: float, mu: float, N: int) -> float:
    """``max_{0 <= N1 <= N} |sum_{n=N1}^N e(alpha n + beta n^2 + mu n^3)|`` by one reverse pass."""
    if N < 0:
        raise ValueError("N must be >= 0")
    terms = direct_terms(N, CubicPhase(alpha, beta, mu))
    tails = np.cumsum(terms[::-1])
    return float(np.max(np.abs(tails)))


def brute_Hmax(alpha: float, beta: float, mu: float, N: int) -> float:
    """Quadratic-time definition of :func:`direct_Hmax`, for cross-checks."""
    terms = direct_terms(N, CubicPhase(alpha, beta, mu))
    return max(abs(math.fsum(terms[k:].real) + 1j * math.fsum(terms[k:].imag)) for k in range(N + 1))


# ---------------------------------------------------------------------------
# integral references
# ---------------------------------------------------------------------------

_RX20, _RW20 = np.polynomial.legendre.leggauss(20)
_RX30, _RW30 = np.polynomial.legendre.leggauss(30)


def reference_integral(c1: float, c2: float, c3: float, lo: float, hi: float, max_panels: int = 2_000_000):
    """``int_lo^hi e(c3 t^3 + c2 t^2 + c1 t) dt`` straight along the real axis.

    Panels are marched with length ``1/(4 (1 + |P'(t)|))`` (capped so that
    the cubic term changes by at most a quarter turn) and integrated with
    30-point Gauss-Legendre; the 20-point rule supplies the error estimate.
    Returns ``(value, error_estimate)``.  Independent of the contour engine
    in :mod:`cubicsum.airy`; meant for moderate oscillation counts.
    """
    sign = 1.0
    if hi < lo:
        lo, hi, sign = hi, lo, -1.0
    edges = [lo]
    t = lo
    cap = 0.25 * max(abs(c3), 1e-300) ** (-1.0 / 3.0)
    while t < hi:
        d = abs((3 * c3 * t + 2 * c2) * t + c1)
        t = min(hi, t + min(cap, 0.25 / (1.0 + d)))
        edges.append(t)
        if len(edges) > max_panels:
            raise RuntimeError("reference quadrature: too many panels")
    e = np.array(edges)
    a, b = e[:-1], e[1:]
    half, mid = 0.5 * (b - a), 0.5 * (b + a)

    def rule(x, w):
        tt = mid[:, None] + half[:, None] * x[None, :]
        ph = poly_phase_frac(tt, c1, 0.0, c2, c3)
        return (np.exp((1j * TWO_PI) * ph) @ w) * half

    g30, g20 = rule(_RX30, _RW30), rule(_RX20, _RW20)
    val = complex(math.fsum(g30.real) + 1j * math.fsum(g30.imag))
    err = float(np.sum(np.abs(g30 - g20))) + 1e-15 * float(np.sum(np.abs(half)))
    return sign * val, err


def airy_reference(mu: float, s: float, dps: int = 40) -> float:
    """Full-line ``int e(mu t^3 - 3 s t) dt`` through the classical Airy function.

    The substitution ``t = (6 pi mu)^{-1/3} u`` gives
    ``2 pi (6 pi mu)^{-1/3} Ai(-(6 pi)^{2/3} s / mu^{1/3})``.
    """
    with mpmath.workdps(dps):
        mu_, s_ = mpmath.mpf(mu), mpmath.mpf(s)
        k = (6 * mpmath.pi * mu_) ** (-mpmath.mpf(1) / 3)
        return float(2 * mpmath.pi * k * mpmath.airyai(-6 * mpmath.pi * s_ * k))


def hi_complete_reference(mu: float, s: float, dps: int = 40) -> complex:
    """``int_0^inf e(mu t^3 - 3 s t) dt`` through the Airy and Scorer functions.

    With the same substitution as :func:`airy_reference`, the cosine and
    sine halves of the half-line integral are ``pi Ai(x)`` and ``pi Gi(x)``.
    """
    with mpmath.workdps(dps):
        mu_, s_ = mpmath.mpf(mu), mpmath.mpf(s)
        k = (6 * mpmath.pi * mu_) ** (-mpmath.mpf(1) / 3)
        x = -6 * mpmath.pi * s_ * k
        return complex(mpmath.pi * k * mpmath.mpc(mpmath.airyai(x), mpmath.scorergi(x)))
