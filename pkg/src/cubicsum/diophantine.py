"""Rational approximations to the linear and quadratic coefficients."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .numkit import nearest_int, reduce_unit


@dataclass(frozen=True)
class QuadApprox:
    """``2*beta = b/q + 2*eta`` with ``gcd(b, q) = 1``."""

    b: int
    q: int
    eta: float


@dataclass(frozen=True)
class LinApprox:
    """``2*alpha = a/q + 2*eps``."""

    a: int
    eps: float


def convergents(x: float, q_max: int) -> list[tuple[int, int]]:
    """Continued-fraction convergents ``p/q`` of ``x`` with ``q <= q_max``.

    The expansion is carried out in exact rational arithmetic on the binary
    value of ``x``, so it terminates for every finite float.
    """
    if not math.isfinite(x):
        raise ValueError("x must be finite")
    if q_max < 1:
        raise ValueError("q_max must be >= 1")
    r = Fraction(x)
    out = []
    p0, q0, p1, q1 = 0, 1, 1, 0
    while True:
        a = math.floor(r)
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        if q1 > q_max:
            break
        if out and out[-1][1] == q1:
            out[-1] = (p1, q1)  # a leading partial quotient of 1 repeats q = 1
        else:
            out.append((p1, q1))
        frac = r - a
        if frac == 0:
            break
        r = 1 / frac
    return out


def approx_beta(beta: float, N: int, q_cap: int | None = None) -> QuadApprox:
    """Dirichlet approximation of ``2*beta`` with denominator at most ``4N``.

    Takes the convergent of largest admissible denominator; ``q_cap`` lowers
    the denominator bound (the resulting ``eta`` is then only guaranteed to
    satisfy ``|eta| <= 1/(2 q q_cap)``).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    qmax = 4 * N if q_cap is None else min(4 * N, q_cap)
    beta = reduce_unit(beta)
    convs = convergents(2.0 * beta, qmax)
    b, q = convs[-1]
    eta = float((Fraction(beta) - Fraction(b, 2 * q)))
    if q_cap is None:
        assert abs(eta) <= 1.0 / (8 * q * N) * (1 + 1e-12), "Dirichlet bound violated"
    assert math.gcd(b, q) == 1
    return QuadApprox(b, q, eta)


def approx_alpha(alpha: float, q: int) -> LinApprox:
    """``a = [2*alpha*q]`` so that ``-1/(4q) <= eps < 1/(4q)``."""
    a = nearest_int(2.0 * alpha * q)
    exact = Fraction(alpha)
    width = Fraction(1, 4 * q)
    # the float product 2*alpha*q may round across a tie; settle it exactly
    while exact - Fraction(a, 2 * q) >= width:
        a += 1
    while exact - Fraction(a, 2 * q) < -width:
        a -= 1
    return LinApprox(a, float(exact - Fraction(a, 2 * q)))
