import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cubicsum.diophantine import approx_alpha, approx_beta, convergents


def test_convergents_examples():
    assert convergents(0.5, 10) == [(0, 1), (1, 2)]
    assert convergents(0.0, 5) == [(0, 1)]
    golden = (1 + math.sqrt(5)) / 2
    assert convergents(golden, 8) == [(2, 1), (3, 2), (5, 3), (8, 5), (13, 8)]


def _best_approximations(x, qmax):
    """Brute force: denominators where the best |qx - p| improves."""
    out, best = [], math.inf
    for q in range(1, qmax + 1):
        p = round(x * q)
        d = abs(q * x - p)
        if d < best - 1e-15:
            best = d
            out.append((p, q))
    return out


def test_convergents_are_best_approximations():
    golden = (1 + math.sqrt(5)) / 2
    # every convergent is a best approximation of the second kind
    best = set(_best_approximations(golden, 200))
    assert set(convergents(golden, 200)) <= best


def test_convergents_validation():
    with pytest.raises(ValueError):
        convergents(float("nan"), 3)
    with pytest.raises(ValueError):
        convergents(0.3, 0)


@pytest.mark.parametrize("beta, N, b, q", [(0.25, 10, 1, 2), (0.0, 17, 0, 1)])
def test_approx_beta_examples(beta, N, b, q):
    r = approx_beta(beta, N)
    assert (r.b, r.q, r.eta) == (b, q, 0.0)


def test_approx_beta_inverse_sqrt2_exhaustive():
    beta, N = 1 / math.sqrt(2) - 1, 100  # reduced into [-1/2, 1/2)
    r = approx_beta(1 / math.sqrt(2), N)
    assert r.q <= 4 * N
    two_beta = Fraction(beta) * 2
    assert abs(two_beta - Fraction(r.b, r.q)) <= Fraction(1, 400 * r.q)
    # no denominator up to 4N does better than the chosen convergent by the Dirichlet bound
    for q in range(1, 4 * N + 1):
        p = round(float(two_beta) * q)
        if abs(two_beta - Fraction(p, q)) < abs(two_beta - Fraction(r.b, r.q)):
            assert q > r.q  # better approximations need larger q, which the bound excludes
            assert False, f"q={q} beats the chosen convergent"


@given(st.floats(-0.5, 0.5, exclude_max=True), st.integers(10, 10_000))
def test_approx_beta_contract(beta, N):
    r = approx_beta(beta, N)
    assert 0 < r.q <= 4 * N
    assert math.gcd(r.b, r.q) == 1
    assert abs(r.eta) <= 1 / (8 * r.q * N) * (1 + 1e-12)
    assert Fraction(r.b, 2 * r.q) + Fraction(r.eta) == pytest.approx(Fraction(beta), abs=1e-18)


def test_approx_beta_reduces_first():
    assert approx_beta(1.25, 10) == approx_beta(0.25, 10)


def test_approx_beta_q_cap():
    r = approx_beta(1 / math.sqrt(2), 1000, q_cap=12)
    assert r.q <= 12


@pytest.mark.parametrize("alpha, q, a, eps", [(0.0, 3, 0, 0.0), (0.3, 5, 3, 0.0), (0.26, 2, 1, 0.01)])
def test_approx_alpha_examples(alpha, q, a, eps):
    r = approx_alpha(alpha, q)
    assert r.a == a
    assert r.eps == pytest.approx(eps, abs=1e-15)


@given(st.floats(-2, 2), st.integers(1, 500))
def test_approx_alpha_window(alpha, q):
    r = approx_alpha(alpha, q)
    eps = Fraction(alpha) - Fraction(r.a, 2 * q)
    assert -Fraction(1, 4 * q) <= eps < Fraction(1, 4 * q)


def test_approx_alpha_half_open_tie():
    # alpha - a/(2q) exactly -1/(4q) stays, exactly +1/(4q) moves up (round half up)
    q = 4
    assert approx_alpha(1 / 16, q).a == 1  # 2*alpha*q = 0.5 rounds up
    assert approx_alpha(1 / 16, q).eps == -1 / 16
