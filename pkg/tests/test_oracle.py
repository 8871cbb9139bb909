import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from cubicsum import oracle
from cubicsum.gauss import FrameError
from cubicsum.numkit import CubicPhase

coef = st.floats(-0.5, 0.5)
small_mu = st.floats(-1e-5, 1e-5)


def naive_H(alpha, beta, mu, N):
    """Term-by-term mpmath sum straight from the definition (40 digits)."""
    with mpmath.workdps(40):
        a, b, m = mpmath.mpf(alpha), mpmath.mpf(beta), mpmath.mpf(mu)
        rng = range(0, N + 1) if N >= 0 else range(N, 1)
        return complex(mpmath.fsum(mpmath.expjpi(2 * (a * n + b * n * n + m * n ** 3)) for n in rng))


def test_direct_H_trivial():
    assert oracle.direct_H(0.3, 0.1, 1e-4, 0).value == 1
    assert oracle.direct_H(0.0, 0.0, 0.0, 2).value == 3


@given(coef, coef, small_mu, st.integers(-400, 400))
def test_direct_H_against_naive(alpha, beta, mu, N):
    assert abs(oracle.direct_H(alpha, beta, mu, N).value - naive_H(alpha, beta, mu, N)) < 1e-12


@pytest.mark.parametrize("case", range(100))
def test_direct_H_conjugation(case):
    rng = np.random.default_rng([case, 51])
    alpha, beta, mu = rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1e-6, 1e-6)
    N = int(rng.integers(0, 3000))
    lhs = oracle.direct_H(alpha, beta, mu, N).value
    rhs = oracle.direct_H(-alpha, -beta, -mu, N).value.conjugate()
    assert abs(lhs - rhs) < 1e-14 * max(1, N)


def test_direct_C_collapses_to_H():
    ph = CubicPhase(0.12, -0.03, 3e-7)
    assert abs(oracle.direct_C(500, 0, 0, 1, ph).value - oracle.direct_H(0.12, -0.03, 3e-7, 500).value) < 1e-13
    assert oracle.direct_C(0, 3, 5, 7, ph).value == 1


def test_direct_C_validation():
    with pytest.raises(FrameError):
        oracle.direct_C(10, 0, 2, 4, CubicPhase(0, 0, 1e-5))
    with pytest.raises(ValueError):
        oracle.direct_C(-1, 0, 1, 1, CubicPhase(0, 0, 1e-5))
    with pytest.raises(ValueError):
        oracle.direct_C(10, 0, 1, 1, CubicPhase(0, 0, 1e-5), precision="quad")


@given(st.integers(1, 12), st.integers(-40, 40), st.integers(-40, 40), coef, coef, small_mu, st.integers(0, 300))
def test_direct_C_against_naive(q, a, b, alpha, beta, mu, N):
    if math.gcd(b, q) != 1:
        b = 1
    got = oracle.direct_C(N, a, b, q, CubicPhase(alpha, beta, mu)).value
    with mpmath.workdps(40):
        A, B, M = (mpmath.mpf(x) for x in (alpha, beta, mu))
        ref = complex(mpmath.fsum(
            mpmath.expjpi(mpmath.mpf((a * n + b * n * n) % (2 * q)) / q + 2 * (A * n + B * n * n + M * n ** 3))
            for n in range(N + 1)))
    assert abs(got - ref) < 1e-12


def test_precisions_agree_within_est_err():
    ph = CubicPhase(0.2718281828, -0.1414213562, 7.3e-10)
    c = oracle.direct_C(20_000, 3, 5, 7, ph, "compensated64")
    x = oracle.direct_C(20_000, 3, 5, 7, ph, "extended")
    assert x.precision_tag == "extended" and c.precision_tag == "compensated64"
    assert abs(c.value - x.value) <= c.est_err + x.est_err


def test_primed_examples():
    assert oracle.direct_C_primed(0, 1, 3, 5, 1e-4).value == 0.5


@pytest.mark.parametrize("case", range(100))
def test_primed_relation(case):
    rng = np.random.default_rng([case, 52])
    q = int(rng.integers(1, 17))
    b = int(rng.integers(-30, 30))
    while math.gcd(b, q) != 1:
        b = int(rng.integers(-30, 30))
    a, N, mu = int(rng.integers(-30, 30)), int(rng.integers(1, 800)), 10 ** rng.uniform(-9, -4)
    ph = CubicPhase(0.0, 0.0, mu)
    full = oracle.direct_C(N, a, b, q, ph).value
    terms = oracle.direct_terms(N, ph, a, b, q)
    primed = oracle.direct_C_primed(N, a, b, q, mu).value
    assert abs(primed - (full - (terms[0] + terms[-1]) / 2)) < 1e-12


def test_hmax_trivial():
    assert oracle.direct_Hmax(0.3, 0.2, 1e-5, 0) == pytest.approx(1.0)
    assert oracle.direct_Hmax(0.0, 0.0, 0.0, 57) == 58
    with pytest.raises(ValueError):
        oracle.direct_Hmax(0, 0, 0, -1)


@given(coef, coef, small_mu, st.integers(0, 300))
def test_hmax_matches_bruteforce(alpha, beta, mu, N):
    assert abs(oracle.direct_Hmax(alpha, beta, mu, N) - oracle.brute_Hmax(alpha, beta, mu, N)) < 1e-12
    assert oracle.direct_Hmax(alpha, beta, mu, N) >= abs(oracle.direct_H(alpha, beta, mu, N).value) - 1e-12


def test_reference_integral_orientation_and_closed_form():
    # int_0^X e(c1 t) dt = (e(c1 X) - 1)/(2 pi i c1)
    c1, X = 0.37, 12.5
    v, err = oracle.reference_integral(c1, 0.0, 1e-300, 0.0, X)
    ref = (np.exp(2j * np.pi * c1 * X) - 1) / (2j * np.pi * c1)
    assert abs(v - ref) < 1e-12 and err < 1e-10
    w, _ = oracle.reference_integral(c1, 0.0, 1e-300, X, 0.0)
    assert abs(w + v) < 1e-14


def test_airy_reference_matches_scorer_real_part():
    for mu, s in [(1e-4, 0.3), (1e-2, -2.0), (1e-6, 5.0)]:
        assert abs(oracle.airy_reference(mu, s) - 2 * oracle.hi_complete_reference(mu, s).real) < 1e-12
