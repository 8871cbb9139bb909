import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cubicsum import airy, oracle, suites, transform
from cubicsum.calibration import load_audit_constants
from cubicsum.gauss import RationalFrame
from cubicsum.numkit import CubicPhase, nearest_int, normalize
from cubicsum.transform import PreconditionError


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def test_classify_example():
    cls = transform.classify(CubicPhase(0.0, 0.0, 1e-6), 100, 1)
    assert cls.omega == 0
    assert cls.fprime_0 == 0 and cls.fprime_N == pytest.approx(0.03)
    assert (cls.M1, cls.M2, cls.Mstar) == (0, 0, 0)
    assert cls.Omega_set == frozenset({0})


def test_classify_positive_beta_and_midpoint():
    cls = transform.classify(CubicPhase(0.01, 0.002, 1e-6), 200, 3)
    assert cls.omega > 0 and cls.Mstar == cls.M1 and cls.fprime_min == cls.fprime_0
    N, mu = 200, 1e-6
    cls = transform.classify(CubicPhase(0.01, -3 * mu * N / 2, mu), N, 3)
    assert cls.omega == pytest.approx(-N / 2)
    assert cls.Mstar == cls.M2


def test_classify_refuses():
    with pytest.raises(PreconditionError):
        transform.classify(CubicPhase(0, 0, -1e-6), 10, 1)
    with pytest.raises(PreconditionError):
        transform.classify(CubicPhase(0, 0, 1e-6), 0, 1)


@given(st.floats(-0.5, 0.5), st.floats(-0.05, 0.05), st.floats(1e-9, 1e-4), st.integers(1, 3000), st.integers(1, 40))
def test_classify_invariants(alpha, beta, mu, N, q):
    cls = transform.classify(CubicPhase(alpha, beta, mu), N, q)
    assert cls.M1 <= cls.Mstar <= cls.M2
    assert cls.M_max >= abs(cls.M1 - q) and cls.M_max >= abs(cls.M2 + q)
    assert cls.Omega_set <= {cls.M1, cls.Mstar, cls.M2}
    if not (-N < cls.omega < 0):
        assert cls.Mstar == cls.M1 or cls.omega <= -N / 2


def test_tie_break_regression():
    # 2q f'(0) = 1/2 exactly: round-half-up gives M1 = 1, banker's rounding would give 0
    cls = transform.classify(CubicPhase(0.25, 0.0, 1e-9), 10, 1)
    assert cls.M1 == 1 and round(0.5) == 0
    # N' = [alpha + 2 beta N + 3 mu N^2] = [2.5] with a negligible cubic term
    _, Np, _, _ = transform.vdc_step(0.0, 0.3125, 1e-300, 4, strict=False)
    assert Np == 3 and round(2.5) == 2
    # w = [6 mu q N^2] = [1.5]
    q, N = 1, 2
    res = transform.eval_rational_cubic(N, 0, 1, q, 1.5 / (6 * q * N * N))
    assert res.info["w"] == 2 and round(1.5) == 2 and nearest_int(0.5) == 1


@given(st.integers(-300, 300), st.floats(-0.5, 0.5), st.floats(-0.1, 0.1), st.floats(1e-9, 1e-3), st.integers(1, 20))
def test_s_of_m_definition(m, alpha, beta, mu, q):
    omega = beta / (3 * mu)
    ref = mu * omega ** 2 + (m / 2 - q * alpha) / (3 * q)
    assert transform.s_of_m(m, CubicPhase(alpha, beta, mu), q) == pytest.approx(ref, rel=1e-9, abs=1e-9 * abs(mu * omega ** 2) + 1e-12)


# ---------------------------------------------------------------------------
# Poisson decomposition
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("inst", suites.poisson_instances(8, seed=99))
def test_poisson_against_oracle(inst):
    frame = RationalFrame(inst["a"], inst["b"], inst["q"])
    phase = CubicPhase(inst["alpha"], inst["beta"], inst["mu"])
    val = transform.poisson_decompose(inst["N"], frame, phase)
    assert abs(val - oracle.direct_C(inst["N"], inst["a"], inst["b"], inst["q"], phase).value) < 1e-6


def test_poisson_tail_correction_helps():
    frame, phase, N = RationalFrame(1, 3, 5), CubicPhase(0.11, 0.02, 3e-6), 150
    ref = oracle.direct_C(N, 1, 3, 5, phase).value
    plain = transform.poisson_decompose(N, frame, phase, tail=False)
    fixed = transform.poisson_decompose(N, frame, phase)
    assert abs(fixed - ref) < abs(plain - ref) / 100


def test_endpoint_and_c1_moduli():
    frame, phase = RationalFrame(3, 7, 9), CubicPhase(0.2, -0.01, 1e-7)
    assert abs(abs(transform._endpoint_B(1234, frame, phase)) - 1) < 1e-15
    c1 = transform.c0_value(phase) * frame.g0
    assert min(abs(abs(c1) - 1), abs(c1)) < 1e-12


# ---------------------------------------------------------------------------
# main propositions
# ---------------------------------------------------------------------------

def test_main_theorem_empty_range():
    frame, phase = RationalFrame(0, 1, 3), CubicPhase(0.01, 0.0, 1e-9)
    res = transform.eval_main_theorem(50, frame, phase)
    assert res.info["M1"] == res.info["M2"]
    assert res.breakdown["main"] == 0
    assert res.value == res.breakdown["boundary"] + res.breakdown["half_endpoints"]


@pytest.mark.parametrize("inst", suites.prop1_instances(25, seed=123))
def test_main_theorem_inequality(inst):
    res, err, ref = suites._run_prop(inst, 1, 1e-9)
    assert err <= res.err_radius + ref.est_err
    assert res.err_radius >= res.bounds["R1_scaled"] + res.quadrature_err - 1e-12


@pytest.mark.parametrize("case", range(20))
def test_boundary_term_bound(case):
    rng = np.random.default_rng([case, 61])
    q = int(rng.integers(1, 9))
    N = int(rng.integers(50, 1500))
    mu = 10 ** rng.uniform(-3, 0) / (12 * q * N * N)
    beta = -3 * mu * N * rng.uniform(0.05, 0.95)  # -N < omega < 0
    frame = RationalFrame(int(rng.integers(0, 2 * q)), 1, q)
    res = transform.eval_main_theorem(N, frame, CubicPhase(rng.uniform(-0.5, 0.5), beta, mu))
    scaled = abs(res.breakdown["boundary"]) * math.sqrt(q)  # undo the 1/sqrt(q) prefactor
    assert scaled <= min(3 * N, 48 / (12 * math.pi * mu) ** (1 / 3))


def test_case_consistency_at_midpoint():
    N, mu, q = 400, 2e-7, 2
    beta = -3 * mu * N / 2
    frame = RationalFrame(1, 1, q)
    phase = CubicPhase(0.07, beta, mu)
    cls = transform.classify(phase, N, q)
    assert cls.Mstar == cls.M2
    res = transform.eval_main_theorem(N, frame, phase)
    assert res.info["one_saddle_terms"] == 0
    ref = oracle.direct_C(N, 1, 1, q, phase).value
    assert abs(ref - res.value) <= res.err_radius


def test_main_theorem2_breakdown_and_sign_of_Y():
    frame, phase, N = RationalFrame(0, 0, 1), CubicPhase(0.0013, 1e-7, 1.25e-9), 20000
    res = transform.eval_main_theorem2(N, frame, phase)
    assert res.value == sum(res.breakdown.values())
    ref = oracle.direct_C(N, 0, 0, 1, phase).value
    assert abs(ref - res.value) <= res.err_radius
    # the opposite sign of Y misses by far more than the error budget
    flipped = res.value - 2 * res.breakdown["Y"]
    assert abs(ref - flipped) > 10 * res.err_radius


def test_r2_vanishes_with_beta_and_mu():
    frame = RationalFrame(1, 1, 2)
    radii = []
    for scale in (1e-2, 1e-4, 1e-6):
        res = transform.eval_main_theorem2(100, frame, CubicPhase(0.05, scale * 1e-3, scale * 1e-6))
        radii.append(res.bounds["R2_scaled"])
    assert radii[0] > 100 * radii[1] > 1e4 * radii[2]


def test_phi_truncation_doubling():
    frame, phase, N = RationalFrame(1, 3, 5), CubicPhase(0.031, 0.0004, 2e-8), 600
    cls = transform.classify(phase, N, 5)
    K = cls.M_max + 256 * 5
    for x in (0, N):
        v1, t1 = transform.secondary_phi(x, cls, frame, phase, K)
        v2, t2 = transform.secondary_phi(x, cls, frame, phase, 2 * K)
        v4, _ = transform.secondary_phi(x, cls, frame, phase, 4 * K)
        assert t2 < t1  # the added tail shrinks as the window doubles
        assert abs(v1 - v2) < 1e-9 * max(1, abs(v1)) and abs(v2 - v4) < 1e-9 * max(1, abs(v1))
    with pytest.raises(PreconditionError):
        transform.secondary_phi(N, cls, frame, phase, 1)


def test_conjugation_invariant():
    alpha, beta, mu, N = 0.137, -0.125 - 3e-6, -4e-9, 3000
    flipped = transform.eval_theorem_1(alpha, beta, mu, N)
    assert flipped.info.get("conjugated")
    ph, conj = normalize(CubicPhase(alpha, beta, mu))
    plain = transform.eval_theorem_1(ph.alpha, ph.beta, ph.mu, N)
    assert conj and abs(flipped.value - plain.value.conjugate()) < 1e-12 * max(1, abs(plain.value))


# ---------------------------------------------------------------------------
# theorem-level specialisations
# ---------------------------------------------------------------------------

def test_theorem1_refuses_large_mu():
    with pytest.raises(PreconditionError, match=r"6\*mu\*q\*N\^2 < 1"):
        transform.eval_theorem_1(0.1, 0.01, 1e-3, 1000)


def test_theorem1_single_term_example():
    # beta = 0: q = 1, eta = 0, v = 0.  The indicator in D_l keeps l = 0 only
    # when delta1 = 0 (a = 0 here), and then D_0 = 1.
    alpha, mu, N = 0.01, 1e-8, 1000
    d = transform.theorem1_data(alpha, 0.0, mu, N)
    assert d["eta"] == 0 and d["v"] == 0 and d["Omega"] == [0]
    assert RationalFrame(d["a"], d["b"], d["q"]).delta1 == 0
    res = transform.eval_theorem_1(alpha, 0.0, mu, N)
    D0 = res.breakdown["ell=0"] / airy.cubic_phase_integral(d["eps"], d["eta"], mu, float(N))
    assert abs(D0 - 1) < 1e-9
    ref = oracle.direct_H(alpha, 0.0, mu, N).value
    assert abs(ref - res.value) <= res.err_radius
    assert abs(ref) > 5 * res.err_radius  # the main term is doing real work


def test_theorem1_no_main_term():
    alpha, mu, N = 0.51, 1e-8, 1000  # a = 1, q = 1: delta1 = 1 and Omega = {0}
    res = transform.eval_theorem_1(alpha, 0.0, mu, N)
    assert res.info["Omega"] == [0] and res.value == 0
    assert RationalFrame(res.info["a"], res.info["b"], res.info["q"]).delta1 == 1
    kappa = load_audit_constants()["kappa"]
    assert abs(oracle.direct_H(alpha, 0.0, mu, N).value) <= kappa * math.log(2)


def test_theorem1_interior_saddle_is_kept():
    # at the edge of the hypotheses v = 2 although the stated set is {0, 2}
    a, b, m, N = -0.17210275430903435, -0.13541659963764432, 1.1738393969852684e-11, 16384
    res = transform.eval_theorem_1(a, b, m, N)
    assert res.info["Omega_stated"] == [0, 2] and res.info["Omega"] == [0, 1, 2]
    err = abs(oracle.direct_H(a, b, m, N).value - res.value)
    q = res.info["q"]
    assert err <= res.err_radius and err / (math.sqrt(q) * math.log(2 * q)) < 2


def test_theorem1_branch_split():
    N, mu = 1000, 1e-8
    # eta strictly inside (-3 mu N, 0) selects branch (ii)
    d = transform.theorem1_data(0.1, -1.5 * mu * N, mu, N)
    assert d["branch"] == "ii"
    assert transform.theorem1_data(0.1, 1e-9, mu, N)["branch"] == "i"
    assert transform.theorem1_data(0.1, -3 * mu * N - 1e-9, mu, N)["branch"] == "i"


def test_vdc_step_alpha_zero():
    beta, mu, N = 0.2, 1e-7, 1000
    new, Np, pref, rep = transform.vdc_step(0.0, beta, mu, N)
    assert new.alpha == 0 and new.beta == pytest.approx(-1 / (4 * beta)) and new.mu == pytest.approx(mu / (8 * beta ** 3))
    assert abs(pref * math.sqrt(2 * beta) - np.exp(2j * np.pi / 8)) < 1e-14
    assert rep.applicable and set(rep.remainder_terms) == {"taylor", "boundary_pos", "boundary_neg", "log"}
    assert abs(Np) < N


def test_vdc_step_refusals():
    with pytest.raises(PreconditionError, match=r"\|beta\| > 1/N"):
        transform.vdc_step(0.1, 0.0005, 1e-9, 1000)
    with pytest.raises(PreconditionError, match=r"6\*mu\*N\^2"):
        transform.vdc_step(0.1, 0.2, 1e-3, 1000)


def test_vdc_length_shrinks():
    for beta in (0.01, 0.05, -0.02):
        _, Np, _, _ = transform.vdc_step(0.1, beta, 1e-9, 2000)
        assert abs(Np) < 2000


@pytest.mark.parametrize("inst", suites.vdc_instances(1024, 8, seed=77))
def test_vdc_ratio_bounded(inst):
    ratio, _ = suites.vdc_ratio(inst)
    assert ratio < 2


def test_hmax_chain_depth_zero_and_one_level():
    alpha, beta, mu, N = 0.0, 0.2, 1e-7, 1000
    rep = transform.hmax_chain(alpha, beta, mu, N, c3=1.0, c4=1.0, depth=0, c_add=1.0)
    assert rep.levels == [] and rep.bound == pytest.approx(oracle.direct_Hmax(alpha, beta, mu, N))
    rep = transform.hmax_chain(alpha, beta, mu, N, c3=0.7, c4=1.3, depth=1, c_add=1.0)
    fac = (1 + (0.7 * mu * N + 1.3 * mu ** 2 * N ** 4) / beta) / math.sqrt(2 * beta)
    assert rep.levels[0]["factor"] == pytest.approx(fac)


def test_hmax_chain_stops_on_failed_precondition():
    rep = transform.hmax_chain(0.1, 0.0001, 1e-9, 1000, c3=1, c4=1, c_add=1)
    assert rep.levels == [] and "precondition fails" in rep.stop_reason


def test_hmax_chain_holds_with_calibrated_constants():
    from cubicsum import calibration
    k = load_audit_constants()
    for inst in calibration.chain_instances(100, seed=4242):
        assert calibration.chain_margin(inst, k["c3"], k["c4"], k["c_add"]) >= 1


def test_rational_cubic_small_mu_branch():
    q, N = 3, 500
    mu = 0.5 / (12 * q * N * N)
    res = transform.eval_rational_cubic(N, 1, 1, q, mu)
    assert res.info["w"] == 0 and res.info["saddle_terms"] == 0
    assert sum(k.startswith("integral") for k in res.breakdown) == 1
    ref = oracle.direct_C_primed(N, 1, 1, q, mu).value
    assert abs(ref - res.value) <= res.err_radius


def test_rational_cubic_sum_empty_when_w_small():
    q, N = 2, 300
    mu = 1.2 / (6 * q * N * N)  # w = 1
    res = transform.eval_rational_cubic(N, 0, 1, q, mu)
    assert res.info["w"] == 1 and res.info["saddle_terms"] == 0


@pytest.mark.parametrize("inst", suites.rational_instances(2000, 10, seed=5))
def test_rational_cubic_ratio(inst):
    ratio, _ = suites.rational_ratio(inst)
    assert ratio < load_audit_constants()["kappa_prime"]


def test_cubic_upper_bound_formula_and_monotone():
    a, b, q, mu = 1, 2, 5, 1e-6
    vals = [transform.cubic_upper_bound(a, b, q, mu, N, kappa_pp=1.0) for N in range(1, 3000, 37)]
    assert all(x <= y for x, y in zip(vals, vals[1:]))
    N = 1000
    expect = (math.sqrt(mu) * N ** 1.5 * math.sqrt(q) + min(N, mu ** (-1 / 3)) / math.sqrt(q)
              + mu * N * math.sqrt(q) + math.sqrt(q) * math.log(mu * N * N * q + 2 * q))
    assert transform.cubic_upper_bound(a, b, q, mu, N, kappa_pp=2.0) == pytest.approx(2 * expect, rel=1e-15)
    with pytest.raises(PreconditionError):
        transform.cubic_upper_bound(1, 2, 4, mu, N)


def test_cubic_upper_bound_holds_with_calibrated_constant():
    from cubicsum import calibration
    for inst in calibration.upper_bound_instances(500, seed=4242):
        assert calibration.upper_bound_sum(inst) <= transform.cubic_upper_bound(
            inst["a"], inst["b"], inst["q"], inst["mu"], inst["N"])


def test_rational_to_frame():
    assert transform.rational_to_frame(1, 3, 5) == (2, 6, 5)
    assert transform.rational_to_frame(1, 3, 4) == (1, 3, 2)
