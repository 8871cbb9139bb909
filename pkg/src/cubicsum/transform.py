"""Transformation formulas for cubic exponential sums.

Conventions: ``f(x) = alpha x + beta x^2 + mu x^3`` with ``mu > 0``, the
rational frame ``(a, b, q)`` supplies the twist ``e((a n + b n^2)/(2q))``,
``omega = beta/(3 mu)`` and ``P_m(t) = f(t) - m t/(2q)``.

The constant ``c0 = e(f(-omega))`` and the factors ``e(omega m/(2q))``
cancel in every reconstructed sum, and for large ``|omega|`` they are
phases of enormous argument.  The routines here therefore never form them:
each integral is evaluated directly as ``int e(P_m(t)) dt`` over the
matching range of ``t`` (``[0, N]`` for ``B_m``; ``[-omega, inf)`` for
``T_m``; ``(-inf, -omega]`` for the conjugated variant), which is the same
quantity as ``c0 e(omega m/2q)`` times the corresponding Airy-Hardy
integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import digamma, zeta

from . import airy
from .diophantine import approx_alpha, approx_beta
from .gauss import RationalFrame, arithmetic_factor_D, in_E
from .numkit import (
    CubicPhase,
    dd_add,
    dd_div_int,
    dd_mul_d,
    nearest_int,
    normalize,
    poly_phase_frac,
    sign,
    two_prod,
    unit_phase,
    unit_phase_dd,
)

_EPS = np.finfo(float).eps
DEFAULT_TOL = 1e-10


class PreconditionError(ValueError):
    """A method was asked to run outside its stated range of validity."""


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SaddleClassification:
    omega: float
    M1: int
    M2: int
    Mstar: int
    M: int
    Omega_set: frozenset
    M_max: int
    fprime_0: float
    fprime_N: float
    fprime_min: float
    N: int
    q: int


@dataclass
class ApproxResult:
    """A reconstructed value with a guaranteed (or audited) error radius.

    ``breakdown`` holds additive contributions that sum to ``value``;
    ``bounds`` holds the budgets that make up ``err_radius``; ``info``
    carries anything else worth reporting (case labels, counts).
    """

    value: complex
    err_radius: float
    breakdown: dict = field(default_factory=dict)
    quadrature_err: float = 0.0
    bounds: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    def conjugate(self) -> "ApproxResult":
        return ApproxResult(
            self.value.conjugate(), self.err_radius,
            {k: complex(v).conjugate() for k, v in self.breakdown.items()},
            self.quadrature_err, dict(self.bounds), dict(self.info, conjugated=True))


@dataclass
class BoundReport:
    bound: float
    levels: list
    stop_reason: str
    terminal: dict


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def classify(phase: CubicPhase, N: int, q: int) -> SaddleClassification:
    """Saddle-point bookkeeping ``M1, M*, M2, Omega, M_max`` for ``f`` on ``[0, N]``."""
    if not phase.mu > 0:
        raise PreconditionError("classify needs mu > 0")
    if N < 1 or q < 1:
        raise PreconditionError("need N >= 1 and q >= 1")
    omega = phase.beta / (3.0 * phase.mu)
    fp0 = phase.alpha
    fpN = phase.fprime(float(N))
    fmin_vertex = phase.alpha - phase.beta * phase.beta / (3.0 * phase.mu)
    norm_plus = fpN if omega >= -N / 2 else fp0
    if omega > 0:
        norm_minus = fp0
    elif omega >= -N:
        norm_minus = fmin_vertex
    else:
        norm_minus = fpN
    M1 = nearest_int(2 * q * norm_minus)
    M2 = nearest_int(2 * q * norm_plus)
    Mstar = nearest_int(2 * q * fp0) if omega >= -N / 2 else nearest_int(2 * q * fpN)
    M_max = math.ceil(2 * q * abs(fp0) + 2 * q * abs(fpN) + abs(M1) + abs(M2) + q)
    return SaddleClassification(
        omega=omega, M1=M1, M2=M2, Mstar=Mstar, M=M2 - M1,
        Omega_set=frozenset({M1, Mstar, M2}), M_max=M_max,
        fprime_0=fp0, fprime_N=fpN, fprime_min=norm_minus, N=N, q=q)


def _linear_coeff(alpha: float, m, q: int):
    """``alpha - m/(2q)`` as a double-double pair (vectorised over ``m``)."""
    mh, ml = dd_div_int(np.asarray(m, dtype=float), 2 * q)
    return dd_add(np.full(np.shape(mh), alpha), 0.0, -mh, -ml)


def s_of_m(m, phase: CubicPhase, q: int):
    """``s_m = mu omega^2 + (m/2 - q alpha)/(3q)``.

    Evaluated as ``(beta^2 + 3 mu (m/2q - alpha))/(9 mu)`` with the
    numerator in double-double, which avoids the cancellation between the
    two terms when ``omega`` is large.
    """
    ch, cl = _linear_coeff(phase.alpha, m, q)
    bh, bl = two_prod(phase.beta, phase.beta)
    th, tl = dd_mul_d(ch, cl, -3.0 * phase.mu)
    dh, dl = dd_add(bh, bl, th, tl)
    out = (dh + dl) / (9.0 * phase.mu)
    return float(out) if np.ndim(out) == 0 else out


def r1_bound(cls: SaddleClassification, phase: CubicPhase, q: int, N: int) -> float:
    """Explicit bound on the remainder of the main-theorem reconstruction."""
    lin = 128.0 * (2 * abs(phase.beta) + 3 * phase.mu * N) / math.pi ** 2 * q ** 3 * (2 * q + 9) / (2 * q + 1) ** 3
    tail = 4.0 * q / math.pi * math.log(cls.M_max / (q + 0.5) + 1.0)
    arith = 8.0 / math.pi * q * math.log(2 * q - 1)
    saddle = 8.0 / math.pi * q * math.log(2 * cls.M - 1) if cls.M > 0 else 0.0
    return lin + tail + arith + saddle + 92.0 * q / math.pi


def r2_bound(phase: CubicPhase, q: int, N: int) -> float:
    return 1728.0 * (2 * abs(phase.beta) + 3 * phase.mu * N) * q ** 3 / math.pi ** 2


# ---------------------------------------------------------------------------
# integral batches (c0-free)
# ---------------------------------------------------------------------------

def _finite_batch(ms, phase: CubicPhase, q: int, N: int, tol: float):
    """``int_0^N e(P_m(t)) dt`` for every ``m`` in ``ms``."""
    ms = np.asarray(ms, dtype=np.int64)
    if ms.size == 0:
        return np.zeros(0, complex), np.zeros(0)
    ch, cl = _linear_coeff(phase.alpha, ms, q)
    v, e = airy.cubic_path_integral(ch, phase.beta, phase.mu, 0.0, float(N), tol, cl)
    return v, e + 4 * _EPS * N


def _saddle_phase(ms, phase, q, t):
    ch, cl = _linear_coeff(phase.alpha, ms, q)
    return poly_phase_frac(t, ch, cl, phase.beta, phase.mu)


def _complete_batch(ms, phase: CubicPhase, q: int, side: str, tol: float):
    """Complete integrals relative to the split point ``t = -omega``.

    ``side='T'``: ``int_{-omega}^inf``; ``'Tbar'``: ``int_{-inf}^{-omega}``;
    ``'both'``: the full line.  Terms whose stationary-phase error
    ``1/(pi s_m)`` is already below ``tol`` use the saddle-point formula.
    """
    ms = np.asarray(ms, dtype=np.int64)
    if ms.size == 0:
        return np.zeros(0, complex), np.zeros(0)
    omega = phase.beta / (3.0 * phase.mu)
    s = s_of_m(ms, phase, q)
    s = np.atleast_1d(s)
    values = np.zeros(ms.size, complex)
    errors = np.zeros(ms.size)
    stat = (s > 0) & (1.0 / (math.pi * np.maximum(s, 1e-300)) <= tol)
    if stat.any():
        y0 = np.sqrt(s[stat] / phase.mu)
        amp = (36.0 * phase.mu * s[stat]) ** -0.25
        if side in ("T", "both"):
            ph = _saddle_phase(ms[stat], phase, q, -omega + y0)
            values[stat] += amp * unit_phase(ph + 0.125)
            errors[stat] += 1.0 / (math.pi * s[stat])
        if side in ("Tbar", "both"):
            ph = _saddle_phase(ms[stat], phase, q, -omega - y0)
            values[stat] += amp * unit_phase(ph - 0.125)
            errors[stat] += 1.0 / (math.pi * s[stat])
    quad = ~stat
    if quad.any():
        ch, cl = _linear_coeff(phase.alpha, ms[quad], q)
        lo = {"T": -omega, "Tbar": -np.inf, "both": -np.inf}[side]
        hi = {"T": np.inf, "Tbar": -omega, "both": np.inf}[side]
        v, e = airy.cubic_integral_general(ch, phase.beta, phase.mu, lo, hi, tol, cl)
        values[quad] = v
        # the split point -omega is only known to within eps*|omega|
        split_err = 0.0 if side == "both" else 2 * _EPS * abs(omega)
        errors[quad] = e + split_err
    return values, errors


def _twists(ms, frame: RationalFrame):
    return np.asarray(frame.twist(np.asarray(ms, dtype=np.int64)), dtype=complex)


def _endpoint_B(N: int, frame: RationalFrame, phase: CubicPhase) -> complex:
    """``B = e((aN + bN^2)/(2q) + f(N))`` with the rational part reduced exactly."""
    q = frame.q
    r = (frame.a * N + frame.b * N * N) % (2 * q)
    rh, rl = dd_div_int(r, 2 * q)
    fN = poly_phase_frac(float(N), phase.alpha, 0.0, phase.beta, phase.mu)
    x = (fN + (rh + rl))
    return complex(unit_phase_dd(x - math.floor(x + 0.5)))


def c0_value(phase: CubicPhase) -> complex:
    """``c0 = e(2 omega^2 beta/3 - omega alpha) = e(f(-omega))``, via double-double at the rounded ``omega``."""
    omega = phase.beta / (3.0 * phase.mu)
    return complex(unit_phase_dd(poly_phase_frac(-omega, phase.alpha, 0.0, phase.beta, phase.mu)))


def _check_frame(frame: RationalFrame, phase: CubicPhase):
    if not isinstance(frame, RationalFrame):
        raise TypeError("frame must be a RationalFrame")
    if not phase.mu > 0:
        raise PreconditionError("mu > 0 required (normalize the phase first)")


def _E_range(lo_excl: int, hi_excl: int, frame: RationalFrame) -> np.ndarray:
    ms = np.arange(lo_excl + 1, hi_excl, dtype=np.int64)
    return ms[in_E(ms, frame)] if ms.size else ms


# ---------------------------------------------------------------------------
# Poisson decomposition with analytic tail
# ---------------------------------------------------------------------------

def _residue_weights(x: int, frame: RationalFrame) -> tuple[np.ndarray, np.ndarray]:
    """Residues ``h mod 2q`` in ``E`` and ``e(g(h) - h x/(2q))`` for integer ``x``."""
    q = frame.q
    h = np.arange(2 * q, dtype=np.int64)
    h = h[in_E(h, frame)]
    num = (frame.g_phase_num(h) - 4 * ((h * (x % (2 * q))) % (2 * q))) % (8 * q)
    return h, unit_phase(num / (8.0 * q))


def _tail_sums(c: float, K: int, h: np.ndarray, q: int, order3: bool):
    """Symmetric sums over ``|m| > K``, ``m = h (mod 2q)``, of ``1/(c-m)`` (and ``1/(c-m)^3``)."""
    two_q = 2 * q
    m_plus = h + two_q * ((K - h) // two_q + 1)       # smallest m > K in the class
    m_minus = h - two_q * ((h + K) // two_q + 1)      # largest m < -K in the class
    a_plus = (m_plus - c) / two_q
    b_minus = (c - m_minus) / two_q
    s1 = (digamma(a_plus) - digamma(b_minus)) / two_q
    s3 = (zeta(3, b_minus) - zeta(3, a_plus)) / two_q ** 3 if order3 else np.zeros_like(s1)
    return s1, s3


def poisson_decompose_detail(N: int, frame: RationalFrame, phase: CubicPhase, window: int | None = None,
                             tol: float = 1e-11, tail: bool = True) -> dict:
    """Truncated Poisson identity, optionally with the endpoint asymptotics of the tail summed.

    Returns a dict with ``value``, ``quadrature_err``, ``tail`` (the analytic
    tail correction that was added) and ``window``.
    """
    _check_frame(frame, phase)
    q = frame.q
    cls = classify(phase, N, q)
    K = cls.M_max + 200 * q if window is None else int(window)
    ms = np.arange(-K, K + 1, dtype=np.int64)
    ms = ms[in_E(ms, frame)]
    vals, errs = _finite_batch(ms, phase, q, N, tol)
    w = _twists(ms, frame)
    pref = frame.g0 / math.sqrt(q)
    core = complex(np.sum(w * vals))
    tail_val = 0j
    if tail:
        for x, sgn in ((0, -1.0), (N, 1.0)):
            c = 2 * q * phase.fprime(float(x))
            if K <= abs(c) + 2 * q:
                raise PreconditionError("window must exceed 2q|f'(x)| for the tail correction")
            h, wh = _residue_weights(x, frame)
            s1, s3 = _tail_sums(c, K, h, q, True)
            fpp = 2 * phase.beta + 6 * phase.mu * x
            ef = unit_phase_dd(poly_phase_frac(float(x), phase.alpha, 0.0, phase.beta, phase.mu))
            coeff = q / (math.pi * 1j) * s1 - 2 * q ** 3 * fpp / math.pi ** 2 * s3
            tail_val += sgn * complex(ef * np.sum(wh * coeff))
    B = _endpoint_B(N, frame, phase)
    value = (1 + B) / 2 + pref * (core + tail_val)
    # neglected third-order tail terms: O(q^3 f''' / K^2 + q^5 f''^2 / K^4) per endpoint class sum
    fpp_max = 2 * abs(phase.beta) + 6 * phase.mu * N
    left = (4 * q ** 3 * 6 * phase.mu + 24 * q ** 5 * fpp_max ** 2 / max(K - cls.M_max, 1) ** 2) / (math.pi ** 3 * max(K - cls.M_max, 1) ** 2)
    return {
        "value": value,
        "quadrature_err": abs(pref) * float(np.sum(errs)),
        "tail": pref * tail_val,
        "tail_residual_est": 2 * abs(pref) * 2 * q * left,
        "window": K,
    }


def poisson_decompose(N: int, frame: RationalFrame, phase: CubicPhase, window: int | None = None,
                      tol: float = 1e-11, tail: bool = True) -> complex:
    """``(1+B)/2 + (c1/sqrt q) sum_{m in E, |m| <= window} B_m`` (+ summed endpoint tail)."""
    return poisson_decompose_detail(N, frame, phase, window, tol, tail)["value"]


# ---------------------------------------------------------------------------
# main propositions
# ---------------------------------------------------------------------------

def _main_and_boundary(N: int, frame: RationalFrame, phase: CubicPhase, tol: float):
    q = frame.q
    cls = classify(phase, N, q)
    pref = frame.g0 / math.sqrt(q)
    two = _E_range(cls.M1, cls.Mstar, frame)
    one = _E_range(cls.Mstar, cls.M2, frame)
    side = "T" if cls.omega >= -N / 2 else "Tbar"
    v2, e2 = _complete_batch(two, phase, q, "both", tol)
    v1, e1 = _complete_batch(one, phase, q, side, tol)
    main = complex(np.sum(_twists(two, frame) * v2) + np.sum(_twists(one, frame) * v1))
    ells = np.array(sorted(cls.Omega_set), dtype=np.int64)
    ells = ells[in_E(ells, frame)]
    vb, eb = _finite_batch(ells, phase, q, N, tol)
    boundary = complex(np.sum(_twists(ells, frame) * vb))
    n_terms = two.size + one.size + ells.size
    quad = float(np.sum(e2) + np.sum(e1) + np.sum(eb)) + n_terms * 8 * _EPS
    info = {"M1": cls.M1, "Mstar": cls.Mstar, "M2": cls.M2, "omega": cls.omega,
            "two_saddle_terms": int(two.size), "one_saddle_terms": int(one.size),
            "single_saddle_variant": side, "Omega": sorted(cls.Omega_set)}
    return cls, pref, pref * main, pref * boundary, abs(pref) * quad, info


def eval_main_theorem(N: int, frame: RationalFrame, phase: CubicPhase, tol: float = DEFAULT_TOL) -> ApproxResult:
    """``(c1/sqrt q)(M + B) + (1 + B_N)/2`` with the explicit ``R1`` budget."""
    _check_frame(frame, phase)
    cls, pref, main, boundary, quad, info = _main_and_boundary(N, frame, phase, tol)
    half = (1 + _endpoint_B(N, frame, phase)) / 2
    r1 = r1_bound(cls, phase, frame.q, N)
    rem = abs(frame.g0) / math.sqrt(frame.q) * r1
    return ApproxResult(
        value=main + boundary + half,
        err_radius=rem + quad,
        breakdown={"main": main, "boundary": boundary, "half_endpoints": half},
        quadrature_err=quad,
        bounds={"R1": r1, "R1_scaled": rem, "quadrature": quad},
        info=info)


def _phi_scaled(x: int, cls: SaddleClassification, frame: RationalFrame, phase: CubicPhase,
                trunc: int | None = None):
    """``c0 * Phi(x)``: truncated sum plus its exact digamma tail, and the tail size."""
    q = frame.q
    K = cls.M_max + 256 * q if trunc is None else int(trunc)
    c = 2 * q * phase.fprime(float(x))
    if K <= abs(c) + 2 * q:
        raise PreconditionError("trunc must exceed 2q|f'(x)| + 2q")
    ms = np.arange(-K, K + 1, dtype=np.int64)
    ms = ms[in_E(ms, frame)]
    ms = ms[~np.isin(ms, list(cls.Omega_set))]
    den = c - ms
    if ms.size and np.min(np.abs(den)) < 1e-12:
        raise PreconditionError("2q f'(x) hits a summation index: denominator vanishes")
    w = _twists(ms, frame) * unit_phase(-((ms * (x % (2 * q))) % (2 * q)) / (2.0 * q))
    core = complex(np.sum(w / den))
    h, wh = _residue_weights(x, frame)
    s1, _ = _tail_sums(c, K, h, q, False)
    tail = complex(np.sum(wh * s1))
    ef = complex(unit_phase_dd(poly_phase_frac(float(x), phase.alpha, 0.0, phase.beta, phase.mu)))
    scale = q * ef / (math.pi * 1j)
    err = abs(scale) * (4 * _EPS * float(np.sum(1.0 / np.abs(den))) + 64 * _EPS * (1 + abs(tail)))
    return scale * (core + tail), abs(scale * tail), err


def secondary_phi(x: int, cls: SaddleClassification, frame: RationalFrame, phase: CubicPhase,
                  trunc: int | None = None) -> tuple[complex, float]:
    """``Phi(x)`` summed over ``m in E``, ``m not in Omega``, by symmetric pairing.

    The sum is truncated at ``|m| <= trunc`` (default ``M_max + 256 q``) and
    the remainder ``sum_{|m| > trunc}`` is added in closed form through the
    digamma function, residue class by residue class.  Returns the value and
    the magnitude of that added tail (what plain truncation would miss).
    """
    val, tail, _ = _phi_scaled(x, cls, frame, phase, trunc)
    return val / c0_value(phase), tail


def _y_scaled(cls: SaddleClassification, frame: RationalFrame, phase: CubicPhase):
    ms = _E_range(cls.Mstar, cls.M2, frame)
    if ms.size == 0:
        return 0j, 0.0
    q = frame.q
    s = np.atleast_1d(s_of_m(ms, phase, q))
    ph = _saddle_phase(ms, phase, q, -cls.omega)
    terms = _twists(ms, frame) * unit_phase(ph) / s
    sg = Y_SIGN * sign(cls.omega + cls.N / 2)
    val = sg / (6j * math.pi) * complex(np.sum(terms))
    # e(P_m(-omega)) depends on the rounded omega through P_m'(-omega) = -3 s_m
    err = float(np.sum(1.0 / s)) / (6 * math.pi) * (2 * math.pi * 3 * float(np.max(np.abs(s))) * _EPS * (abs(cls.omega) + 1) + 8 * _EPS)
    return val, err


# Sign in front of Y.  Integrating Hi(omega, N; mu, s) by parts around y = 0
# leaves +phi_0 = -1/(6 pi i s) when omega >= -N/2 and -phi_0 on the
# conjugated branch, so the phi_0 terms add up to -sgn(omega + N/2)/(6 pi i)
# times the sum.  Checked against direct summation (tests/test_transform.py).
Y_SIGN = -1


def secondary_Y(cls: SaddleClassification, frame: RationalFrame, phase: CubicPhase) -> complex:
    """``Y(omega)``: the ``phi_0`` boundary terms of the single-saddle range ``M* < m < M2``."""
    val, _ = _y_scaled(cls, frame, phase)
    return val / c0_value(phase)


def eval_main_theorem2(N: int, frame: RationalFrame, phase: CubicPhase, tol: float = DEFAULT_TOL,
                       trunc: int | None = None) -> ApproxResult:
    """Main theorem plus ``Phi(N) - Phi(0) + Y(omega)``, with the ``R2`` budget."""
    _check_frame(frame, phase)
    cls, pref, main, boundary, quad, info = _main_and_boundary(N, frame, phase, tol)
    phiN, tailN, eN = _phi_scaled(N, cls, frame, phase, trunc)
    phi0, tail0, e0 = _phi_scaled(0, cls, frame, phase, trunc)
    yv, ey = _y_scaled(cls, frame, phase)
    half = (1 + _endpoint_B(N, frame, phase)) / 2
    r2 = r2_bound(phase, frame.q, N)
    rem = abs(frame.g0) / math.sqrt(frame.q) * r2
    sec_err = abs(pref) * (eN + e0 + ey)
    breakdown = {"main": main, "boundary": boundary, "phi_N": pref * phiN,
                 "phi_0": -pref * phi0, "Y": pref * yv, "half_endpoints": half}
    value = sum(breakdown.values())
    return ApproxResult(
        value=value, err_radius=rem + quad + sec_err, breakdown=breakdown,
        quadrature_err=quad,
        bounds={"R2": r2, "R2_scaled": rem, "quadrature": quad, "secondary_rounding": sec_err,
                "phi_tail_N": abs(pref) * tailN, "phi_tail_0": abs(pref) * tail0},
        info=info)


# ---------------------------------------------------------------------------
# Theorem-level specialisations
# ---------------------------------------------------------------------------

def _audit(name: str, value: float | None) -> float:
    if value is not None:
        return float(value)
    from .calibration import load_audit_constants
    return load_audit_constants()[name]


def theorem1_data(alpha: float, beta: float, mu: float, N: int, q_cap: int | None = None) -> dict:
    """Diophantine data, ``u``, ``v`` and ``Omega`` for the arithmetic/analytic splitting."""
    phase, conj = normalize(CubicPhase(alpha, beta, mu))
    qa = approx_beta(phase.beta, N, q_cap)
    la = approx_alpha(phase.alpha, qa.q)
    q, eta, eps, mu = qa.q, qa.eta, la.eps, phase.mu
    u = nearest_int(2 * q * (eps - eta * eta / (3 * mu)))
    v = nearest_int(2 * q * (eps + 2 * eta * N + 3 * mu * N * N))
    if -3 * mu * N < eta < 0:
        branch, stated = "ii", {0, u, v}
    else:
        branch, stated = "i", {0, v}
    # At the edge of the hypotheses 2q f'(N) can round to 2, leaving an
    # interior saddle (e.g. l = 1 between 0 and v = 2) that the stated set
    # misses; its integral over [0, N] carries the saddle, so fill the gap.
    omega_set = stated | set(range(min(stated) + 1, max(stated)))
    return {"a": la.a, "b": qa.b, "q": q, "eps": eps, "eta": eta, "mu": mu, "u": u, "v": v,
            "branch": branch, "Omega_stated": sorted(stated), "Omega": sorted(omega_set),
            "conjugated": conj}


def eval_theorem_1(alpha: float, beta: float, mu: float, N: int, tol: float = DEFAULT_TOL,
                   kappa: float | None = None, q_cap: int | None = None) -> ApproxResult:
    """``H_N(alpha, beta, mu)`` as arithmetic factors times cubic integrals.

    The remainder is only known to be ``O(sqrt(q) log 2q)``; ``err_radius``
    reports ``kappa sqrt(q) log(2q)`` with the audited constant ``kappa``.
    """
    if N < 1:
        raise PreconditionError("N >= 1 required")
    if mu == 0:
        raise PreconditionError("mu != 0 required")
    d = theorem1_data(alpha, beta, mu, N, q_cap)
    q = d["q"]
    if not 6 * d["mu"] * q * N * N < 1:
        raise PreconditionError(f"6*mu*q*N^2 < 1 fails (6*mu*q*N^2 = {6 * d['mu'] * q * N * N:.6g}, q = {q})")
    if abs(d["eta"]) > 1.0 / (8 * q * N) * (1 + 1e-12):
        raise PreconditionError("|eta| <= 1/(8qN) fails (use a larger denominator cap)")
    frame = RationalFrame(d["a"], d["b"], q)
    terms = {}
    quad = 0.0
    for ell in d["Omega"]:
        D = arithmetic_factor_D(frame, ell)
        if D == 0:
            terms[ell] = 0j
            continue
        ch, cl = _linear_coeff(d["eps"], ell, q)
        v, e = airy.cubic_path_integral(ch, d["eta"], d["mu"], 0.0, float(N), tol, cl)
        terms[ell] = D * complex(v)
        quad += float(e)
    value = sum(terms.values())
    k = _audit("kappa", kappa)
    radius = k * math.sqrt(q) * math.log(2 * q) + quad
    res = ApproxResult(value=complex(value), err_radius=radius,
                       breakdown={f"ell={ell}": val for ell, val in terms.items()},
                       quadrature_err=quad,
                       bounds={"kappa": k, "sqrt_q_log_2q": math.sqrt(q) * math.log(2 * q)},
                       info={key: d[key] for key in ("a", "b", "q", "eps", "eta", "u", "v", "branch", "Omega",
                                                     "Omega_stated")})
    return res.conjugate() if d["conjugated"] else res


@dataclass
class VdcReport:
    applicable: bool
    failed: list
    remainder_terms: dict
    remainder_total: float


def vdc_remainder(alpha: float, beta: float, mu: float, N: int, N_prime: int) -> dict:
    terms = {
        "taylor": (mu * N ** 2 + mu ** 2 * N ** 5) / math.sqrt(abs(beta)),
        "boundary_pos": 1.0 / math.sqrt(beta) if beta > 0 else 0.0,
        "boundary_neg": 1.0 / math.sqrt(-(beta + 3 * mu * N)) if beta < 0 and beta + 3 * mu * N < 0 else 0.0,
        "log": math.log(abs(N_prime) + 2),
    }
    if beta < 0 and beta + 3 * mu * N >= 0:
        terms["boundary_neg"] = math.inf
    return terms


def vdc_preconditions(alpha: float, beta: float, mu: float, N: int) -> list:
    failed = []
    if not (-0.5 <= alpha < 0.5):
        failed.append("alpha in [-1/2, 1/2)")
    if not (-0.5 <= beta < 0.5):
        failed.append("beta in [-1/2, 1/2)")
    if not (0 < 6 * mu * N * N < 1):
        failed.append("0 < 6*mu*N^2 < 1")
    if not abs(beta) > 1.0 / N:
        failed.append("|beta| > 1/N")
    return failed


def vdc_step(alpha: float, beta: float, mu: float, N: int, strict: bool = True):
    """One van der Corput step: ``H_N(alpha,beta,mu) ~ c2/sqrt(2|beta|) H_N'(phase')``.

    Returns ``(phase', N', prefactor, report)``.  With ``strict`` a failed
    precondition raises :class:`PreconditionError` naming it.
    """
    failed = vdc_preconditions(alpha, beta, mu, N)
    if failed and strict:
        raise PreconditionError("vdc_step precondition fails: " + "; ".join(failed))
    if beta == 0:
        raise PreconditionError("|beta| > 1/N fails (beta = 0)")
    Np = nearest_int(alpha + 2 * beta * N + 3 * mu * N * N)
    b3 = beta ** 3
    new = CubicPhase(alpha / (2 * beta) + 3 * alpha ** 2 * mu / (8 * b3),
                     -1 / (4 * beta) - 3 * alpha * mu / (8 * b3),
                     mu / (8 * b3))
    c2 = unit_phase(sign(beta) / 8 - alpha ** 2 / (4 * beta) - alpha ** 3 * mu / (8 * b3))
    pref = c2 / math.sqrt(2 * abs(beta))
    rem = vdc_remainder(alpha, beta, mu, N, Np)
    report = VdcReport(not failed, failed, rem, sum(rem.values()))
    return new, Np, complex(pref), report


def _reduce_for_chain(alpha, beta, mu):
    ph, _ = normalize(CubicPhase(alpha, beta, mu))  # H^max is invariant under conjugation
    return ph.alpha, ph.beta, ph.mu


def hmax_chain(alpha: float, beta: float, mu: float, N: int, c3: float | None = None, c4: float | None = None,
               depth: int = 8, c_add: float | None = None) -> BoundReport:
    """Iterate the ``H^max`` van der Corput inequality while its hypotheses hold.

    At each level the phase is reduced (``alpha, beta`` mod 1, conjugation
    for ``mu < 0``); a negative ``N'`` is reflected with ``n -> -n``, which
    turns the tail maximum into a head maximum and costs a factor 2.  The
    final level is evaluated by direct summation.  ``c_add`` is the audited
    constant in front of the additive O-terms.
    """
    from .oracle import direct_Hmax

    c3 = _audit("c3", c3)
    c4 = _audit("c4", c4)
    c_add = _audit("c_add", c_add)
    mult, add = 1.0, 0.0
    levels = []
    a, b, m = _reduce_for_chain(alpha, beta, mu)
    n = int(N)
    stop = "depth reached"
    for level in range(depth):
        failed = vdc_preconditions(a, b, m, n)
        if failed:
            stop = "precondition fails: " + "; ".join(failed)
            break
        new, Np, _, rep = vdc_step(a, b, m, n)
        cfac = (1 + (c3 * m * n + c4 * m * m * n ** 4) / abs(b)) / math.sqrt(2 * abs(b))
        extra = rep.remainder_terms["boundary_pos"] + rep.remainder_terms["boundary_neg"] + rep.remainder_terms["log"]
        add += mult * c_add * extra
        mult *= cfac
        a2, b2, m2 = new.alpha, new.beta, new.mu
        if Np < 0:
            a2, m2, Np = -a2, -m2, -Np
            mult *= 2.0
        levels.append({"level": level, "N": n, "alpha": a, "beta": b, "mu": m, "N_prime": Np,
                       "factor": cfac, "additive": c_add * extra})
        a, b, m = _reduce_for_chain(a2, b2, m2)
        n = Np
        if n == 0:
            stop = "N' = 0"
            break
    terminal = direct_Hmax(a, b, m, n)
    return BoundReport(bound=mult * terminal + add, levels=levels, stop_reason=stop,
                       terminal={"N": n, "alpha": a, "beta": b, "mu": m, "Hmax": terminal,
                                 "multiplier": mult, "additive": add})


def eval_rational_cubic(N: int, a: int, b: int, q: int, mu: float, tol: float = DEFAULT_TOL,
                        kappa_prime: float | None = None) -> ApproxResult:
    """Half-weighted ``sum' e((an + bn^2)/(2q) + mu n^3)`` via saddle amplitudes and two integrals."""
    if not mu > 0:
        raise PreconditionError("mu > 0 required")
    if N < 1:
        raise PreconditionError("N >= 1 required")
    frame = RationalFrame(a, b, q)
    w = nearest_int(6 * mu * q * N * N)
    g = frame.g0
    ms = np.arange(1, max(w, 1), dtype=np.int64)
    ms = ms[(ms - frame.delta1) % 2 == 0]
    if ms.size:
        gnum = frame.g_phase_num(ms) / (8.0 * q)
        saddle = ms / (3.0 * q) * np.sqrt(ms / (6.0 * mu * q))  # 2 m^{3/2} / (6q sqrt(6 mu q))
        terms = ms ** -0.25 * unit_phase(gnum - (saddle - np.floor(saddle)))
        msum = complex(unit_phase(0.125) * g / (6 * mu * q) ** 0.25 * np.sum(terms))
    else:
        msum = 0j
    parts = {"saddle_sum": msum}
    quad = 0.0
    pref = g / math.sqrt(q)
    gate0 = frame.delta1 == 0
    gatew = (frame.delta1 - w) % 2 == 0
    ells = []
    if gate0:
        ells.append(0)
    if gatew and (w != 0 or not gate0):
        ells.append(w)
    for ell in ells:
        ch, cl = _linear_coeff(0.0, ell, q)
        v, e = airy.cubic_path_integral(ch, 0.0, mu, 0.0, float(N), tol, cl)
        parts[f"integral_{ell}"] = complex(pref * unit_phase(g_phase_val(frame, ell)) * v)
        quad += abs(pref) * float(e)
    value = sum(parts.values())
    k = _audit("kappa_prime", kappa_prime)
    scale = mu * N * math.sqrt(q) + math.sqrt(q) * math.log(w + 2 * q)
    return ApproxResult(value=complex(value), err_radius=k * scale + quad, breakdown=parts,
                        quadrature_err=quad, bounds={"kappa_prime": k, "scale": scale},
                        info={"w": w, "delta1": frame.delta1, "saddle_terms": int(ms.size)})


def g_phase_val(frame: RationalFrame, ell: int) -> float:
    return float(frame.g_phase_num(ell)) / (8 * frame.q)


def cubic_upper_bound(a: int, b: int, q: int, mu: float, N: int, kappa_pp: float | None = None) -> float:
    """Audited bound for ``|sum_{n<=N} e((an + bn^2)/q + mu n^3)|``."""
    if math.gcd(b, q) != 1:
        raise PreconditionError("gcd(b, q) = 1 required")
    if not mu > 0:
        raise PreconditionError("mu > 0 required")
    k = _audit("kappa_pp", kappa_pp)
    return k * (math.sqrt(mu) * N ** 1.5 * math.sqrt(q) + min(N, mu ** (-1 / 3)) / math.sqrt(q)
                + mu * N * math.sqrt(q) + math.sqrt(q) * math.log(mu * N * N * q + 2 * q))


def rational_to_frame(a: int, b: int, q: int) -> tuple[int, int, int]:
    """Rewrite ``(a n + b n^2)/q`` in the ``2q`` convention ``(a', b', q')``."""
    if q % 2:
        return 2 * a, 2 * b, q
    return a, b, q // 2
