"""Seed-pinned instance generators and verification suites.

Each ``suite_*`` function returns a :class:`SuiteResult`; the CLI ``verify``
command, the calibration sweep and the acceptance tests all go through
these, so an instance list is a pure function of ``(seed, counts)``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import airy, oracle, transform
from .gauss import RationalFrame, b_star, gauss_g
from .numkit import CubicPhase, unit_phase

LADDER = (2 ** 8, 2 ** 10, 2 ** 12, 2 ** 14)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    worst: float
    records: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    seconds: float = 0.0

    def failures(self):
        return [r for r in self.records if not r.get("ok", True)]


def _coprime_b(rng, q, span=None):
    span = span or 4 * q + 4
    while True:
        b = int(rng.integers(-span, span + 1))
        if math.gcd(b, q) == 1:
            return b


# ---------------------------------------------------------------------------
# arithmetic
# ---------------------------------------------------------------------------

def suite_gauss_identity(qmax: int = 50, tol: float = 1e-10) -> SuiteResult:
    """``G(a+m, b; 2q) = e(b*(a+m)^2/8q) G(0, b+delta q; 2q) 1_E`` for all ``a, m`` mod ``2q``.

    The left side is a direct ``2q x 2q`` phase-matrix sum, independent of
    the FFT used when ``b*`` is selected.
    """
    t0 = time.perf_counter()
    worst, count, records = 0.0, 0, []
    for q in range(1, qmax + 1):
        h = np.arange(2 * q, dtype=np.int64)
        c = np.arange(2 * q, dtype=np.int64)
        lin = np.outer(c, h) % (2 * q)
        for b in range(2 * q):
            if math.gcd(b, q) != 1:
                continue
            G = np.exp(1j * np.pi * ((lin + b * (h * h % (4 * q))) % (2 * q)) / q).sum(axis=1) / (2 * math.sqrt(q))
            frame = RationalFrame(0, b, q)
            bs = b_star(b, q)
            for a in range(2 * q):
                am = (a + h) % (8 * q)
                rhs = unit_phase((bs * (am * am % (8 * q)) % (8 * q)) / (8.0 * q)) * frame.g0
                rhs = np.where((b * q + a + h) % 2 == 0, rhs, 0)
                err = float(np.max(np.abs(G[(a + h) % (2 * q)] - rhs)))
                count += 2 * q
                if err > worst:
                    worst = err
                if err >= tol:
                    records.append({"q": q, "b": b, "a": a, "err": err, "ok": False})
    return SuiteResult("gauss-identity", worst < tol, worst, records,
                       {"checked": count, "qmax": qmax}, time.perf_counter() - t0)


def suite_gauss_modulus(qmax: int = 50, tol: float = 1e-12) -> SuiteResult:
    t0 = time.perf_counter()
    worst, records = 0.0, []
    for q in range(1, qmax + 1):
        for b in range(2 * q):
            if math.gcd(b, q) != 1:
                continue
            mod = abs(gauss_g(b, q))
            dev = min(mod, abs(mod - 1.0))
            worst = max(worst, dev)
            expected = 1.0 if (b * q) % 2 == 0 else 0.0
            ok = dev < tol and abs(mod - expected) < 1e-9
            if not ok:
                records.append({"q": q, "b": b, "modulus": mod, "ok": False})
    return SuiteResult("gauss-modulus", not records, worst, records, {"qmax": qmax}, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# integrals
# ---------------------------------------------------------------------------

MU_GRID = (1e-8, 1e-6, 1e-4, 1e-2)


def s_grid(n: int = 40) -> np.ndarray:
    return np.geomspace(0.05, 100.0, n)


def suite_stationary_phase(tol: float = 1e-10) -> SuiteResult:
    t0 = time.perf_counter()
    records, worst_margin = [], math.inf
    for mu in MU_GRID:
        for s in s_grid():
            h = airy.hi_complete(mu, float(s), tol)
            approx, bound = airy.hi_stationary(mu, float(s))
            dev = abs(h - approx)
            margin = bound + tol - dev
            worst_margin = min(worst_margin, margin)
            records.append({"mu": mu, "s": float(s), "dev": dev, "bound": bound, "margin": margin, "ok": margin >= 0})
    ok = all(r["ok"] for r in records)
    return SuiteResult("stationary-phase", ok, worst_margin, records, {"points": len(records)}, time.perf_counter() - t0)


def suite_airy_crosscheck(tol: float = 1e-8, s_values=None) -> SuiteResult:
    t0 = time.perf_counter()
    records, worst = [], 0.0
    grid = s_grid() if s_values is None else s_values
    for mu in MU_GRID:
        for s in grid:
            val = airy.ai_complete(mu, float(s))
            ref = oracle.airy_reference(mu, float(s))
            err = abs(val - ref)
            worst = max(worst, err)
            records.append({"mu": mu, "s": float(s), "value": val.real, "reference": ref, "err": err,
                            "imag": val.imag, "ok": err <= tol})
    ok = all(r["ok"] for r in records)
    return SuiteResult("airy-crosscheck", ok, worst, records, {"points": len(records)}, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# propositions
# ---------------------------------------------------------------------------

def prop1_instances(count: int = 500, seed: int = 7) -> list[dict]:
    """Random admissible instances for the main-theorem inequality.

    ``q <= 16``, ``N <= 2000``, ``mu <= 1/(12 q N^2)``.  The quadratic
    coefficient is drawn from a mixture: 60% small (``|beta| <= 2/(qN)``,
    the regime left after a Diophantine reduction), 25% with the inflection
    point ``-omega`` inside ``[0, N]`` (two-saddle and single-saddle ranges
    both populated), 15% arbitrary ``beta in [-1/2, 1/2)`` with ``N`` capped
    so that ``M = M2 - M1`` stays below about 4000 terms.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        q = int(rng.integers(1, 17))
        b = _coprime_b(rng, q)
        a = int(rng.integers(-4 * q, 4 * q + 1))
        N = int(np.exp(rng.uniform(0, math.log(2000))))
        N = max(1, min(N, 2000))
        mu = 10 ** rng.uniform(-3, 0) / (12 * q * N * N)
        kind = rng.uniform()
        if kind < 0.60:
            beta = rng.uniform(-2, 2) / (q * N)
        elif kind < 0.85:
            beta = -3 * mu * N * rng.uniform(0, 1)
        else:
            beta = rng.uniform(-0.5, 0.5)
            N = max(1, min(N, int(1000 / (q * max(abs(beta), 1e-9)))))
            mu = min(mu, 1 / (12 * q * N * N))
        alpha = rng.uniform(-0.5, 0.5)
        out.append({"N": N, "a": a, "b": b, "q": q, "alpha": alpha, "beta": float(beta), "mu": float(mu)})
    return out


def prop2_instances(count: int = 200, seed: int = 11) -> list[dict]:
    """Instances with ``(|beta| + mu N) q^3 < 0.1``."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        q = int(rng.integers(1, 5))
        b = _coprime_b(rng, q)
        a = int(rng.integers(-4 * q, 4 * q + 1))
        N = int(np.exp(rng.uniform(math.log(20), math.log(2000))))
        budget = 0.1 / q ** 3 * rng.uniform(0.02, 0.99)
        share = rng.uniform(0.05, 0.95)
        mu = min(budget * share / N, 1 / (12 * q * N * N))
        if rng.uniform() < 0.5:
            beta = -3 * mu * N * rng.uniform(0, 1)
        else:
            beta = rng.choice([-1.0, 1.0]) * budget * (1 - share)
        if (abs(beta) + mu * N) * q ** 3 >= 0.1:
            continue
        alpha = rng.uniform(-0.5, 0.5)
        out.append({"N": N, "a": a, "b": b, "q": q, "alpha": alpha, "beta": float(beta), "mu": float(mu)})
    return out


def _run_prop(inst, which, tol):
    frame = RationalFrame(inst["a"], inst["b"], inst["q"])
    phase = CubicPhase(inst["alpha"], inst["beta"], inst["mu"])
    ref = oracle.direct_C(inst["N"], inst["a"], inst["b"], inst["q"], phase)
    if which == 1:
        res = transform.eval_main_theorem(inst["N"], frame, phase, tol)
    else:
        res = transform.eval_main_theorem2(inst["N"], frame, phase, tol)
    err = abs(complex(ref.value) - res.value)
    return res, err, ref


def suite_prop1(count: int = 500, seed: int = 7, tol: float = 1e-9) -> SuiteResult:
    t0 = time.perf_counter()
    records = []
    for inst in prop1_instances(count, seed):
        res, err, ref = _run_prop(inst, 1, tol)
        radius = res.err_radius + ref.est_err
        records.append(dict(inst, err=err, err_radius=radius, margin=radius - err, ok=err <= radius,
                            terms=res.info["one_saddle_terms"] + res.info["two_saddle_terms"]))
    worst = min(r["margin"] for r in records)
    return SuiteResult("prop1", all(r["ok"] for r in records), worst, records,
                       {"instances": count, "seed": seed,
                        "max_err_over_radius": max(r["err"] / r["err_radius"] for r in records)},
                       time.perf_counter() - t0)


def suite_prop2(count: int = 200, seed: int = 11, tol: float = 1e-10) -> SuiteResult:
    t0 = time.perf_counter()
    records = []
    for inst in prop2_instances(count, seed):
        res, err, ref = _run_prop(inst, 2, tol)
        radius = res.err_radius + ref.est_err
        frame = RationalFrame(inst["a"], inst["b"], inst["q"])
        phase = CubicPhase(inst["alpha"], inst["beta"], inst["mu"])
        cls = transform.classify(phase, inst["N"], inst["q"])
        r1_part = abs(frame.g0) / math.sqrt(inst["q"]) * transform.r1_bound(cls, phase, inst["q"], inst["N"])
        records.append(dict(inst, err=err, err_radius=radius, margin=radius - err, ok=err <= radius,
                            R2_part=res.bounds["R2_scaled"], R1_part=r1_part))
    below = sum(r["R2_part"] < r["R1_part"] for r in records) / len(records)
    worst = min(r["margin"] for r in records)
    return SuiteResult("prop2", all(r["ok"] for r in records) and below >= 0.95, worst, records,
                       {"instances": count, "seed": seed, "fraction_R2_below_R1": below},
                       time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# ratio ladders
# ---------------------------------------------------------------------------

def _ladder_summary(name, per_n, records, t0, factor=4.0):
    maxima = {n: max(v) for n, v in per_n.items()}
    vals = list(maxima.values())
    spread = max(vals) / min(vals) if min(vals) > 0 else math.inf
    ns = np.log(np.array(list(maxima.keys()), float))
    slope = float(np.polyfit(ns, np.log(np.maximum(vals, 1e-300)), 1)[0])
    return SuiteResult(name, spread < factor, spread, records,
                       {"ladder_max": {str(k): v for k, v in maxima.items()}, "spread": spread,
                        "log_slope": slope, "overall_max": max(vals)},
                       time.perf_counter() - t0)


def thm1_instances(N: int, count: int, seed: int) -> list[dict]:
    """Instances stratified by denominator.

    ``q`` is log-uniform on ``[1, 4N]``; ``beta = b/(2q) + eta`` with
    ``|eta| < 1/(8qN)`` and ``alpha = a/(2q) + eps``, so every rung of the
    ladder sees the same spread of arithmetic regimes (uniform ``beta``
    would almost always give ``q`` comparable to ``N``).
    """
    rng = np.random.default_rng([seed, N])
    out = []
    for _ in range(count):
        q = int(round(math.exp(rng.uniform(0, math.log(4 * N)))))
        b = _coprime_b(rng, q, q)
        eta = rng.uniform(-0.9, 0.9) / (8 * q * N)
        beta = b / (2 * q) + eta
        alpha = int(rng.integers(-q, q)) / (2 * q) + rng.uniform(-1, 1) / (4 * q)
        d = transform.theorem1_data(alpha, beta, 1e-30, N)
        mu = rng.uniform(0.01, 0.99) / (6 * d["q"] * N * N)
        out.append({"alpha": float(alpha), "beta": float(beta), "mu": float(mu), "N": N})
    return out


def suite_thm1_ratio(ladder=LADDER, count: int = 50, seed: int = 3, tol: float = 1e-9) -> SuiteResult:
    t0 = time.perf_counter()
    per_n, records = {}, []
    for N in ladder:
        per_n[N] = []
        for inst in thm1_instances(N, count, seed):
            res = transform.eval_theorem_1(inst["alpha"], inst["beta"], inst["mu"], N, tol, kappa=1.0)
            ref = oracle.direct_H(inst["alpha"], inst["beta"], inst["mu"], N).value
            q = res.info["q"]
            ratio = abs(ref - res.value) / (math.sqrt(q) * math.log(2 * q))
            per_n[N].append(ratio)
            records.append(dict(inst, q=q, branch=res.info["branch"], ratio=ratio))
    return _ladder_summary("thm1-ratio", per_n, records, t0)


def vdc_instances(N: int, count: int, seed: int) -> list[dict]:
    rng = np.random.default_rng([seed, N, 1])
    out = []
    while len(out) < count:
        mu = 10 ** rng.uniform(-2, math.log10(0.99)) / (6 * N * N)
        alpha = rng.uniform(-0.5, 0.5)
        if rng.uniform() < 0.5:
            beta = rng.uniform(1.0 / N, 0.5) * 1.0001
        else:
            beta = -rng.uniform(max(1.0 / N, 6 * mu * N), 0.5)
        if not transform.vdc_preconditions(alpha, beta, mu, N) and beta < 0.5:
            out.append({"alpha": float(alpha), "beta": float(beta), "mu": float(mu), "N": N})
    return out


def vdc_ratio(inst) -> tuple[float, dict]:
    new, Np, pref, rep = transform.vdc_step(inst["alpha"], inst["beta"], inst["mu"], inst["N"])
    lhs = oracle.direct_H(inst["alpha"], inst["beta"], inst["mu"], inst["N"]).value
    rhs = pref * oracle.direct_H(new.alpha, new.beta, new.mu, Np).value
    return abs(lhs - rhs) / rep.remainder_total, {"N_prime": Np, "remainder": rep.remainder_total}


def suite_vdc_ratio(ladder=LADDER, count: int = 50, seed: int = 5) -> SuiteResult:
    t0 = time.perf_counter()
    per_n, records = {}, []
    for N in ladder:
        per_n[N] = []
        for inst in vdc_instances(N, count, seed):
            ratio, extra = vdc_ratio(inst)
            per_n[N].append(ratio)
            records.append(dict(inst, ratio=ratio, **extra))
    return _ladder_summary("vdc-ratio", per_n, records, t0)


def rational_instances(N: int, count: int, seed: int) -> list[dict]:
    rng = np.random.default_rng([seed, N, 2])
    out = []
    for _ in range(count):
        q = int(rng.integers(1, 17))
        b = _coprime_b(rng, q)
        a = int(rng.integers(-4 * q, 4 * q + 1))
        mu = 10 ** rng.uniform(-3, 0) / (N * N)
        out.append({"a": a, "b": b, "q": q, "mu": float(mu), "N": N})
    return out


def rational_ratio(inst, tol=1e-9) -> tuple[float, dict]:
    res = transform.eval_rational_cubic(inst["N"], inst["a"], inst["b"], inst["q"], inst["mu"], tol, kappa_prime=1.0)
    ref = oracle.direct_C_primed(inst["N"], inst["a"], inst["b"], inst["q"], inst["mu"]).value
    return abs(ref - res.value) / res.bounds["scale"], {"w": res.info["w"]}


def suite_rational_ratio(ladder=LADDER, count: int = 50, seed: int = 9) -> SuiteResult:
    t0 = time.perf_counter()
    per_n, records = {}, []
    for N in ladder:
        per_n[N] = []
        for inst in rational_instances(N, count, seed):
            ratio, extra = rational_ratio(inst)
            per_n[N].append(ratio)
            records.append(dict(inst, ratio=ratio, **extra))
    return _ladder_summary("rational-ratio", per_n, records, t0)


# ---------------------------------------------------------------------------
# Poisson identity and oracle self-consistency
# ---------------------------------------------------------------------------

def poisson_instances(count: int = 50, seed: int = 13) -> list[dict]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        q = int(rng.integers(1, 9))
        b = _coprime_b(rng, q)
        a = int(rng.integers(-4 * q, 4 * q + 1))
        N = int(rng.integers(1, 301))
        mu = 10 ** rng.uniform(-7, -2)
        beta = rng.uniform(-0.5, 0.5) * (0.05 if rng.uniform() < 0.7 else 1.0)
        out.append({"N": N, "a": a, "b": b, "q": q, "alpha": float(rng.uniform(-0.5, 0.5)),
                    "beta": float(beta), "mu": float(mu)})
    return out


def suite_poisson(count: int = 50, seed: int = 13, tol: float = 1e-6) -> SuiteResult:
    t0 = time.perf_counter()
    records = []
    for inst in poisson_instances(count, seed):
        frame = RationalFrame(inst["a"], inst["b"], inst["q"])
        phase = CubicPhase(inst["alpha"], inst["beta"], inst["mu"])
        val = transform.poisson_decompose(inst["N"], frame, phase)
        ref = oracle.direct_C(inst["N"], inst["a"], inst["b"], inst["q"], phase).value
        err = abs(val - ref)
        records.append(dict(inst, err=err, ok=err < tol))
    worst = max(r["err"] for r in records)
    return SuiteResult("poisson", worst < tol, worst, records, {"instances": count}, time.perf_counter() - t0)


SUITES = {
    "gauss-identity": suite_gauss_identity,
    "stationary-phase": suite_stationary_phase,
    "airy-crosscheck": suite_airy_crosscheck,
    "prop1": suite_prop1,
    "prop2": suite_prop2,
    "thm1-ratio": suite_thm1_ratio,
    "vdc-ratio": suite_vdc_ratio,
    "rational-ratio": suite_rational_ratio,
    "poisson": suite_poisson,
}
