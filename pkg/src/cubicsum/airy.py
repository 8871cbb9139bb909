"""Cubic-phase oscillatory integrals: Airy-Hardy integrals and friends.

Every integral here has the form ``int e(P(t)) dt`` along a real interval,
possibly half-infinite, with ``P(t) = c3*t^3 + c2*t^2 + c1*t`` and
``c3 > 0``.  Instead of fighting the oscillation on the real axis, the path
is deformed into the complex plane:

* anchors are the endpoints and the real critical points of ``P`` lying
  between them (the inflection point instead when there are none);
* consecutive anchors are joined by a 45-degree "tent" that leans into the
  half plane where ``|e(P)|`` decreases; ``Im P >= 0`` on every tent;
* a half-infinite interval leaves its last anchor along the ray of angle
  ``pi/6``, inside the decay sector of ``e(c3 t^3)``.

The integrand is evaluated by a local Taylor expansion around the anchor of
each leg, ``P(p + z) = P(p) + P'(p) z + P''(p)/2 z^2 + c3 z^3``, with
``P(p) mod 1`` and the two derivatives formed in double-double.  This keeps
the result accurate even when the saddle phase ``2 s^{3/2}/sqrt(mu)`` is of
order ``1e8``.  Each leg is covered by geometrically growing panels starting
at its anchor, integrated with Gauss-Legendre rules of order 10 and 20 and
bisected until the two agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numkit import (
    TWO_PI,
    dd_add,
    dd_mul_d,
    poly_derivs_dd,
    poly_phase_frac,
    two_prod,
    unit_phase,
)

DEFAULT_TOL = 1e-10

_X10, _W10 = np.polynomial.legendre.leggauss(10)
_X20, _W20 = np.polynomial.legendre.leggauss(20)
_NODES = np.concatenate([_X10, _X20])
_PANEL_BLOCK = 150_000
_MAX_ROUNDS = 48
_RAY = np.exp(1j * math.pi / 6)
_SQRT_HALF = math.sqrt(0.5)


class QuadratureError(RuntimeError):
    """The requested tolerance was not reached; ``achieved`` holds the estimate."""

    def __init__(self, msg: str, achieved: float):
        super().__init__(f"{msg} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


@dataclass(frozen=True)
class OscillatoryIntegral:
    """Request for ``int_lower^{lower+length} e(mu t^3 - 3 s t) dt``."""

    lower: float
    length: float
    mu: float
    s: float
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


# ---------------------------------------------------------------------------
# path construction
# ---------------------------------------------------------------------------

def _anchor_points(c1h, c1l, c2, c3, lo, hi):
    """Sorted anchors per item as an ``(n, 4)`` array padded with NaN."""
    n = lo.shape[0]
    # discriminant c2^2 - 3 c3 c1, in double-double
    sh, sl = two_prod(c2, c2)
    th, tl = dd_mul_d(c1h, c1l, -3.0 * c3)
    dh, dl = dd_add(sh, sl, th, tl)
    disc = dh + dl
    pts = np.full((n, 4), np.nan)
    pts[:, 0] = lo
    has_roots = disc > 0
    root = np.sqrt(np.where(has_roots, disc, 0.0))
    qq = -(c2 + np.where(c2 >= 0, root, -root))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        r1 = qq / (3.0 * c3)
        r2 = np.where(qq != 0, (c1h + c1l) / qq, r1)
    infl = -c2 / (3.0 * c3) * np.ones(n)
    cand = np.stack([np.where(has_roots, np.minimum(r1, r2), infl),
                     np.where(has_roots, np.maximum(r1, r2), np.nan)], axis=1)
    inside = (cand > lo[:, None]) & (cand < hi[:, None])
    cand = np.where(inside, cand, np.nan)
    pts[:, 1:3] = np.sort(cand, axis=1)
    pts[:, 3] = np.where(np.isfinite(hi), hi, np.nan)
    # compact NaNs to the right while keeping order
    order = np.argsort(np.isnan(pts), axis=1, kind="stable")
    return np.take_along_axis(pts, order, axis=1)


def _build_legs(c1h, c1l, c2, c3, lo, hi):
    """Flatten all legs of all items into parallel arrays."""
    n = lo.shape[0]
    pts = _anchor_points(c1h, c1l, c2, c3, lo, hi)
    item, anchor, direc, length, weight = [], [], [], [], []
    idx = np.arange(n)
    for k in range(3):
        p, r = pts[:, k], pts[:, k + 1]
        ok = np.isfinite(p) & np.isfinite(r) & (r > p)
        if not ok.any():
            continue
        ii, pp, rr = idx[ok], p[ok], r[ok]
        mid = 0.5 * (pp + rr)
        d1, _ = poly_derivs_dd(mid, c1h[ok], c1l[ok], c2[ok], c3[ok])
        up = np.where(d1 >= 0, 1.0, -1.0)
        half = (rr - pp) * _SQRT_HALF
        item += [ii, ii]
        anchor += [pp, rr]
        direc += [(1 + 1j * up) * _SQRT_HALF, (-1 + 1j * up) * _SQRT_HALF]
        length += [half, half]
        weight += [np.ones_like(pp), -np.ones_like(pp)]
    inf_hi = ~np.isfinite(hi)
    if inf_hi.any():
        last = np.array([row[np.isfinite(row)][-1] for row in pts[inf_hi]])
        ii = idx[inf_hi]
        item.append(ii)
        anchor.append(last)
        direc.append(np.full(last.shape, _RAY))
        length.append(np.full(last.shape, np.nan))  # filled once derivatives are known
        weight.append(np.ones_like(last))
    item = np.concatenate(item)
    anchor = np.concatenate(anchor)
    direc = np.concatenate(direc)
    length = np.concatenate(length)
    weight = np.concatenate(weight)
    return item, anchor, direc, length, weight


def _leg_scales(p1, p2, c3):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        s1 = np.where(p1 != 0, 1.0 / np.abs(p1), np.inf)
        s2 = np.where(p2 != 0, 1.0 / np.sqrt(np.abs(p2)), np.inf)
    s3 = c3 ** (-1.0 / 3.0)
    return 0.25 * np.minimum(np.minimum(s1, s2), s3)


def _ray_length(p1, p2, c3):
    # Im P along the ray dominates each of c3 r^3, p1 r/2, p2 r^2 sin(pi/3)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        l1 = np.where(p1 > 0, 14.0 / p1, np.inf)
        l2 = np.where(p2 > 0, np.sqrt(8.1 / p2), np.inf)
    l3 = (7.0 / c3) ** (1.0 / 3.0)
    return np.minimum(np.minimum(l1, l2), l3)


def _initial_panels(w, length):
    """Geometric panels ``[0,w], [w,2w], [2w,4w], ...`` clipped to each leg."""
    w = np.minimum(w, length)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio = np.where(length > 0, length / w, 1.0)
    count = np.ceil(np.log2(np.maximum(ratio, 1.0))).astype(np.int64) + 1
    leg = np.repeat(np.arange(length.shape[0]), count)
    start = np.cumsum(count) - count
    k = np.arange(leg.shape[0]) - start[leg]
    lo = np.where(k == 0, 0.0, w[leg] * np.exp2(k - 1.0))
    hi = np.minimum(w[leg] * np.exp2(k.astype(float)), length[leg])
    lo = np.minimum(lo, length[leg])
    keep = hi > lo
    return leg[keep], lo[keep], hi[keep]


def _eval_panels(leg, a, b, frac0, p1, p2, c3, direc):
    """Gauss-Legendre 20 estimate and |G20 - G10| per panel."""
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    rho = mid[:, None] + half[:, None] * _NODES[None, :]
    d = direc[leg][:, None]
    z = d * rho
    ph = frac0[leg][:, None] + z * (p1[leg][:, None] + z * (p2[leg][:, None] + z * c3[leg][:, None]))
    vals = np.exp((1j * TWO_PI) * ph)
    g10 = vals[:, :10] @ _W10
    g20 = vals[:, 10:] @ _W20
    scale = (d[:, 0] * half)
    noise = 64 * np.finfo(float).eps * (np.abs(vals[:, 10:]) @ _W20) * np.abs(half)
    return g20 * scale, np.abs(g20 - g10) * np.abs(half), noise


def cubic_path_integral(c1, c2, c3, lo, hi, tol: float = DEFAULT_TOL, c1_lo=None):
    """Batched ``int_lo^hi e(c3 t^3 + c2 t^2 + c1 t) dt`` along the real axis.

    ``hi`` may be ``+inf``; ``lo`` must be finite and ``lo <= hi``.  ``c1``
    may carry a low-order part ``c1_lo`` (double-double).  Returns
    ``(values, error_estimates)`` as arrays.
    """
    lo, hi, c1, c2, c3 = np.broadcast_arrays(
        np.asarray(lo, float), np.asarray(hi, float), np.asarray(c1, float),
        np.asarray(c2, float), np.asarray(c3, float))
    shape = lo.shape
    lo, hi, c1, c2, c3 = (np.ascontiguousarray(x).ravel() for x in (lo, hi, c1, c2, c3))
    c1l = np.zeros_like(c1) if c1_lo is None else np.broadcast_to(np.asarray(c1_lo, float), shape).ravel()
    if np.any(c3 <= 0):
        raise ValueError("cubic coefficient must be positive")
    if np.any(~np.isfinite(lo)) or np.any(hi < lo):
        raise ValueError("need finite lo <= hi")
    n = lo.shape[0]
    values = np.zeros(n, dtype=complex)
    errors = np.zeros(n)
    active = hi > lo
    if not active.any():
        return values.reshape(shape), errors.reshape(shape)
    sel = np.flatnonzero(active)
    item, anchor, direc, length, weight = _build_legs(c1[sel], c1l[sel], c2[sel], c3[sel], lo[sel], hi[sel])
    item = sel[item]
    lc3 = c3[item]
    frac0 = poly_phase_frac(anchor, c1[item], c1l[item], c2[item], lc3)
    p1, p2 = poly_derivs_dd(anchor, c1[item], c1l[item], c2[item], lc3)
    ray = np.isnan(length)
    if ray.any():
        length[ray] = _ray_length(p1[ray], p2[ray], lc3[ray])
    w = _leg_scales(p1, p2, lc3)
    leg, a, b = _initial_panels(w, length)

    per_leg = np.zeros(anchor.shape[0], dtype=complex)
    per_leg_err = np.zeros(anchor.shape[0])
    tau = tol / 16.0
    for _ in range(_MAX_ROUNDS):
        if leg.size == 0:
            break
        bad_parts = []
        for s0 in range(0, leg.size, _PANEL_BLOCK):
            sl = slice(s0, s0 + _PANEL_BLOCK)
            val, est, noise = _eval_panels(leg[sl], a[sl], b[sl], frac0, p1, p2, lc3, direc)
            good = est <= np.maximum(tau, noise)
            np.add.at(per_leg, leg[sl][good], val[good])
            np.add.at(per_leg_err, leg[sl][good], est[good])
            bad_parts.append((leg[sl][~good], a[sl][~good], b[sl][~good], val[~good], est[~good]))
        leg = np.concatenate([p[0] for p in bad_parts])
        a = np.concatenate([p[1] for p in bad_parts])
        b = np.concatenate([p[2] for p in bad_parts])
        last_val = np.concatenate([p[3] for p in bad_parts])
        last_est = np.concatenate([p[4] for p in bad_parts])
        if leg.size == 0:
            break
        m = 0.5 * (a + b)
        leg, a, b = np.concatenate([leg, leg]), np.concatenate([a, m]), np.concatenate([m, b])
    else:
        # budget exhausted: keep the best estimates of the remaining panels
        np.add.at(per_leg, leg[: last_val.size], last_val)
        np.add.at(per_leg_err, leg[: last_est.size], last_est)
    if not np.all(np.isfinite(per_leg)):
        raise QuadratureError("non-finite integrand on the deformed path", float("inf"))
    np.add.at(values, item, weight * per_leg)
    np.add.at(errors, item, per_leg_err)
    return values.reshape(shape), errors.reshape(shape)


def checked(values, errors, tol):
    worst = float(np.max(errors)) if np.size(errors) else 0.0
    if worst > tol:
        raise QuadratureError("quadrature tolerance not reached", worst)
    return values


def cubic_integral_general(c1, c2, c3, lo, hi, tol=DEFAULT_TOL, c1_lo=None):
    """Like :func:`cubic_path_integral` but ``lo`` may be ``-inf`` and ``hi < lo`` is oriented."""
    lo, hi, c1, c2, c3 = (np.asarray(x, float) for x in np.broadcast_arrays(lo, hi, c1, c2, c3))
    c1l = np.zeros_like(c1) if c1_lo is None else np.broadcast_to(np.asarray(c1_lo, float), c1.shape)
    flip = hi < lo
    a = np.where(flip, hi, lo)
    b = np.where(flip, lo, hi)
    out = np.zeros(a.shape, dtype=complex)
    err = np.zeros(a.shape)
    left = ~np.isfinite(a)  # -inf lower limit
    both = left & ~np.isfinite(b)
    fin = ~left
    if fin.any():
        v, e = cubic_path_integral(c1[fin], c2[fin], c3[fin], a[fin], b[fin], tol, c1l[fin])
        out[fin], err[fin] = v, e
    only_left = left & ~both
    if only_left.any():
        # t = -u, then conjugate: int_{-inf}^{B} e(P) = conj(int_{-B}^{inf} e(c3 u^3 - c2 u^2 + c1 u) du)
        v, e = cubic_path_integral(c1[only_left], -c2[only_left], c3[only_left], -b[only_left],
                                   np.inf, tol, c1l[only_left])
        out[only_left], err[only_left] = np.conj(v), e
    if both.any():
        split = -c2[both] / (3.0 * c3[both])
        v1, e1 = cubic_path_integral(c1[both], c2[both], c3[both], split, np.inf, tol, c1l[both])
        v2, e2 = cubic_path_integral(c1[both], -c2[both], c3[both], -split, np.inf, tol, c1l[both])
        out[both], err[both] = v1 + np.conj(v2), e1 + e2
    out = np.where(flip, -out, out)
    return out, err


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def hi_truncated(req: OscillatoryIntegral) -> complex:
    """``int_{lower}^{lower+length} e(mu t^3 - 3 s t) dt`` (oriented)."""
    if req.length == 0:
        return 0j
    c1, c1_lo = two_prod(-3.0, req.s)
    v, e = cubic_integral_general(c1, 0.0, req.mu, req.lower, req.lower + req.length, req.tol, c1_lo)
    return complex(checked(v, e, req.tol))


def hi_complete(mu: float, s: float, tol: float = DEFAULT_TOL) -> complex:
    """``int_0^inf e(mu t^3 - 3 s t) dt``."""
    if not mu > 0:
        raise ValueError("mu must be positive")
    c1, c1_lo = two_prod(-3.0, float(s))  # 3s is not exact in binary64
    v, e = cubic_path_integral(c1, 0.0, mu, 0.0, np.inf, tol, c1_lo)
    return complex(checked(v, e, tol))


def hi_complete_many(mu: float, s, tol: float = DEFAULT_TOL):
    s = np.asarray(s, float)
    c1, c1_lo = two_prod(-3.0, s)
    v, e = cubic_path_integral(c1, 0.0, mu, np.zeros_like(s), np.inf, tol, c1_lo)
    return checked(v, e, tol)


def ai_complete(mu: float, s: float, tol: float = DEFAULT_TOL) -> complex:
    """``Hi(mu,s) + conj(Hi(mu,s))``, the full-line integral; real valued."""
    return complex(2.0 * hi_complete(mu, s, tol / 2).real, 0.0)


def hi_stationary(mu: float, s: float) -> tuple[complex, float]:
    """Leading saddle-point term of ``Hi(mu, s)`` and its guaranteed error ``1/(pi s)``."""
    if not s > 0:
        raise ValueError("stationary-phase approximation needs s > 0")
    amp = (36.0 * mu * s) ** -0.25
    return amp * unit_phase(0.125 - saddle_phase(mu, s)), 1.0 / (math.pi * s)


def saddle_phase(mu, s):
    """``2 s^{3/2} / sqrt(mu)`` modulo 1, in double-double (vectorised)."""
    from .numkit import dd_frac, two_sum

    s = np.asarray(s, float)
    mu = np.asarray(mu, float)
    # r = sqrt(s/mu) refined once in double-double, phase = 2 s r
    r = np.sqrt(s / mu)
    rh, rl = two_prod(r, r)
    # residual s/mu - r^2  ~  (s - mu r^2)/mu
    mh, ml = dd_mul_d(rh, rl, mu)
    eh, el = dd_add(s, 0.0, -mh, -ml)
    corr = (eh + el) / (mu * 2.0 * r)
    rh, rl = two_sum(r, corr)
    ph, pl = dd_mul_d(rh, rl, 2.0 * s)
    out = dd_frac(ph, pl)
    return float(out) if out.ndim == 0 else out


def phi_kernel(x: float, mu: float, s: float) -> complex:
    """``(1/(6 pi i)) e(mu x^3 - 3 s x) / (mu x^2 - s)``: boundary term of one integration by parts."""
    den = mu * x * x - s
    if den == 0:
        raise ValueError("mu x^2 = s: saddle point at the boundary")
    c1, c1_lo = two_prod(-3.0, s)
    ph = poly_phase_frac(x, c1, c1_lo, 0.0, mu)
    return complex(unit_phase(ph) / (6j * math.pi * den))


def cubic_phase_integral(c1: float, c2: float, c3: float, upper: float, tol: float = DEFAULT_TOL) -> complex:
    """``int_0^upper e(c1 t + c2 t^2 + c3 t^3) dt``.

    Equivalent to recentring at ``t = -c2/(3 c3)`` and evaluating a
    truncated Airy-Hardy integral with the constant phase in front; the
    recentring is carried out anchor by anchor so that no large constant
    phase is ever rounded.
    """
    if not c3 > 0:
        raise ValueError("c3 must be positive")
    if upper == 0:
        return 0j
    v, e = cubic_integral_general(c1, c2, c3, 0.0, upper, tol)
    return complex(checked(v, e, tol))
