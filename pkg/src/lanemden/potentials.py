"""Riesz and Wolff potentials of radial measures, plus weighted potentials.

The two-term comparable form

    A sigma(x) = sigma(B(0,|x|)) / |x|^d + int_{|y| >= |x|} |y|^-d dsigma(y)

is the working operator of the criteria and the solver.  ``riesz_exact``
integrates the true kernel ``|x - y|^-d`` and exists for validation.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate
from scipy.special import gammaln, hyp2f1

from .exponents import ExponentSet
from .grid import GridFunction, RadialGrid
from .measures import (
    INF,
    RadialMeasure,
    ball_mass,
    ball_mass_offcenter,
    moment,
    power_integral,
    sphere_area,
)


# --- exact kernel -----------------------------------------------------------

def sphere_average(x, rho, d: float, n: int):
    """Average of ``|x - y|^-d`` over the sphere ``|y| = rho``.

    Closed form ``R^-d 2F1(d/2, d/2 - n/2 + 1; n/2; (r/R)^2)`` with
    ``r = min(|x|, rho)`` and ``R = max(|x|, rho)``; infinite on the sphere
    itself when ``d >= n - 1``.
    """
    x, rho = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(rho, dtype=float))
    big = np.maximum(x, rho)
    small = np.minimum(x, rho)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(big > 0, (small / big) ** 2, 0.0)
        val = big ** (-d) * hyp2f1(0.5 * d, 0.5 * d - 0.5 * n + 1.0, 0.5 * n, z)
    on_sphere = z >= 1.0
    if np.any(on_sphere):
        if d >= n - 1:
            edge = INF
        else:
            c, a, b = 0.5 * n, 0.5 * d, 0.5 * d - 0.5 * n + 1.0
            edge = math.exp(gammaln(c) + gammaln(c - a - b) - gammaln(c - a) - gammaln(c - b))
        val = np.where(on_sphere, big ** (-d) * edge, val)
    val = np.where(big == 0, INF, val)
    return val if val.ndim else float(val)


def sphere_average_quadrature(x: float, rho: float, d: float, n: int) -> float:
    """Angular quadrature of the same average (independent check)."""
    def f(theta):
        return (x * x + rho * rho - 2 * x * rho * math.cos(theta)) ** (-0.5 * d) * math.sin(theta) ** (n - 2)

    def w(theta):
        return math.sin(theta) ** (n - 2)

    num = integrate.quad(f, 0.0, math.pi, epsabs=0, epsrel=1e-12, limit=400)[0]
    den = integrate.quad(w, 0.0, math.pi, epsabs=0, epsrel=1e-13)[0]
    return num / den


_FAR = 1e6


def _piece_exact(p, x: float, d: float, n: int) -> float:
    if p.coeff == 0:
        return 0.0
    if math.isinf(p.outer) and p.beta <= n - d:
        return INF
    dens = p.coeff * sphere_area(n)
    expo = n - 1.0 - p.beta
    # far from |y| = x the spherical average is x^-d or r^-d up to (r/x)^2 terms
    near_lo, near_hi = x / _FAR, x * _FAR
    total = x ** (-d) * power_integral(expo, p.inner, min(p.outer, near_lo))
    total += power_integral(expo - d, max(p.inner, near_hi), p.outer)

    def f(u):
        return math.exp((expo + 1.0) * u) * float(sphere_average(x, math.exp(u), d, n))

    lo, hi = max(p.inner, near_lo), min(p.outer, near_hi)
    if hi > lo:
        cuts = [math.log(lo), math.log(hi)]
        if lo < x < hi:
            cuts.insert(1, math.log(x))
        for a, b in zip(cuts[:-1], cuts[1:]):
            total += integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-11, limit=400)[0]
    return dens * total


def riesz_exact(sigma: RadialMeasure, exps: ExponentSet, x: float) -> float:
    """``I_{2 alpha} sigma(x) = int |x - y|^-(n - 2 alpha) dsigma(y)`` at radius ``x``."""
    n, d = exps.n, exps.d
    x = float(x)
    if x == 0.0:
        return float(moment(sigma, d, 0.0, INF, n))
    total = sigma.origin_mass * x ** (-d)
    for atom in sigma.atoms:
        total += atom.mass * float(sphere_average(x, atom.radius, d, n))
    for p in sigma.pieces:
        total += _piece_exact(p, x, d, n)
    return total


# --- comparable form ---------------------------------------------------------

def riesz_comparable(sigma: RadialMeasure, exps: ExponentSet, x):
    """``sigma(B(0,x)) / x^d + int_{|y| >= x} |y|^-d dsigma``; tail only at ``x = 0``."""
    x = np.asarray(x, dtype=float)
    d, n = exps.d, exps.n
    tail = moment(sigma, d, x, np.full(x.shape, INF), n)
    with np.errstate(divide="ignore", invalid="ignore"):
        head = np.where(x > 0, ball_mass(sigma, x, n) / np.where(x > 0, x, 1.0) ** d, 0.0)
    out = np.asarray(head + tail, dtype=float)
    return out if out.ndim else float(out)


def comparable_function(sigma: RadialMeasure, exps: ExponentSet, grid: RadialGrid) -> GridFunction:
    """``A sigma`` as a grid function on ``grid`` extended over the measure's breakpoints."""
    g = grid.covering(sigma.breakpoints())
    return GridFunction.fit(g, riesz_comparable(sigma, exps, g.radii), tail_bounds=(-exps.d - 1.0, 0.0))


def k_potential(sigma: RadialMeasure, exps: ExponentSet, i: int, x):
    """``x^-d (int_{|y| < x} |y|^-(d r_i) dsigma)^gamma_i`` for ``x > 0``."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("k_potential is evaluated only at x > 0")
    inner = moment(sigma, exps.d * exps.r(i), np.zeros(x.shape), x, exps.n)
    out = np.asarray(x ** (-exps.d) * np.asarray(inner) ** exps.gamma(i))
    return out if out.ndim else float(out)


# --- Wolff potential -----------------------------------------------------------

def _wolff_features(sigma: RadialMeasure, x: float) -> list[float]:
    radii = [0.0] + sigma.breakpoints()
    feats = set()
    for rho in radii:
        for t in (abs(x - rho), x + rho):
            if t > 0:
                feats.add(t)
    return sorted(feats)


def wolff(sigma: RadialMeasure, alpha: float, p: float, x: float, n: int,
          nodes: int = 24, tol: float = 1e-9) -> float:
    """Wolff potential ``int_0^inf (sigma(B(x,t)) / t^(n - alpha p))^(1/(p-1)) dt/t``.

    Composite Gauss-Legendre in ``log t`` between the radii where the ball
    boundary meets a feature of the measure, with power-law extrapolation
    below and above the sampled range.
    """
    if not 1.0 < p < INF:
        raise ValueError(f"Wolff potential needs 1 < p < inf, got {p}")
    if not 0.0 < alpha < n / p:
        raise ValueError(f"Wolff potential needs 0 < alpha < n/p, got alpha={alpha}")
    if sigma.is_zero:
        return 0.0
    x = float(x)
    if sigma.origin_mass > 0 and x == 0.0:
        return INF
    expo = 1.0 / (p - 1.0)
    s = n - alpha * p
    feats = _wolff_features(sigma, x)
    t_lo, t_hi = feats[0] * 1e-4, feats[-1] * 1e4
    knots = np.log(np.array([t_lo] + feats + [t_hi]))
    # panels no wider than log(2)
    edges = [knots[0]]
    for a, b in zip(knots[:-1], knots[1:]):
        m = max(1, int(math.ceil((b - a) / math.log(2.0))))
        edges.extend(np.linspace(a, b, m + 1)[1:])
    edges = np.asarray(edges)
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    a, b = edges[:-1, None], edges[1:, None]
    u = 0.5 * (b - a) * xg[None, :] + 0.5 * (a + b)
    weights = 0.5 * (b - a) * wg[None, :]
    t = np.exp(u).ravel()

    def integrand(tv):
        mass = np.asarray(ball_mass_offcenter(sigma, x, tv, n, tol=tol))
        with np.errstate(divide="ignore", invalid="ignore"):
            return (mass / tv**s) ** expo

    body = float(np.sum(integrand(t) * weights.ravel()))
    if not math.isfinite(body):
        return INF
    ends = integrand(np.array([t_lo, 2 * t_lo, t_hi / 2, t_hi]))
    total = body
    # integrand ~ C t^e near each end; the end contribution is C t_end^e / |e|
    f0, f1 = ends[0], ends[1]
    if f0 > 0:
        e = math.log(f1 / f0) / math.log(2.0) if f1 > 0 else 0.0
        total = INF if e <= 0 else total + f0 / e
    g0, g1 = ends[3], ends[2]
    if g0 > 0:
        e = math.log(g0 / g1) / math.log(2.0) if g1 > 0 else 0.0
        total = INF if e >= 0 else total + g0 / -e
    return total


# --- weighted potentials -----------------------------------------------------------

def _segments(sigma: RadialMeasure, w: GridFunction, xs: np.ndarray):
    grid_r = w.grid.radii
    bp = np.unique(np.concatenate([grid_r, xs[xs > 0], np.asarray(sigma.breakpoints(), dtype=float)]))
    lo = np.concatenate([[0.0], bp])
    hi = np.concatenate([bp, [INF]])
    mid = np.where(np.isinf(hi), 2.0 * lo, np.where(lo == 0, 0.5 * hi, np.sqrt(lo * hi)))
    v = w.values
    k = np.clip(np.searchsorted(grid_r, mid, side="right") - 1, 0, grid_r.size - 2)
    anchor_r = grid_r[k].copy()
    anchor_v = v[k].copy()
    expo = w.cell_exponents[k].copy()
    zero_cell = (v[k] == 0) | (v[k + 1] == 0)
    anchor_v[zero_cell] = 0.0
    head = mid < grid_r[0]
    anchor_r[head], anchor_v[head], expo[head] = grid_r[0], v[0], w.head_exponent
    tail = mid > grid_r[-1]
    anchor_r[tail], anchor_v[tail], expo[tail] = grid_r[-1], v[-1], w.tail_exponent
    return bp, lo, hi, anchor_r, anchor_v, expo


def _segment_integrals(sigma, w, q, s, n, lo, hi, anchor_r, anchor_v, expo):
    """Per-segment ``int w^q |y|^-s dsigma`` over the power-law pieces."""
    total = np.zeros(lo.shape)
    with np.errstate(all="ignore"):
        scale = anchor_v**q * anchor_r ** (-q * expo)
    for p in sigma.pieces:
        if p.coeff == 0:
            continue
        a = np.maximum(lo, p.inner)
        b = np.minimum(hi, p.outer)
        val = np.asarray(power_integral(q * expo + n - 1.0 - p.beta - s, a, b))
        with np.errstate(invalid="ignore"):
            contrib = np.where(scale > 0, p.coeff * sphere_area(n) * scale * val, 0.0)
        total = total + np.where(b > a, contrib, 0.0)
    return total


def weighted_parts(sigma: RadialMeasure, w: GridFunction, q: float, d: float, n: int, x):
    """``(int_{|y|<x} w^q dsigma, int_{|y|>=x} w^q |y|^-d dsigma)`` at each ``x``."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    bp, lo, hi, ar, av, ex = _segments(sigma, w, xs)
    inner_seg = _segment_integrals(sigma, w, q, 0.0, n, lo, hi, ar, av, ex)
    tail_seg = _segment_integrals(sigma, w, q, d, n, lo, hi, ar, av, ex)
    inner_cum = np.cumsum(inner_seg)  # inner_cum[j]: segments ending at or before bp[j]
    tail_cum = np.cumsum(tail_seg[::-1])[::-1]  # tail_cum[j]: segments starting at or after lo[j]
    j = np.searchsorted(bp, xs)
    pos = xs > 0
    jj = np.where(pos, j, 0)
    inner = np.where(pos, inner_cum[jj], 0.0)
    tail = np.where(pos, tail_cum[np.minimum(jj + 1, tail_cum.size - 1)], tail_cum[0])
    for atom in sigma.atoms:
        wq = float(w(atom.radius)) ** q * atom.mass
        inner = inner + np.where(xs > atom.radius, wq, 0.0)
        tail = tail + np.where(xs <= atom.radius, wq * atom.radius ** (-d), 0.0)
    if sigma.origin_mass > 0:
        w0 = w.at_origin() ** q * sigma.origin_mass
        inner = inner + np.where(pos, w0, 0.0)
        if np.any(~pos):
            tail = np.where(pos, tail, tail + (INF if w0 > 0 else 0.0))
    return inner.reshape(np.shape(x)), tail.reshape(np.shape(x))


def weighted_potential(sigma: RadialMeasure, w: GridFunction, q: float, exps: ExponentSet, x):
    """Comparable-form ``I_{2 alpha}(w^q dsigma)(x)``.

    ``(1/x^d) int_{|y|<x} w^q dsigma + int_{|y|>=x} w^q |y|^-d dsigma``,
    with closed-form integrals on every grid cell.
    """
    if q <= 0:
        raise ValueError(f"weight power must be positive, got {q}")
    x = np.asarray(x, dtype=float)
    inner, tail = weighted_parts(sigma, w, q, exps.d, exps.n, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(x > 0, inner / np.where(x > 0, x, 1.0) ** exps.d, 0.0) + tail
    out = np.asarray(out, dtype=float)
    return out if out.ndim else float(out)


def weighted_mass(sigma: RadialMeasure, w: GridFunction, q: float, n: int, radius: float) -> float:
    """``int_{|y| < radius} w^q dsigma``."""
    inner, _ = weighted_parts(sigma, w, q, 0.0, n, np.array([radius]))
    return float(inner[0])


def exact_weighted_potential(sigma: RadialMeasure, w: GridFunction, q: float, exps: ExponentSet, x) -> np.ndarray:
    """True-kernel ``I_{2 alpha}(w^q dsigma)(x)`` by adaptive quadrature.

    Slow; meant for comparison runs against the comparable form.  Pieces are
    integrated over radii within a factor ``_FAR**2`` of ``x``.
    """
    n, d = exps.n, exps.d
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(xs.shape)
    for j, xv in enumerate(xs):
        total = 0.0
        if sigma.origin_mass > 0:
            total += sigma.origin_mass * w.at_origin() ** q * xv ** (-d)
        for atom in sigma.atoms:
            total += atom.mass * float(w(atom.radius)) ** q * float(sphere_average(xv, atom.radius, d, n))
        for p in sigma.pieces:
            if p.coeff == 0:
                continue
            lo = max(p.inner, xv / _FAR**2)
            hi = min(p.outer, xv * _FAR**2)
            if hi <= lo:
                continue
            expo = n - p.beta

            def f(u, xv=xv, expo=expo):
                r = math.exp(u)
                return math.exp(expo * u) * float(w(r)) ** q * float(sphere_average(xv, r, d, n))

            cuts = sorted({math.log(lo), math.log(hi)} | ({math.log(xv)} if lo < xv < hi else set()))
            part = 0.0
            for a, b in zip(cuts[:-1], cuts[1:]):
                part += integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-9, limit=200)[0]
            total += p.coeff * sphere_area(n) * part
        out[j] = total
    return out.reshape(np.shape(x))
