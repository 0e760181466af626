"""Radially symmetric nonnegative measures with closed-form ball masses.

A :class:`RadialMeasure` is a finite sum of three kinds of components:

* power-law annulus densities ``c |y|^-beta dy`` on ``a <= |y| < b``,
* uniform shell atoms of mass ``m`` on the sphere ``|y| = rho``,
* an optional point mass at the origin.

All balls are open.  Divergent integrals are returned as ``math.inf``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np
from scipy.special import betainc, gammaln

INF = math.inf


@lru_cache(maxsize=None)
def sphere_area(n: int) -> float:
    """Surface area of the unit sphere in R^n, 2 pi^(n/2) / Gamma(n/2)."""
    return 2.0 * math.exp(0.5 * n * math.log(math.pi) - gammaln(0.5 * n))


def power_integral(p, lo, hi):
    """Vectorized ``int_lo^hi r^p dr`` with ``+inf`` on divergence.

    Uses ``lo^k expm1(k log(hi/lo)) / k`` with ``k = p + 1`` (written from
    the ``hi`` end when ``k > 0``) so exponents close to ``-1`` lose no
    precision and tiny ``lo`` cannot underflow; the logarithm appears as the
    ``k = 0`` limit.
    """
    p, lo, hi = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (p, lo, hi)))
    out = np.zeros(p.shape)
    k = p + 1.0
    live = hi > lo
    with np.errstate(all="ignore"):
        zero_lo = live & (lo == 0.0)
        inf_hi = live & np.isinf(hi)
        # lower end at the origin
        m = zero_lo & ~inf_hi
        out[m] = np.where(k[m] > 0, hi[m] ** k[m] / k[m], INF)
        # upper end at infinity
        m = inf_hi & ~zero_lo
        out[m] = np.where(k[m] < 0, lo[m] ** k[m] / -k[m], INF)
        out[zero_lo & inf_hi] = INF
        m = live & ~zero_lo & ~inf_hi
        kk, ll = k[m], np.log(hi[m] / lo[m])
        small = np.abs(kk * ll) < 1e-300
        safe_k = np.where(kk == 0, 1.0, kk)
        from_lo = lo[m] ** kk * np.expm1(kk * ll) / safe_k
        from_hi = hi[m] ** kk * -np.expm1(-kk * ll) / safe_k
        out[m] = np.where(small, ll, np.where(kk > 0, from_hi, from_lo))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class PowerPiece:
    """Density ``coeff * |y|^-beta`` on the annulus ``inner <= |y| < outer``."""

    coeff: float
    beta: float
    inner: float = 0.0
    outer: float = INF

    def __post_init__(self):
        if self.coeff < 0:
            raise ValueError(f"coeff must be >= 0, got {self.coeff}")
        if not (0.0 <= self.inner < self.outer):
            raise ValueError(f"need 0 <= inner < outer, got [{self.inner}, {self.outer})")

    def check_dimension(self, n: int) -> None:
        if self.inner == 0.0 and self.coeff > 0 and self.beta >= n:
            raise ValueError(
                f"power piece with beta={self.beta} >= n={n} touching the origin "
                "is not locally finite"
            )


@dataclass(frozen=True)
class ShellAtom:
    """Uniform measure of total mass ``mass`` on the sphere ``|y| = radius``."""

    radius: float
    mass: float

    def __post_init__(self):
        if self.radius <= 0 or self.mass <= 0:
            raise ValueError(f"shell atom needs radius > 0 and mass > 0, got {self}")


@dataclass(frozen=True)
class RadialMeasure:
    pieces: tuple[PowerPiece, ...] = ()
    atoms: tuple[ShellAtom, ...] = ()
    origin_mass: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if self.origin_mass < 0:
            raise ValueError(f"origin_mass must be >= 0, got {self.origin_mass}")

    def check_dimension(self, n: int) -> None:
        for piece in self.pieces:
            piece.check_dimension(n)

    @property
    def is_zero(self) -> bool:
        return (
            self.origin_mass == 0.0
            and not self.atoms
            and all(p.coeff == 0.0 for p in self.pieces)
        )

    def __add__(self, other: "RadialMeasure") -> "RadialMeasure":
        return RadialMeasure(
            self.pieces + other.pieces,
            self.atoms + other.atoms,
            self.origin_mass + other.origin_mass,
        )

    def breakpoints(self) -> list[float]:
        """Positive finite radii where the measure is not smooth."""
        pts = {a.radius for a in self.atoms}
        for p in self.pieces:
            if p.coeff == 0:
                continue
            if p.inner > 0:
                pts.add(p.inner)
            if math.isfinite(p.outer):
                pts.add(p.outer)
        return sorted(pts)

    def support_bounds(self) -> tuple[float, float]:
        """Smallest and largest radius carrying mass; ``(inf, 0)`` for zero."""
        lo, hi = INF, 0.0
        if self.origin_mass > 0:
            lo = 0.0
        for a in self.atoms:
            lo, hi = min(lo, a.radius), max(hi, a.radius)
        for p in self.pieces:
            if p.coeff > 0:
                lo, hi = min(lo, p.inner), max(hi, p.outer)
        return lo, hi

    def restrict(self, radius: float) -> "RadialMeasure":
        """The measure restricted to the open ball ``B(0, radius)``."""
        pieces = tuple(
            PowerPiece(p.coeff, p.beta, p.inner, min(p.outer, radius))
            for p in self.pieces
            if p.inner < radius
        )
        atoms = tuple(a for a in self.atoms if a.radius < radius)
        return RadialMeasure(pieces, atoms, self.origin_mass if radius > 0 else 0.0)


def shell(radius: float, mass: float) -> RadialMeasure:
    return RadialMeasure(atoms=(ShellAtom(radius, mass),))


def power(coeff: float, beta: float, inner: float = 0.0, outer: float = INF) -> RadialMeasure:
    return RadialMeasure(pieces=(PowerPiece(coeff, beta, inner, outer),))


def lacunary(weight_exponent: float, levels: int, base: float = 2.0) -> RadialMeasure:
    """Shells at ``base^-k`` with masses ``base^(-k s) k^-2``, ``k = 1..levels``.

    With ``s`` the local weight exponent of a moment, ``sum m_k rho_k^-s`` is
    the convergent series ``sum k^-2``.
    """
    atoms = tuple(
        ShellAtom(base ** -k, base ** (-k * weight_exponent) / k**2)
        for k in range(1, levels + 1)
    )
    return RadialMeasure(atoms=atoms)


ZERO = RadialMeasure()


def _piece_moment(p: PowerPiece, s, lo, hi, n: int):
    lo = np.maximum(lo, p.inner)
    hi = np.minimum(hi, p.outer)
    if p.coeff == 0.0:
        return np.zeros(np.broadcast(lo, hi).shape)
    val = power_integral(n - 1.0 - p.beta - s, lo, hi)
    return p.coeff * sphere_area(n) * np.asarray(val)


def moment(sigma: RadialMeasure, s: float, a, b, n: int):
    """``int_{a <= |y| < b} |y|^-s dsigma(y)``, vectorized over ``a`` and ``b``.

    Returns ``inf`` where the integral diverges, including an origin atom
    weighted by ``|y|^-s`` with ``s > 0``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a, b = np.broadcast_arrays(a, b)
    total = np.zeros(a.shape)
    live = b > a
    for p in sigma.pieces:
        total = total + np.where(live, _piece_moment(p, s, a, b, n), 0.0)
    for atom in sigma.atoms:
        inside = live & (a <= atom.radius) & (atom.radius < b)
        total = total + np.where(inside, atom.mass * atom.radius ** (-s), 0.0)
    if sigma.origin_mass > 0:
        at_origin = live & (a <= 0.0)
        if s > 0:
            w = INF
        elif s == 0:
            w = sigma.origin_mass
        else:
            w = 0.0
        total = total + np.where(at_origin, w, 0.0)
    return total if total.ndim else float(total)


def ball_mass(sigma: RadialMeasure, t, n: int):
    """Mass of the open ball ``B(0, t)``; ``0`` at ``t = 0``."""
    t = np.asarray(t, dtype=float)
    out = moment(sigma, 0.0, np.zeros(t.shape), t, n)
    return out


def scale_measure(sigma: RadialMeasure, t: float) -> RadialMeasure:
    """The measure ``t * sigma``."""
    if t <= 0:
        raise ValueError(f"scale factor must be positive, got {t}")
    return RadialMeasure(
        tuple(PowerPiece(p.coeff * t, p.beta, p.inner, p.outer) for p in sigma.pieces),
        tuple(ShellAtom(a.radius, a.mass * t) for a in sigma.atoms),
        sigma.origin_mass * t,
    )


# --- spherical caps -------------------------------------------------------

def cap_fraction(cos_angle, n: int):
    """Fraction of the unit sphere in R^n with ``cos(theta) > cos_angle``.

    ``cos(theta)`` of a uniform point has ``(1 - cos)/2 ~ Beta((n-1)/2, (n-1)/2)``,
    so the fraction is a regularized incomplete beta function.
    """
    c = np.clip(np.asarray(cos_angle, dtype=float), -1.0, 1.0)
    h = 0.5 * (n - 1)
    return betainc(h, h, 0.5 * (1.0 - c))


def cap_fraction_quadrature(cos_angle: float, n: int, tol: float = 1e-9) -> float:
    """Cap fraction by Gauss-Legendre quadrature of ``sin^(n-2)`` in theta.

    Starts from 64 nodes and doubles until two orders agree to ``tol``.
    """
    c = min(max(float(cos_angle), -1.0), 1.0)
    theta_star = math.acos(c)

    def gl(m, hi):
        x, w = np.polynomial.legendre.leggauss(m)
        th = 0.5 * hi * (x + 1.0)
        return 0.5 * hi * np.sum(w * np.sin(th) ** (n - 2))

    m = 64
    prev = gl(m, theta_star) / gl(m, math.pi)
    while m < 4096:
        m *= 2
        cur = gl(m, theta_star) / gl(m, math.pi)
        if abs(cur - prev) <= tol * max(abs(cur), 1e-300):
            return float(cur)
        prev = cur
    return float(prev)


def shell_fraction_in_ball(r, d: float, t, n: int):
    """Fraction of the sphere ``|y| = r`` lying in ``B(x, t)`` with ``|x| = d``."""
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    r, t = np.broadcast_arrays(r, t)
    out = np.zeros(r.shape)
    if d == 0.0:
        out[r < t] = 1.0
        return out
    full = r + d < t
    partial = ~full & (np.abs(d - r) < t) & (r < d + t) & (r > 0)
    out[full] = 1.0
    rp, tp = r[partial], t[partial]
    # (1 - cos theta*) / 2 in factored form, free of cancellation for t << d
    versine = (tp - d + rp) * (tp + d - rp) / (4.0 * d * rp)
    h = 0.5 * (n - 1)
    out[partial] = betainc(h, h, np.clip(versine, 0.0, 1.0))
    return out


_TS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _tanh_sinh(level: int):
    """Tanh-sinh nodes and weights on (0, 1) with step ``2^-level``."""
    if level not in _TS_CACHE:
        h = 2.0 ** -level
        k = np.arange(-int(3.2 / h), int(3.2 / h) + 1) * h
        arg = 0.5 * math.pi * np.sinh(k)
        # 1 - s and s computed without cancellation at both ends
        s = 0.5 * np.exp(arg) / np.cosh(arg)
        w = 0.25 * math.pi * h * np.cosh(k) / np.cosh(arg) ** 2
        keep = (s > 0) & (s < 1) & (w > 0)
        _TS_CACHE[level] = (s[keep], w[keep])
    return _TS_CACHE[level]


def _piece_partial_mass(p: PowerPiece, d: float, t: np.ndarray, n: int, tol: float):
    """Mass of ``p`` on the partially covered radii ``|d - t| < r < d + t``."""
    lo = np.maximum(np.abs(d - t), p.inner)
    hi = np.minimum(d + t, p.outer)
    live = hi > lo
    out = np.zeros(t.shape)
    if not np.any(live) or p.coeff == 0:
        return out
    lo, hi, tt = lo[live], hi[live], t[live]
    expo = n - 1.0 - p.beta

    def rule(level):
        s, w = _tanh_sinh(level)
        r = lo[:, None] + (hi - lo)[:, None] * s[None, :]
        frac = shell_fraction_in_ball(r, d, np.broadcast_to(tt[:, None], r.shape), n)
        return (hi - lo) * np.sum(r**expo * frac * w[None, :], axis=1)

    level = 3
    prev = rule(level)
    while level < 9:
        level += 1
        cur = rule(level)
        done = np.all(np.abs(cur - prev) <= tol * np.maximum(np.abs(cur), 1e-300))
        prev = cur
        if done:
            break
    out[live] = p.coeff * sphere_area(n) * prev
    return out


def ball_mass_offcenter(sigma: RadialMeasure, d: float, t, n: int, tol: float = 1e-9):
    """Mass of the open ball ``B(x, t)`` for any ``x`` with ``|x| = d``.

    Radii fully inside the ball contribute through closed-form ball masses;
    the partially covered shell ``|d - t| < r < d + t`` is integrated against
    the spherical-cap fraction.  Vectorized over ``t``.
    """
    t_arr = np.asarray(t, dtype=float)
    if d == 0.0:
        return ball_mass(sigma, t_arr, n)
    tt = np.atleast_1d(t_arr)
    total = np.zeros(tt.shape)
    # shells with r + d < t lie entirely inside the ball
    inner = np.maximum(tt - d, 0.0)
    for p in sigma.pieces:
        total += np.asarray(_piece_moment(p, 0.0, np.zeros(tt.shape), inner, n))
        total += _piece_partial_mass(p, d, tt, n, tol)
    for atom in sigma.atoms:
        total += atom.mass * shell_fraction_in_ball(np.full(tt.shape, atom.radius), d, tt, n)
    if sigma.origin_mass > 0:
        total += np.where(tt > d, sigma.origin_mass, 0.0)
    return total.reshape(t_arr.shape) if t_arr.ndim else float(total[0])


def from_components(components: Iterable[dict]) -> RadialMeasure:
    """Build a measure from ``power``, ``shell``, ``origin`` and ``lacunary`` items.

    Each item is a one-key mapping, e.g. ``{"shell": {"rho": 1, "m": 1}}``.
    """
    pieces, atoms, m0 = [], [], 0.0
    for comp in components:
        if len(comp) != 1:
            raise ValueError(f"each component needs exactly one kind, got {sorted(comp)}")
        (kind, body), = comp.items()
        if kind == "power":
            b = body.get("b", INF)
            b = INF if b in ("inf", "Infinity", INF) else float(b)
            pieces.append(PowerPiece(float(body["c"]), float(body["beta"]), float(body.get("a", 0.0)), b))
        elif kind == "shell":
            atoms.append(ShellAtom(float(body["rho"]), float(body["m"])))
        elif kind == "origin":
            m0 += float(body["m0"])
        elif kind == "lacunary":
            lac = lacunary(float(body["s"]), int(body["levels"]), float(body.get("base", 2.0)))
            atoms.extend(lac.atoms)
        else:
            raise ValueError(f"unknown measure component {kind!r}")
    return RadialMeasure(tuple(pieces), tuple(atoms), m0)
