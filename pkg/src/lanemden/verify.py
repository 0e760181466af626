"""Post-hoc checks of solution bounds and of the auxiliary potential inequalities.

Every sup or inf taken over a finite grid is repeated on a refined grid and
accepted only when the two agree within a relative gate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .criteria import refine
from .exponents import ExponentSet
from .grid import RadialGrid
from .measures import INF, ZERO, RadialMeasure, ball_mass, ball_mass_offcenter, moment
from .potentials import (
    comparable_function,
    k_potential,
    riesz_comparable,
    weighted_mass,
    weighted_potential,
)
from .solver import SolveConfig, SolveResult, monotone_solve, monotone_solve_inhom

BOUND_GATE = 0.10
KAPPA_GATE = 0.05
KAPPA_MIN_R = 1e-3
# extra decades added on each side when probing growth and energy sups
PROBE_DECADES = 4


@dataclass(frozen=True)
class BoundReport:
    """Measured two-sided constants for ``u`` and ``v``.

    ``c_low``/``c_up`` come from :func:`verify_sandwich`, ``profile_low``/
    ``profile_up`` from :func:`verify_profile`; fields a check does not
    measure are ``None``.  ``refined`` holds the same constants after
    re-solving on the doubled grid.
    """

    c_low: tuple[float, float] | None = None
    c_up: tuple[float, float] | None = None
    profile_low: tuple[float, float] | None = None
    profile_up: tuple[float, float] | None = None
    refined: tuple[tuple[float, float], tuple[float, float]] | None = None
    stable: bool = False
    trivial: bool = False
    notes: tuple[str, ...] = field(default=())

    @property
    def finite(self) -> bool:
        vals = [c for pair in (self.c_low, self.c_up, self.profile_low, self.profile_up) if pair for c in pair]
        return all(math.isfinite(c) and c > 0 for c in vals)

    @property
    def lower_finite(self) -> bool:
        pair = self.c_low if self.c_low is not None else self.profile_low
        return pair is not None and all(math.isfinite(c) for c in pair)


@dataclass(frozen=True)
class KappaResult:
    kappa: float | None
    refined: float | None
    stable: bool
    skipped: bool = False
    witness: float | None = None


@dataclass(frozen=True)
class SupTest:
    """Sup of a sampled ratio, the sup after widening the sample, and the verdict."""

    samples: tuple[tuple[float, float], ...]
    sup: float
    refined_sup: float
    bounded: bool
    witness: tuple[float, ...] = ()


# --- ratio helpers ------------------------------------------------------------

def _ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """``num/den`` with 0/0 = 0 and positive/0 = inf."""
    num, den = np.broadcast_arrays(np.asarray(num, dtype=float), np.asarray(den, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        r = num / den
    r = np.where((num == 0) & (den == 0), 0.0, r)
    return np.where((den == 0) & (num > 0), INF, r)


def _close(a: float, b: float, gate: float) -> bool:
    if not (math.isfinite(a) and math.isfinite(b)):
        return False
    scale = max(abs(a), abs(b))
    return scale == 0 or abs(a - b) <= gate * scale


def _resolve(result, sigma, exps, grid, cfg, mu1, mu2):
    cfg = cfg or SolveConfig(grid)
    fine = SolveConfig(grid.doubled(), cfg.tol, cfg.max_iter, cfg.lambda_lo, cfg.lambda_hi,
                       cfg.lambda_steps, cfg.kernel)
    if result.inhomogeneous:
        return monotone_solve_inhom(sigma, mu1, mu2, exps, fine)
    return monotone_solve(sigma, exps, fine)


# --- two-sided bounds -----------------------------------------------------------

def _sandwich_constants(result: SolveResult, sigma, exps):
    x = result.grid.radii
    a = np.asarray(riesz_comparable(sigma, exps, x))
    low, up = [], []
    for i, f in ((1, result.u), (2, result.v)):
        vals = f.values
        g = exps.gamma(i)
        low.append(float(np.max(_ratio(a**g, vals))))
        up.append(float(np.max(_ratio(vals, a + a**g))))
    return tuple(low), tuple(up)


def _profile_constants(result: SolveResult, sigma, exps):
    x = result.grid.radii
    tail = np.asarray(moment(sigma, exps.d, x, np.full(x.shape, INF), exps.n))
    low, up = [], []
    for i, f in ((1, result.u), (2, result.v)):
        prof = np.asarray(k_potential(sigma, exps, i, x)) + tail ** exps.gamma(i)
        r = _ratio(f.values, prof)
        low.append(float(np.min(r)))
        up.append(float(np.max(r)))
    return tuple(low), tuple(up)


def _bound_report(kind, result, sigma, exps, grid, cfg, mu1, mu2, refined):
    if result.trivial or sigma.is_zero:
        zero = (0.0, 0.0)
        fields = {"c_low": zero, "c_up": zero} if kind == "sandwich" else {"profile_low": zero, "profile_up": zero}
        return BoundReport(**fields, stable=True, trivial=True, notes=("zero measure: vacuous",))
    measure = _sandwich_constants if kind == "sandwich" else _profile_constants
    low, up = measure(result, sigma, exps)
    notes = []
    if not result.converged:
        notes.append("solution did not converge")
    if any(math.isinf(c) for c in low):
        notes.append("solution vanishes where A sigma is positive")
    if refined is None:
        refined = _resolve(result, sigma, exps, grid, cfg, mu1, mu2)
    rlow, rup = measure(refined, sigma, exps)
    stable = all(_close(a, b, BOUND_GATE) for a, b in zip(low + up, rlow + rup))
    if not stable:
        notes.append("constants move by more than 10% under grid doubling")
    if kind == "sandwich":
        fields = {"c_low": low, "c_up": up}
    else:
        fields = {"profile_low": low, "profile_up": up}
    return BoundReport(**fields, refined=(rlow, rup), stable=stable, notes=tuple(notes))


def verify_sandwich(result: SolveResult, sigma: RadialMeasure, exps: ExponentSet, grid: RadialGrid,
                    cfg: SolveConfig | None = None, mu1: RadialMeasure = ZERO, mu2: RadialMeasure = ZERO,
                    refined: SolveResult | None = None) -> BoundReport:
    """``c_low = sup (A sigma)^gamma_i / u_i`` and ``c_up = sup u_i / (A sigma + (A sigma)^gamma_i)``."""
    return _bound_report("sandwich", result, sigma, exps, grid, cfg, mu1, mu2, refined)


def verify_profile(result: SolveResult, sigma: RadialMeasure, exps: ExponentSet, grid: RadialGrid,
                   cfg: SolveConfig | None = None, mu1: RadialMeasure = ZERO, mu2: RadialMeasure = ZERO,
                   refined: SolveResult | None = None) -> BoundReport:
    """Inf and sup of ``u_i / (K_i sigma + tail^gamma_i)``."""
    return _bound_report("profile", result, sigma, exps, grid, cfg, mu1, mu2, refined)


def refined_solution(result, sigma, exps, grid, cfg=None, mu1=ZERO, mu2=ZERO) -> SolveResult:
    """Re-solve on the doubled grid; share it between the two bound reports."""
    return _resolve(result, sigma, exps, grid, cfg, mu1, mu2)


# --- potential inequalities -----------------------------------------------------

def _kappa_on(sigma, exps, r, grid):
    x = grid.radii
    a = np.asarray(riesz_comparable(sigma, exps, x))
    w = comparable_function(sigma, exps, grid)
    lhs = np.asarray(weighted_potential(sigma, w, r, exps, x))
    with np.errstate(divide="ignore", invalid="ignore"):
        k = lhs ** (1.0 / r) / a ** ((r + 1.0) / r)
    k = np.where(a > 0, k, INF)
    j = int(np.argmin(k))
    return float(k[j]), float(x[j])


def kappa_lowerbound_test(sigma: RadialMeasure, exps: ExponentSet, r: float, grid: RadialGrid) -> KappaResult:
    """Largest ``kappa`` with ``I((A sigma)^r dsigma) >= kappa^r (A sigma)^(r+1)`` on the grid."""
    if r < KAPPA_MIN_R:
        return KappaResult(None, None, True, skipped=True)
    if sigma.is_zero:
        return KappaResult(None, None, True, skipped=True)
    a = np.asarray(riesz_comparable(sigma, exps, grid.radii))
    if not np.all(np.isfinite(a)):
        raise ValueError("A sigma must be finite on the grid")
    k, at = _kappa_on(sigma, exps, r, grid)
    k2, _ = _kappa_on(sigma, exps, r, grid.doubled())
    stable = k > 0 and _close(k, k2, KAPPA_GATE)
    return KappaResult(k, k2, stable, witness=at)


def _widen(values, decades: int = PROBE_DECADES) -> np.ndarray:
    v = np.asarray(sorted(set(float(t) for t in values)))
    lo = v[0] * 10.0 ** -np.arange(1, decades + 1)
    hi = v[-1] * 10.0 ** np.arange(1, decades + 1)
    return np.concatenate([lo[::-1], v, hi])


def _energy_ratio(sigma, exps, s, radius):
    mass = float(ball_mass(sigma, radius, exps.n))
    if mass == 0:
        return None
    part = sigma.restrict(radius)
    grid = RadialGrid.logspace(radius * 1e-8, radius * 1e2, 81)
    w = comparable_function(part, exps, grid)
    return weighted_mass(sigma, w, s, exps.n, radius) / mass


def energy_test(sigma: RadialMeasure, exps: ExponentSet, s: float, R_list) -> SupTest:
    """``int_{B_R} (A sigma_R)^s dsigma / sigma(B_R)`` over ``R`` in ``R_list``.

    Bounded when the sup does not move by more than 10% once the radii are
    widened by a few decades on each side.
    """
    if not s > 0:
        raise ValueError(f"s must be positive, got {s}")
    radii = np.asarray(sorted(set(float(t) for t in R_list)))
    samples = []
    for R in radii:
        q = _energy_ratio(sigma, exps, s, R)
        if q is not None:
            samples.append((float(R), float(q)))
    extra = [q for R in _widen(radii) if R not in radii and (q := _energy_ratio(sigma, exps, s, R)) is not None]
    sup = max((q for _, q in samples), default=0.0)
    wider = max([sup] + [float(q) for q in extra])
    witness = max(samples, key=lambda p: p[1])[:1] if samples else ()
    return SupTest(tuple(samples), sup, wider, _close(sup, wider, BOUND_GATE), witness)


def _growth_samples(sigma, exps, centers, radii):
    out = []
    t = np.asarray(radii, dtype=float)
    for c in centers:
        m = np.asarray(ball_mass_offcenter(sigma, float(c), t, exps.n))
        for tv, q in zip(t, _ratio(m, t**exps.d)):
            out.append((float(c), float(tv), float(q)))
    return out


def growth_test(sigma: RadialMeasure, exps: ExponentSet, centers, radii) -> SupTest:
    """``sup sigma(B(x, t)) / t^d`` over centers at distance ``d`` and radii ``t``.

    A finite sup that survives widening the radii is a necessary screen for
    a capacity-type bound on ``sigma``.
    """
    base = _growth_samples(sigma, exps, centers, radii)
    extra = _growth_samples(sigma, exps, centers, [t for t in _widen(radii) if t not in set(radii)])
    best = max(base, key=lambda p: p[2])
    wider = max([best[2]] + [p[2] for p in extra])
    samples = tuple(((c, t), q) for c, t, q in base)
    return SupTest(samples, best[2], wider, _close(best[2], wider, BOUND_GATE), best[:2])


def domination_check(mu: RadialMeasure, sigma: RadialMeasure, exps: ExponentSet, grid: RadialGrid):
    """``sup A mu / A sigma`` on the grid and on its refinement.

    Returns ``(flag, C, measured, refined)``; ``C`` is ``inf`` unless the two
    sups agree within 10%.
    """
    pts = mu.breakpoints() + sigma.breakpoints()

    def sup_on(g):
        g = g.covering(pts)
        r = _ratio(riesz_comparable(mu, exps, g.radii), riesz_comparable(sigma, exps, g.radii))
        return float(np.max(r))

    measured = sup_on(grid)
    finer = sup_on(refine(grid))
    ok = _close(measured, finer, BOUND_GATE)
    return ok, (max(measured, finer) if ok else INF), measured, finer
