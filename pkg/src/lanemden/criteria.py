"""Existence criteria for the radial Lane-Emden type system.

Every test is evaluated through closed-form moments of the measure.  The
limsup criterion can only be estimated from finitely many samples; the
classification rules are documented on :func:`classify_ratios`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exponents import ExponentSet, ParameterError, derive_exponents
from .grid import RadialGrid
from .measures import INF, RadialMeasure, ball_mass, moment
from .potentials import comparable_function, k_potential, riesz_comparable, weighted_potential

__all__ = [
    "BOUNDED",
    "DIVERGENT",
    "INCONCLUSIVE",
    "CriteriaReport",
    "FinPot",
    "LimcSeries",
    "ParameterError",
    "RadialCond",
    "SupBound",
    "check_c114",
    "check_con2",
    "check_criteria",
    "check_finpot",
    "check_limc",
    "check_radialcond",
    "classify_ratios",
    "refine",
    "default_limc_radii",
    "derive_exponents",
]

BOUNDED = "BOUNDED"
DIVERGENT = "DIVERGENT"
INCONCLUSIVE = "INCONCLUSIVE"

DIVERGENCE_THRESHOLD = 1e6
BOUNDED_SLOPE = -0.05
DIVERGENT_SLOPE = -0.2
WINDOW = 12
STABILITY = 0.10
# Sup gates compare the grid with one whose log-range is this many times wider.
REFINE_DEPTH = 2


@dataclass(frozen=True)
class FinPot:
    holds: bool
    tail_moment: float
    unit_ball_mass: float


@dataclass(frozen=True)
class RadialCond:
    local_r1: float
    local_r2: float
    tail: float

    @property
    def local_r1_ok(self) -> bool:
        return math.isfinite(self.local_r1)

    @property
    def local_r2_ok(self) -> bool:
        return math.isfinite(self.local_r2)

    @property
    def tail_ok(self) -> bool:
        return math.isfinite(self.tail)

    @property
    def holds(self) -> bool:
        return self.local_r1_ok and self.local_r2_ok and self.tail_ok


@dataclass(frozen=True)
class LimcSeries:
    i: int
    radii: tuple[float, ...]
    ratios: tuple[float, ...]
    slope: float
    limsup: float
    classification: str
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class SupBound:
    """Sup of a pointwise ratio over a grid and over its deepened refinement."""

    i: int
    constant: float
    refined: float
    holds: bool
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class CriteriaReport:
    finpot: FinPot
    radialcond: RadialCond
    limc: tuple[LimcSeries, LimcSeries]
    con2: tuple[SupBound, SupBound]
    c114: tuple[SupBound, SupBound]
    notes: tuple[str, ...] = field(default=())

    @property
    def limc_holds(self) -> bool:
        return self.radialcond.tail_ok and all(s.classification == BOUNDED for s in self.limc)


def check_finpot(sigma: RadialMeasure, exps: ExponentSet) -> FinPot:
    """Finiteness of ``int_1^inf sigma(B(0,t)) t^-d dt/t``.

    Integrating by parts, the integral equals
    ``(sigma(closed unit ball) + int_{|y|>1} |y|^-d dsigma) / d``, so it is
    finite exactly when the tail moment is.
    """
    tail = float(moment(sigma, exps.d, 1.0, INF, exps.n))
    unit = float(ball_mass(sigma, 1.0, exps.n))
    return FinPot(math.isfinite(tail) and math.isfinite(unit), tail, unit)


def check_radialcond(sigma: RadialMeasure, exps: ExponentSet) -> RadialCond:
    n, d = exps.n, exps.d
    return RadialCond(
        local_r1=float(moment(sigma, d * exps.r1, 0.0, 1.0, n)),
        local_r2=float(moment(sigma, d * exps.r2, 0.0, 1.0, n)),
        tail=float(moment(sigma, d, 1.0, INF, n)),
    )


def default_limc_radii(levels: int = 40) -> np.ndarray:
    return 2.0 ** -np.arange(levels + 1, dtype=float)


def limc_ratios(sigma: RadialMeasure, exps: ExponentSet, i: int, radii) -> tuple[np.ndarray, list[str]]:
    """``x^(-d/gamma_i) int_{|y|<x} |y|^(-d r_i) dsigma / int_{|y|>=x} |y|^-d dsigma``."""
    x = np.asarray(radii, dtype=float)
    n, d = exps.n, exps.d
    num = np.asarray(moment(sigma, d * exps.r(i), np.zeros(x.shape), x, n))
    den = np.asarray(moment(sigma, d, x, np.full(x.shape, INF), n))
    notes = []
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = x ** (-d / exps.gamma(i)) * num / den
    both_zero = (num == 0) & (den == 0)
    if np.any(both_zero):
        notes.append("0/0 where the measure has no mass on either side; taken as 0")
    if np.any(np.isinf(den) & np.isfinite(num)):
        notes.append("tail moment infinite")
    ratio = np.where(both_zero, 0.0, ratio)
    ratio = np.where(np.isinf(den) & np.isfinite(num), 0.0, ratio)
    ratio = np.where((den == 0) & (num > 0), INF, ratio)
    ratio = np.where(np.isinf(num), INF, ratio)
    return ratio, notes


def classify_ratios(radii, ratios) -> tuple[str, float, float, list[str]]:
    """Classify the small-radius behaviour of a ratio sample.

    Uses the ``WINDOW`` smallest radii.  ``DIVERGENT`` when a ratio is
    infinite, when the last three exceed the divergence threshold, when the
    ratio grows with log-log slope below ``DIVERGENT_SLOPE``, or when the
    increments toward the origin are all positive and not decaying (last at
    least half the first), which is growth at least logarithmic in ``1/x``.
    ``BOUNDED`` when the slope is at least ``BOUNDED_SLOPE`` and every ratio
    is below the threshold.  Anything else is ``INCONCLUSIVE``.

    Returns ``(classification, slope, limsup_estimate, notes)``.
    """
    x = np.asarray(radii, dtype=float)
    r = np.asarray(ratios, dtype=float)
    order = np.argsort(-x)
    x, r = x[order], r[order]
    xw, rw = x[-WINDOW:], r[-WINDOW:]
    notes: list[str] = []
    if np.any(np.isinf(rw)):
        return DIVERGENT, -INF, INF, ["ratio infinite at small radii"]
    if np.all(rw == 0):
        return BOUNDED, 0.0, 0.0, ["numerator vanishes at small radii"]
    pos = rw > 0
    if pos.sum() >= 2:
        slope = float(np.polyfit(np.log(xw[pos]), np.log(rw[pos]), 1)[0])
    else:
        slope = 0.0
    limsup = float(np.max(rw))
    inc = np.diff(rw)
    growing = bool(np.all(inc > 1e-8 * rw[1:]))
    if np.min(rw[-3:]) > DIVERGENCE_THRESHOLD:
        return DIVERGENT, slope, limsup, ["ratio above threshold at the three smallest radii"]
    if growing and slope < DIVERGENT_SLOPE:
        return DIVERGENT, slope, limsup, ["ratio grows like a negative power of x"]
    if growing and inc[-1] >= 0.5 * inc[0]:
        notes.append("increments toward the origin do not decay: at least logarithmic growth")
        return DIVERGENT, slope, limsup, notes
    if slope >= BOUNDED_SLOPE and limsup < DIVERGENCE_THRESHOLD:
        return BOUNDED, slope, limsup, notes
    return INCONCLUSIVE, slope, limsup, notes


def check_limc(sigma: RadialMeasure, exps: ExponentSet, radii=None) -> tuple[LimcSeries, LimcSeries]:
    """Sampled limsup ratio of the Brezis-Kamin type criterion, ``i = 1, 2``."""
    x = default_limc_radii() if radii is None else np.asarray(radii, dtype=float)
    out = []
    for i in (1, 2):
        ratio, notes = limc_ratios(sigma, exps, i, x)
        cls, slope, limsup, more = classify_ratios(x, ratio)
        out.append(
            LimcSeries(i, tuple(map(float, x)), tuple(map(float, ratio)), slope, limsup, cls, tuple(notes + more))
        )
    return out[0], out[1]


def refine(grid: RadialGrid) -> RadialGrid:
    """Refinement used by every sup gate: log-range widened, cells kept as fine."""
    for _ in range(REFINE_DEPTH):
        grid = grid.deepened()
    return grid


def _sup_bound(i: int, ratio_on, grid: RadialGrid) -> SupBound:
    base = ratio_on(grid)
    refined = ratio_on(refine(grid))
    notes = []
    holds = math.isfinite(base) and math.isfinite(refined)
    if holds:
        scale = max(abs(base), abs(refined))
        if scale > 0 and abs(refined - base) > STABILITY * scale:
            holds = False
            notes.append("sup not stable under grid refinement")
    else:
        notes.append("sup infinite")
    return SupBound(i, base, refined, holds, tuple(notes))


def _far_field_sup(sigma: RadialMeasure, exps: ExponentSet, numerator) -> float:
    """Exact sup of a ratio over radii beyond a bounded support.

    There every potential is ``N x^-d`` and ``A sigma = M x^-d``, so the ratio
    ``N / (M + M^gamma x^(-d (gamma - 1)))`` increases to ``N / M``.  Grids
    only reach this limit at the rate ``x^(-d (gamma - 1))``.
    """
    outer = sigma.support_bounds()[1]
    if not (0 < outer < INF):
        return 0.0
    x = 2.0 * outer
    mass = float(ball_mass(sigma, INF, exps.n))
    return float(numerator(np.array([x]))[0]) * x**exps.d / mass


def _comparable_on(sigma, exps, grid):
    return np.asarray(riesz_comparable(sigma, exps, grid.radii))


def check_con2(sigma: RadialMeasure, exps: ExponentSet, grid: RadialGrid) -> tuple[SupBound, SupBound]:
    """``sup K_i sigma / (A sigma + (A sigma)^gamma_i)`` over the grid and the far field."""
    if sigma.is_zero:
        return SupBound(1, 0.0, 0.0, True, ("zero measure",)), SupBound(2, 0.0, 0.0, True, ("zero measure",))
    out = []
    for i in (1, 2):
        def ratio_on(g, i=i):
            a = _comparable_on(sigma, exps, g)
            if not np.all(np.isfinite(a)):
                return INF
            k = np.asarray(k_potential(sigma, exps, i, g.radii))
            with np.errstate(divide="ignore", invalid="ignore"):
                q = k / (a + a ** exps.gamma(i))
            q = np.where((k == 0) & (a == 0), 0.0, q)
            far = _far_field_sup(sigma, exps, lambda x: k_potential(sigma, exps, i, x))
            return float(max(np.max(q), far))

        out.append(_sup_bound(i, ratio_on, grid))
    return _precondition_notes(sigma, exps, grid, out)


def check_c114(sigma: RadialMeasure, exps: ExponentSet, grid: RadialGrid) -> tuple[SupBound, SupBound]:
    """``sup I((A sigma)^(q_i gamma_j) dsigma) / (A sigma + (A sigma)^gamma_i)`` over the grid and the far field."""
    if sigma.is_zero:
        return SupBound(1, 0.0, 0.0, True, ("zero measure",)), SupBound(2, 0.0, 0.0, True, ("zero measure",))
    out = []
    for i in (1, 2):
        j = 3 - i
        power = exps.q(i) * exps.gamma(j)

        def ratio_on(g, i=i, power=power):
            a = _comparable_on(sigma, exps, g)
            if not np.all(np.isfinite(a)):
                return INF
            w = comparable_function(sigma, exps, g)
            if not np.all(np.isfinite(w.values)):
                return INF
            lhs = np.asarray(weighted_potential(sigma, w, power, exps, g.radii))
            with np.errstate(divide="ignore", invalid="ignore"):
                q = lhs / (a + a ** exps.gamma(i))
            q = np.where((lhs == 0) & (a == 0), 0.0, q)
            far = _far_field_sup(sigma, exps, lambda x: weighted_potential(sigma, w, power, exps, x))
            return float(max(np.max(q), far))

        out.append(_sup_bound(i, ratio_on, grid))
    return _precondition_notes(sigma, exps, grid, out)


def _precondition_notes(sigma, exps, grid, bounds):
    a = _comparable_on(sigma, exps, grid)
    if np.all(np.isfinite(a)):
        return bounds[0], bounds[1]
    note = "A sigma infinite on the grid: finiteness condition fails"
    return tuple(
        SupBound(b.i, b.constant, b.refined, False, b.notes + (note,)) for b in bounds
    )


def check_criteria(sigma: RadialMeasure, exps: ExponentSet, grid: RadialGrid, radii=None) -> CriteriaReport:
    return CriteriaReport(
        finpot=check_finpot(sigma, exps),
        radialcond=check_radialcond(sigma, exps),
        limc=check_limc(sigma, exps, radii),
        con2=check_con2(sigma, exps, grid),
        c114=check_c114(sigma, exps, grid),
    )
