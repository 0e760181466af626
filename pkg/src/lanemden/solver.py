"""Monotone sub/supersolution iteration for the coupled system.

The pair map is

    T(u, v) = (I(v^q1 dsigma) + A mu1,  I(u^q2 dsigma) + A mu2)

with ``I`` the comparable-form potential.  Starting below a fixed point,
the Jacobi iterates increase monotonically to it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exponents import ExponentSet
from .grid import GridFunction, RadialGrid
from .measures import ZERO, RadialMeasure
from .potentials import exact_weighted_potential, riesz_comparable, riesz_exact, weighted_potential

OVERFLOW = 1e300
MONOTONE_SLACK = 1e-12
KERNELS = ("comparable", "exact")


class SolverError(RuntimeError):
    """Base class of structured solver failures."""


class CalibrationError(SolverError):
    pass


class DivergenceError(SolverError):
    def __init__(self, radius: float, value: float):
        super().__init__(f"iterate exceeded {OVERFLOW:g} at radius {radius:.6g} (value {value:.6g})")
        self.radius = radius


class MonotonicityError(SolverError):
    def __init__(self, iteration: int, radius: float, drop: float):
        super().__init__(f"iterate decreased by {drop:.3g} (relative) at radius {radius:.6g}, iteration {iteration}")
        self.iteration, self.radius, self.drop = iteration, radius, drop


class DominationError(SolverError):
    def __init__(self, which: str, ratio: float):
        super().__init__(f"{which} is not dominated by sigma: sup A{which}/Asigma = {ratio:.6g}")
        self.which, self.ratio = which, ratio


class InfinitePotentialError(SolverError):
    def __init__(self, radius: float):
        super().__init__(f"A sigma is infinite at radius {radius:.6g}")
        self.radius = radius


@dataclass(frozen=True)
class SolveConfig:
    grid: RadialGrid
    tol: float = 1e-8
    max_iter: int = 200
    lambda_lo: float = 1e-12
    lambda_hi: float = 1e12
    lambda_steps: int = 60
    kernel: str = "comparable"

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter}")
        if not 0 < self.lambda_lo < self.lambda_hi:
            raise ValueError("lambda search needs 0 < lo < hi")
        if self.kernel not in KERNELS:
            raise ValueError(f"kernel must be one of {KERNELS}, got {self.kernel!r}")


@dataclass(frozen=True, eq=False)
class SolveResult:
    u: GridFunction
    v: GridFunction
    iterations: int
    converged: bool
    trace_u: tuple[float, ...]
    trace_v: tuple[float, ...]
    lambda_sub: float
    lambda_super: float
    monotone_violation: float
    residual: float
    trivial: bool = False
    inhomogeneous: bool = False
    notes: tuple[str, ...] = field(default=())

    @property
    def grid(self) -> RadialGrid:
        return self.u.grid

    @property
    def residual_trace(self) -> tuple[float, ...]:
        return tuple(max(a, b) for a, b in zip(self.trace_u, self.trace_v))


# --- building blocks ---------------------------------------------------------

def work_grid(sigma: RadialMeasure, grid: RadialGrid) -> RadialGrid:
    """The user grid, extended so that every atom and piece edge is a node."""
    return grid.covering(sigma.breakpoints())


def _fit(grid: RadialGrid, values: np.ndarray, exps: ExponentSet) -> GridFunction:
    return GridFunction.fit(grid, values, tail_bounds=(-exps.d - 1.0, 0.0))


def _comparable_values(sigma: RadialMeasure, exps: ExponentSet, grid: RadialGrid) -> np.ndarray:
    a = np.asarray(riesz_comparable(sigma, exps, grid.radii), dtype=float)
    bad = ~np.isfinite(a)
    if np.any(bad):
        raise InfinitePotentialError(float(grid.radii[np.argmax(bad)]))
    return a


def subsolution_seed(sigma: RadialMeasure, exps: ExponentSet, lam: float, grid: RadialGrid):
    """``(lam (A sigma)^gamma1, lam (A sigma)^gamma2)`` sampled on ``grid``."""
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    a = _comparable_values(sigma, exps, grid)
    return (
        _fit(grid, lam * a**exps.gamma1, exps),
        _fit(grid, lam * a**exps.gamma2, exps),
    )


def _potential(sigma, w, q, exps, x, kernel):
    if kernel == "exact":
        return exact_weighted_potential(sigma, w, q, exps, x)
    return np.asarray(weighted_potential(sigma, w, q, exps, x))


def _forcing(mu: RadialMeasure, exps: ExponentSet, grid: RadialGrid, kernel: str) -> np.ndarray:
    if mu.is_zero:
        return np.zeros(len(grid))
    if kernel == "exact":
        return np.array([riesz_exact(mu, exps, x) for x in grid.radii])
    return np.asarray(riesz_comparable(mu, exps, grid.radii), dtype=float)


def _image(sigma, exps, u, v, f1, f2, kernel):
    x = u.grid.radii
    return (
        _potential(sigma, v, exps.q1, exps, x, kernel) + f1,
        _potential(sigma, u, exps.q2, exps, x, kernel) + f2,
    )


def _below(a: np.ndarray, b: np.ndarray, slack: float = 1e-12) -> bool:
    return bool(np.all(a <= b * (1.0 + slack)))


def _lattice_search(holds, lo: float, hi: float, steps: int, want: str) -> float | None:
    """Bisect in ``log lambda`` for the largest (``want='max'``) or smallest lambda where ``holds``.

    ``holds`` must be monotone in lambda: true below a threshold for ``max``,
    true above it for ``min``.
    """
    a, b = math.log(lo), math.log(hi)
    if want == "max":
        if holds(hi):
            return hi
        if not holds(lo):
            return None
        for _ in range(steps):
            m = 0.5 * (a + b)
            a, b = (m, b) if holds(math.exp(m)) else (a, m)
        return math.exp(a)
    if holds(lo):
        return lo
    if not holds(hi):
        return None
    for _ in range(steps):
        m = 0.5 * (a + b)
        a, b = (a, m) if holds(math.exp(m)) else (m, b)
    return math.exp(b)


def calibrate_lambda_sub(sigma: RadialMeasure, exps: ExponentSet, grid: RadialGrid,
                         cfg: SolveConfig | None = None) -> float:
    """Largest lattice lambda whose seed lies below its own image at every node."""
    cfg = cfg or SolveConfig(grid)
    if sigma.is_zero:
        return cfg.lambda_hi
    base_u, base_v = subsolution_seed(sigma, exps, 1.0, grid)
    zero = np.zeros(len(grid))

    def holds(lam):
        u, v = base_u.scaled(lam), base_v.scaled(lam)
        iu, iv = _image(sigma, exps, u, v, zero, zero, cfg.kernel)
        return _below(u.values, iu, 0.0) and _below(v.values, iv, 0.0)

    lam = _lattice_search(holds, cfg.lambda_lo, cfg.lambda_hi, cfg.lambda_steps, "max")
    if lam is None:
        raise CalibrationError(
            f"no lambda in [{cfg.lambda_lo:g}, {cfg.lambda_hi:g}] gives a subsolution on this grid"
        )
    return lam


def supersolution_check(sigma: RadialMeasure, mu1: RadialMeasure, mu2: RadialMeasure,
                        exps: ExponentSet, grid: RadialGrid, cfg: SolveConfig | None = None):
    """Smallest lattice lambda making ``lam (A + A^gamma_i)`` a supersolution.

    Returns ``(flag, lambda)``; ``(False, inf)`` when even the upper end of
    the search range fails.
    """
    cfg = cfg or SolveConfig(grid)
    try:
        a = _comparable_values(sigma, exps, grid)
    except InfinitePotentialError:
        return False, math.inf
    u1 = _fit(grid, a + a**exps.gamma1, exps)
    v1 = _fit(grid, a + a**exps.gamma2, exps)
    f1 = _forcing(mu1, exps, grid, cfg.kernel)
    f2 = _forcing(mu2, exps, grid, cfg.kernel)
    if not (np.all(np.isfinite(f1)) and np.all(np.isfinite(f2))):
        return False, math.inf

    def holds(lam):
        u, v = u1.scaled(lam), v1.scaled(lam)
        iu, iv = _image(sigma, exps, u, v, f1, f2, cfg.kernel)
        return _below(iu, u.values) and _below(iv, v.values)

    lam = _lattice_search(holds, cfg.lambda_lo, cfg.lambda_hi, cfg.lambda_steps, "min")
    return (False, math.inf) if lam is None else (True, lam)


# --- iteration ---------------------------------------------------------------

def _relative_change(new: np.ndarray, old: np.ndarray) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.abs(new - old) / np.abs(new)
    r = np.where((new == 0) & (old == 0), 0.0, r)
    return float(np.max(r))


def _guard(values: np.ndarray, grid: RadialGrid) -> None:
    bad = ~(values <= OVERFLOW)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise DivergenceError(float(grid.radii[k]), float(values[k]))


def _iterate(sigma, exps, cfg, grid, u, v, f1, f2):
    trace_u, trace_v = [], []
    worst = 0.0
    converged = False
    it = 0
    for it in range(1, cfg.max_iter + 1):
        nu, nv = _image(sigma, exps, u, v, f1, f2, cfg.kernel)
        _guard(nu, grid)
        _guard(nv, grid)
        for new, old in ((nu, u.values), (nv, v.values)):
            with np.errstate(divide="ignore", invalid="ignore"):
                drop = np.where(new > 0, (old - new) / new, np.where(old > 0, 1.0, 0.0))
            k = int(np.argmax(drop))
            worst = max(worst, float(drop[k]))
            if drop[k] > MONOTONE_SLACK:
                raise MonotonicityError(it, float(grid.radii[k]), float(drop[k]))
        cu, cv = _relative_change(nu, u.values), _relative_change(nv, v.values)
        trace_u.append(cu)
        trace_v.append(cv)
        u, v = _fit(grid, nu, exps), _fit(grid, nv, exps)
        if cu < cfg.tol and cv < cfg.tol:
            converged = True
            break
    iu, iv = _image(sigma, exps, u, v, f1, f2, cfg.kernel)
    residual = max(_sup_relative(u.values, iu), _sup_relative(v.values, iv))
    return u, v, it, converged, tuple(trace_u), tuple(trace_v), max(worst, 0.0), residual


def _sup_relative(a: np.ndarray, b: np.ndarray) -> float:
    scale = float(np.max(np.abs(a)))
    return float(np.max(np.abs(a - b))) / scale if scale > 0 else float(np.max(np.abs(b)))


def _trivial(grid: RadialGrid, exps: ExponentSet, lam_hi: float) -> SolveResult:
    zero = _fit(grid, np.zeros(len(grid)), exps)
    return SolveResult(zero, zero, 1, True, (0.0,), (0.0,), lam_hi, 0.0, 0.0, 0.0, trivial=True,
                       notes=("zero measure: zero solution",))


def monotone_solve(sigma: RadialMeasure, exps: ExponentSet, cfg: SolveConfig) -> SolveResult:
    """Minimal-from-below fixed point of the homogeneous system."""
    return _solve(sigma, ZERO, ZERO, exps, cfg, inhomogeneous=False)


def monotone_solve_inhom(sigma: RadialMeasure, mu1: RadialMeasure, mu2: RadialMeasure,
                         exps: ExponentSet, cfg: SolveConfig) -> SolveResult:
    """Fixed point with the additive terms ``A mu1``, ``A mu2``.

    Both forcing measures must be dominated by ``sigma`` in the sense
    ``A mu_i <= C A sigma``; otherwise :class:`DominationError` is raised.
    The seed is the homogeneous subsolution, which stays a subsolution once
    the forcing is added.
    """
    from .verify import domination_check

    for name, mu in (("mu1", mu1), ("mu2", mu2)):
        if mu.is_zero:
            continue
        ok, c, _, _ = domination_check(mu, sigma, exps, cfg.grid)
        if not ok:
            raise DominationError(name, c)
    return _solve(sigma, mu1, mu2, exps, cfg, inhomogeneous=True)


def _solve(sigma, mu1, mu2, exps, cfg, inhomogeneous):
    sigma.check_dimension(exps.n)
    grid = work_grid(sigma, cfg.grid)
    if sigma.is_zero:
        return _trivial(grid, exps, cfg.lambda_hi)
    lam = calibrate_lambda_sub(sigma, exps, grid, cfg)
    u, v = subsolution_seed(sigma, exps, lam, grid)
    f1 = _forcing(mu1, exps, grid, cfg.kernel)
    f2 = _forcing(mu2, exps, grid, cfg.kernel)
    u, v, it, conv, tu, tv, worst, residual = _iterate(sigma, exps, cfg, grid, u, v, f1, f2)
    ok, lam_super = supersolution_check(sigma, mu1, mu2, exps, grid, cfg)
    notes = []
    if not ok:
        notes.append("no supersolution of the form lambda (A + A^gamma) within the search range")
    else:
        a = _comparable_values(sigma, exps, grid)
        if not (_below(u.values, lam_super * (a + a**exps.gamma1), 1e-9)
                and _below(v.values, lam_super * (a + a**exps.gamma2), 1e-9)):
            notes.append("iterate exceeds the calibrated supersolution")
    if not conv:
        notes.append(f"not converged after {it} iterations")
    return SolveResult(u, v, it, conv, tu, tv, lam, lam_super, worst, residual,
                       inhomogeneous=inhomogeneous, notes=tuple(notes))

