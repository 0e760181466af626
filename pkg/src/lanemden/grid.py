"""Radius grids and nonnegative radial functions sampled on them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MIN_POINTS = 8
MAX_CELL_RATIO = 16.0


@dataclass(frozen=True, eq=False)
class RadialGrid:
    radii: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float).copy()
        r.setflags(write=False)
        object.__setattr__(self, "radii", r)
        if r.ndim != 1 or r.size < MIN_POINTS:
            raise ValueError(f"a radial grid needs at least {MIN_POINTS} points, got {r.size}")
        if not np.all(np.isfinite(r)) or r[0] <= 0:
            raise ValueError("grid radii must be positive and finite")
        if np.any(np.diff(r) <= 0):
            raise ValueError("grid radii must be strictly increasing")
        if np.max(r[1:] / r[:-1]) > MAX_CELL_RATIO:
            raise ValueError(f"consecutive grid radii differ by more than a factor {MAX_CELL_RATIO}")

    @classmethod
    def logspace(cls, r_min: float, r_max: float, points: int) -> "RadialGrid":
        if not 0 < r_min < r_max:
            raise ValueError(f"need 0 < r_min < r_max, got {r_min}, {r_max}")
        return cls(np.geomspace(r_min, r_max, int(points)))

    def __len__(self) -> int:
        return self.radii.size

    @property
    def r_min(self) -> float:
        return float(self.radii[0])

    @property
    def r_max(self) -> float:
        return float(self.radii[-1])

    def doubled(self) -> "RadialGrid":
        """Insert the geometric midpoint of every cell; old radii are kept."""
        r = self.radii
        mid = np.sqrt(r[1:] * r[:-1])
        out = np.empty(2 * r.size - 1)
        out[0::2] = r
        out[1::2] = mid
        return RadialGrid(out)

    def with_points(self, points, rel_tol: float = 1e-9) -> "RadialGrid":
        """Merge extra radii lying inside the grid range.

        A point within ``rel_tol`` of an existing radius replaces it, so the
        point itself is always a node afterwards.
        """
        r = self.radii.copy()
        extra = []
        for p in points:
            if not (self.r_min <= p <= self.r_max):
                continue
            k = int(np.argmin(np.abs(r - p)))
            if abs(p - r[k]) <= rel_tol * r[k]:
                r[k] = p
            else:
                extra.append(float(p))
        return RadialGrid(np.unique(np.concatenate([r, extra])))

    def covering(self, points) -> "RadialGrid":
        """Extend the range geometrically past ``points`` and merge them in."""
        pts = [float(p) for p in points if 0 < p < math.inf]
        r = list(self.radii)
        if pts:
            lo_step = r[1] / r[0]
            while r[0] >= min(pts):
                r.insert(0, r[0] / lo_step)
            hi_step = r[-1] / r[-2]
            while r[-1] <= max(pts):
                r.append(r[-1] * hi_step)
        return RadialGrid(np.asarray(r)).with_points(pts)

    def deepened(self) -> "RadialGrid":
        """Twice the log-range (extended equally at both ends), twice the cells."""
        lo, hi = math.log(self.r_min), math.log(self.r_max)
        half = 0.5 * (hi - lo)
        return RadialGrid(np.exp(np.linspace(lo - half, hi + half, 2 * (len(self) - 1) + 1)))

    def shared_indices(self, other: "RadialGrid") -> tuple[np.ndarray, np.ndarray]:
        """Indices of radii common to both grids (relative match 1e-12)."""
        idx_other = np.searchsorted(other.radii, self.radii)
        idx_other = np.clip(idx_other, 0, len(other) - 1)
        ok = np.abs(other.radii[idx_other] - self.radii) <= 1e-12 * self.radii
        return np.nonzero(ok)[0], idx_other[ok]


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Nonnegative function: log-log linear between radii, powers beyond.

    Below the first radius the function is ``values[0] (r/r_0)^head_exponent``
    and above the last ``values[-1] (r/r_N)^tail_exponent``.
    """

    grid: RadialGrid
    values: np.ndarray
    head_exponent: float = 0.0
    tail_exponent: float = 0.0
    _exps: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).copy()
        if v.shape != self.grid.radii.shape:
            raise ValueError("values must have one entry per grid radius")
        if np.any(v < 0) or np.any(np.isnan(v)):
            raise ValueError("grid function values must be nonnegative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "_exps", _cell_exponents(self.grid.radii, v))

    @classmethod
    def fit(cls, grid: RadialGrid, values, tail_bounds=(-math.inf, 0.0)) -> "GridFunction":
        """Continuation exponents taken from the outermost cells.

        The tail exponent is clamped into ``tail_bounds``.
        """
        v = np.asarray(values, dtype=float)
        e = _cell_exponents(grid.radii, v)
        lo, hi = tail_bounds
        return cls(grid, v, float(e[0]), float(min(max(e[-1], lo), hi)))

    @property
    def cell_exponents(self) -> np.ndarray:
        return self._exps

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        r, v = self.grid.radii, self.values
        out = np.empty(x.shape)
        k = np.clip(np.searchsorted(r, x, side="right") - 1, 0, r.size - 2)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            inside = v[k] * (x / r[k]) ** self._exps[k]
            out = np.where(v[k] * v[k + 1] > 0, inside, np.where(x == r[k], v[k], 0.0))
            out = np.where(x == r[k + 1], v[k + 1], out)
            head = v[0] * (x / r[0]) ** self.head_exponent
            tail = v[-1] * (x / r[-1]) ** self.tail_exponent
        out = np.where(x < r[0], head, out)
        out = np.where(x > r[-1], tail, out)
        if v[0] == 0:
            out = np.where(x < r[0], 0.0, out)
        if v[-1] == 0:
            out = np.where(x > r[-1], 0.0, out)
        return out if out.ndim else float(out)

    def at_origin(self) -> float:
        if self.values[0] == 0 or self.head_exponent > 0:
            return 0.0
        if self.head_exponent == 0:
            return float(self.values[0])
        return math.inf

    def scaled(self, c: float) -> "GridFunction":
        return GridFunction(self.grid, c * self.values, self.head_exponent, self.tail_exponent)


def _cell_exponents(r: np.ndarray, v: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        e = np.log(v[1:] / v[:-1]) / np.log(r[1:] / r[:-1])
    return np.where((v[1:] > 0) & (v[:-1] > 0), e, 0.0)
