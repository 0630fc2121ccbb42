"""Discretized slab averages and Kakeya-type maximal functions.

Fields are nonnegative grid functions on dyadic cells of [-1,1]^n; a slab is
the delta-neighborhood of (U + a) intersected with the ball B(a, 1/2).  All
integrals are cell sums and the slab volume is the empirical in-slab cell
count, so averages of indicator fields are exact ratios and the usual
volume-constant fudge drops out of the contracts.

The translate supremum is a finite grid search over U-perp within B(0, 2):
fields have compact support in [-1,1]^n, so distant translates contribute
nothing.  Codimension-1 directions (tubes in the plane, hyperplane slabs)
use a vectorized accumulation over all translates at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .grassmann import Subspace, haar_sample

MAX_FIELD_DIM = 4
MIN_DELTA = 2.0 ** -8


@dataclass(frozen=True)
class MaximalField:
    """Nonnegative values on the dyadic cells of [-1,1]^n at side 2^-level."""

    n: int
    level: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n > MAX_FIELD_DIM:
            raise ValueError(f"ambient dimension capped at {MAX_FIELD_DIM}")
        m = 1 << (self.level + 1)
        v = np.asarray(self.values, dtype=float)
        if v.shape != (m,) * self.n:
            raise ValueError(f"values shape {v.shape} != {(m,) * self.n}")
        if not np.isfinite(v).all() or (v < 0).any():
            raise ValueError("values must be finite and nonnegative")
        object.__setattr__(self, "values", v)

    @property
    def cells_per_axis(self) -> int:
        return 1 << (self.level + 1)

    @property
    def resolution(self) -> float:
        return 2.0 ** -self.level

    def axis_centers(self) -> np.ndarray:
        m = self.cells_per_axis
        return -1.0 + (np.arange(m) + 0.5) * self.resolution

    def centers(self) -> np.ndarray:
        """All cell centers, shape (m^n, n)."""
        axes = [self.axis_centers()] * self.n
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=1)

    @classmethod
    def from_function(cls, n: int, level: int, fn) -> "MaximalField":
        """Evaluate fn on cell centers; fn takes an (m, n) array of points
        and returns m nonnegative values."""
        m = 1 << (level + 1)
        probe = cls(n, level, np.zeros((m,) * n))
        vals = np.asarray(fn(probe.centers()), dtype=float).reshape((m,) * n)
        return cls(n, level, vals)

    @classmethod
    def ball_indicator(cls, n: int, level: int, center=None, radius: float = 1.0) -> "MaximalField":
        c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
        return cls.from_function(
            n, level, lambda x: (np.linalg.norm(x - c, axis=1) <= radius).astype(float)
        )

    @classmethod
    def constant(cls, n: int, level: int, value: float) -> "MaximalField":
        m = 1 << (level + 1)
        return cls(n, level, np.full((m,) * n, float(value)))

    def translated(self, shift_cells: Sequence[int]) -> "MaximalField":
        """Shift by whole cells along each axis, filling with zeros."""
        v = self.values
        for axis, s in enumerate(shift_cells):
            out = np.zeros_like(v)
            if s >= 0:
                src = [slice(None)] * self.n
                dst = [slice(None)] * self.n
                src[axis] = slice(0, v.shape[axis] - s)
                dst[axis] = slice(s, None)
            else:
                src = [slice(None)] * self.n
                dst = [slice(None)] * self.n
                src[axis] = slice(-s, None)
                dst[axis] = slice(0, v.shape[axis] + s)
            out[tuple(dst)] = v[tuple(src)]
            v = out
        return MaximalField(self.n, self.level, v)


@dataclass(frozen=True)
class TubeSpec:
    """The delta-neighborhood of (U + a) within B(a, 1/2)."""

    direction: Subspace
    center: np.ndarray = field(repr=False)
    radius: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        if c.shape != (self.direction.n,):
            raise ValueError("center dimension mismatch")
        if not (0 < self.radius <= 0.5):
            raise ValueError(f"radius must be in (0, 1/2], got {self.radius}")
        if self.radius < MIN_DELTA:
            raise ValueError(f"radius below the enforced floor {MIN_DELTA}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))


def _check_resolution(f: MaximalField, delta: float):
    if f.resolution > delta / 4 + 1e-15:
        raise ValueError(
            f"field resolution {f.resolution} too coarse for delta {delta} (need <= delta/4)"
        )


def _tube_distances_sq(points: np.ndarray, tube: TubeSpec) -> np.ndarray:
    """Squared distance from points to the slab's core disc."""
    w = points - tube.center
    coords = w @ tube.direction.basis
    long_sq = (coords * coords).sum(axis=1)
    rad_sq = np.maximum((w * w).sum(axis=1) - long_sq, 0.0)
    excess = np.maximum(np.sqrt(long_sq) - 0.5, 0.0)
    return rad_sq + excess * excess


def tube_average(f: MaximalField, tube: TubeSpec) -> float:
    """Mean of the field over cells whose centers lie in the slab,
    normalized by the in-slab cell count."""
    if f.n != tube.direction.n:
        raise ValueError("field and tube live in different dimensions")
    _check_resolution(f, tube.radius)
    # Bounding box of the slab: per-axis extent of the core disc plus delta.
    row_norms = np.linalg.norm(tube.direction.basis, axis=1)
    half_extent = 0.5 * row_norms + tube.radius
    axis = f.axis_centers()
    slices = []
    for i in range(f.n):
        lo = tube.center[i] - half_extent[i] - f.resolution
        hi = tube.center[i] + half_extent[i] + f.resolution
        j0 = int(np.searchsorted(axis, lo, side="left"))
        j1 = int(np.searchsorted(axis, hi, side="right"))
        if j0 >= j1:
            return 0.0
        slices.append(slice(j0, j1))
    sub_axes = [axis[s] for s in slices]
    mesh = np.meshgrid(*sub_axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=1)
    inside = _tube_distances_sq(pts, tube) <= tube.radius**2
    if not inside.any():
        return 0.0
    vals = f.values[tuple(slices)].ravel()
    return float(vals[inside].sum() / inside.sum())


def _translate_grid(step: float, radius: float = 2.0) -> np.ndarray:
    """Symmetric 1-d grid of spacing `step` covering [-radius, radius]."""
    m = int(math.floor(radius / step))
    return np.arange(-m, m + 1) * step


def _kakeya_maximal_codim1(f: MaximalField, u: Subspace, delta: float, step: float) -> float:
    """All-translates accumulation when U-perp is one-dimensional."""
    w = u.complement_basis()[:, 0]
    centers = f.centers()
    long_coords = centers @ u.basis
    long_norm = np.linalg.norm(long_coords, axis=1)
    band = long_norm <= 0.5 + delta
    if not band.any():
        return 0.0
    t = centers[band] @ w
    excess = np.maximum(long_norm[band] - 0.5, 0.0)
    g_sq = delta * delta - excess * excess
    keep = g_sq >= 0
    t, g = t[keep], np.sqrt(g_sq[keep])
    vals = f.values.ravel()[np.flatnonzero(band)][keep]

    taus = _translate_grid(step)
    lo = np.searchsorted(taus, t - g, side="left")
    hi = np.searchsorted(taus, t + g, side="right")
    ok = lo < hi
    if not ok.any():
        return 0.0
    nbins = len(taus) + 1
    sums = np.zeros(nbins)
    counts = np.zeros(nbins)
    np.add.at(sums, lo[ok], vals[ok])
    np.add.at(sums, hi[ok], -vals[ok])
    np.add.at(counts, lo[ok], 1.0)
    np.add.at(counts, hi[ok], -1.0)
    sums = np.cumsum(sums)[: len(taus)]
    counts = np.cumsum(counts)[: len(taus)]
    with np.errstate(invalid="ignore", divide="ignore"):
        avgs = np.where(counts > 0, sums / counts, 0.0)
    return float(avgs.max())


def kakeya_maximal(f: MaximalField, u: Subspace, delta: float, search_step: float) -> float:
    """Supremum of tube_average over translates a on a grid of spacing
    search_step in U-perp within B(0, 2)."""
    if search_step > delta / 2 + 1e-15:
        raise ValueError("search_step must be <= delta/2")
    if not (MIN_DELTA <= delta <= 0.5):
        raise ValueError(f"delta must be in [{MIN_DELTA}, 1/2], got {delta}")
    if f.n != u.n:
        raise ValueError("field and direction live in different dimensions")
    _check_resolution(f, delta)
    codim = u.n - u.k
    if codim == 0:
        return tube_average(f, TubeSpec(u, np.zeros(u.n), delta))
    if codim == 1:
        return _kakeya_maximal_codim1(f, u, delta, search_step)
    w = u.complement_basis()
    grid1 = _translate_grid(search_step)
    mesh = np.meshgrid(*([grid1] * codim), indexing="ij")
    taus = np.stack([g.ravel() for g in mesh], axis=1)
    taus = taus[np.linalg.norm(taus, axis=1) <= 2.0]
    best = 0.0
    for tau in taus:
        a = w @ tau
        best = max(best, tube_average(f, TubeSpec(u, a, delta)))
    return best


def maximal_lp_norm(
    f: MaximalField,
    k: int,
    delta: float,
    p: float,
    ndirs: int,
    seed=None,
    search_step: Optional[float] = None,
) -> float:
    """Monte Carlo L^p norm of the maximal function over Haar directions
    (normalized Haar measure: mean of p-th powers, then p-th root)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if ndirs < 1:
        raise ValueError("ndirs must be >= 1")
    step = delta / 2 if search_step is None else search_step
    rng = np.random.default_rng(seed)
    acc = 0.0
    for _ in range(ndirs):
        u = haar_sample(f.n, k, rng)
        acc += kakeya_maximal(f, u, delta, step) ** p
    return (acc / ndirs) ** (1.0 / p)


def random_tube_union_field(
    n: int, level: int, delta: float, ntubes: int, seed=None
) -> MaximalField:
    """Indicator field of a union of random delta-tubes (line directions,
    centers in U-perp within B(0, 1/2))."""
    rng = np.random.default_rng(seed)
    tubes = []
    for _ in range(ntubes):
        u = haar_sample(n, 1, rng)
        w = u.complement_basis()
        tau = rng.uniform(-0.5, 0.5, size=n - 1)
        tubes.append(TubeSpec(u, w @ tau, delta))

    def fn(points):
        hit = np.zeros(len(points), dtype=bool)
        for tube in tubes:
            hit |= _tube_distances_sq(points, tube) <= tube.radius**2
        return hit.astype(float)

    return MaximalField.from_function(n, level, fn)


def delta_scan(
    deltas: Sequence[float],
    ntubes: int = 50,
    p: float = 2.0,
    ndirs: int = 20,
    seed=None,
) -> list:
    """Norm-versus-delta diagnostic table for a planar random tube union.

    Returns [(delta, lp_norm), ...]; the field for each delta is the union
    of ntubes random delta-tubes at the matching resolution.
    """
    rows = []
    for delta in deltas:
        level = math.ceil(math.log2(4.0 / delta))
        f = random_tube_union_field(2, level, delta, ntubes, seed)
        norm = maximal_lp_norm(f, 1, delta, p, ndirs, seed)
        rows.append((float(delta), float(norm)))
    return rows
