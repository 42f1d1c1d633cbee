"""Sampled metric spaces, diameter/radius, and the half-sphere correspondence.

Sample points are stored as (r, theta, psi): theta a position on the circle
factor and psi a position on a fixed great circle of S^{n-2} (for n = 3 that
great circle is the whole factor). Pairwise distances only depend on r, r'
and the two angular separations, so one shortest-path field per distinct
radius serves every pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geodesic import GeodesicGrid
from .warped import WarpedSphereMetric

__all__ = [
    "ReducedPoint",
    "SampledMetricSpace",
    "DistanceEstimate",
    "GHReport",
    "ResourceGuardError",
    "UnsupportedMetricError",
    "distance",
    "sample_space",
    "diameter_radius",
    "half_sphere_distance",
    "gh_distortion",
    "circle_fiber_distance",
    "wrap_separation",
    "DistanceCosineTest",
]

MAX_PAIR_ENTRIES = 10**7


class ResourceGuardError(RuntimeError):
    pass


class UnsupportedMetricError(ValueError):
    pass


@dataclass(frozen=True)
class ReducedPoint:
    r: float
    dtheta: float = 0.0
    psi: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.dtheta <= math.pi and 0.0 <= self.psi <= math.pi):
            raise ValueError("angular coordinates must lie in [0, pi]")
        if self.r < 0.0:
            raise ValueError("r must be >= 0")


def wrap_separation(x, y):
    """Angular separation in [0, pi] of circle positions x, y."""
    d = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)) % (2 * math.pi)
    return np.minimum(d, 2 * math.pi - d)


@dataclass(frozen=True)
class DistanceEstimate:
    value: float
    coarse: float | None
    resolution: int

    @property
    def metrication_estimate(self) -> float | None:
        return None if self.coarse is None else self.coarse - self.value


def distance(
    metric: WarpedSphereMetric, x: ReducedPoint, y: ReducedPoint, resolution: int = 128, stencil: int = 3
) -> DistanceEstimate:
    """Grid geodesic distance, also at half resolution when that is >= 32."""
    for p in (x, y):
        if p.r > metric.R + 1e-12:
            raise ValueError(f"point {p} outside [0, R]")
    dt = abs(x.dtheta - y.dtheta)
    dp = abs(x.psi - y.psi)
    fine = GeodesicGrid(metric, resolution, stencil).distance(x.r, y.r, dt, dp)
    coarse = None
    if resolution // 2 >= 32 and resolution % 2 == 0:
        coarse = GeodesicGrid(metric, resolution // 2, stencil).distance(x.r, y.r, dt, dp)
    return DistanceEstimate(fine, coarse, resolution)


def circle_fiber_distance(grid: GeodesicGrid, r: float) -> float:
    """Distance between (r, 0, 0) and (r, pi, 0)."""
    return grid.distance(r, r, math.pi, 0.0)


@dataclass
class SampledMetricSpace:
    points: np.ndarray  # (P, 3): r, theta position, psi position
    dist: np.ndarray  # (P, P)
    r_index: np.ndarray = field(default=None, repr=False)
    grid: GeodesicGrid | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.points)


def _aligned_positions(count: int, nodes_per_pi: int) -> np.ndarray:
    """``count`` circle positions in [0, 2 pi) snapped to multiples of pi/nodes_per_pi."""
    steps = np.round(np.arange(count) * 2 * nodes_per_pi / count).astype(int)
    return np.unique(steps) * (math.pi / nodes_per_pi)


def sample_space(
    metric: WarpedSphereMetric,
    counts: tuple[int, int, int] = (6, 6, 6),
    resolution: int = 128,
    stencil: int = 3,
    grid: GeodesicGrid | None = None,
) -> SampledMetricSpace:
    """Structured sample with all pairwise grid distances.

    Radii are spread over [0, R] and circle positions over the full circle;
    all snap to grid nodes so lookups are exact.
    """
    cr, ct, cp = counts
    total = cr * ct * cp
    if total * total > MAX_PAIR_ENTRIES:
        raise ResourceGuardError(f"{total} points give more than {MAX_PAIR_ENTRIES} pair entries")
    grid = grid or GeodesicGrid(metric, resolution, stencil)
    if cr == 1:
        r_idx = np.array([0])
    else:
        r_idx = np.unique(np.round(np.linspace(0, grid.nr, cr)).astype(int))
    thetas = _aligned_positions(ct, grid.nt)
    psis = _aligned_positions(cp, grid.np)
    I, T, P = np.meshgrid(r_idx, thetas, psis, indexing="ij")
    I, T, P = I.ravel(), T.ravel(), P.ravel()
    points = np.column_stack([grid.r[I], T, P])
    return SampledMetricSpace(points, pairwise_distances(grid, I, T, P), I, grid)


def pairwise_distances(grid: GeodesicGrid, r_idx, thetas, psis) -> np.ndarray:
    r_idx = np.asarray(r_idx)
    jt = np.round(wrap_separation(thetas[:, None], thetas[None, :]) / grid.ht).astype(int)
    jp = np.round(wrap_separation(psis[:, None], psis[None, :]) / grid.hp).astype(int)
    D = np.empty((len(r_idx), len(r_idx)))
    grid.prefetch(np.unique(r_idx))
    for i in np.unique(r_idx):
        rows = np.nonzero(r_idx == i)[0]
        fld = grid.field_from(int(i))
        D[rows] = fld[r_idx[None, :], jt[rows], jp[rows]]
    D = np.minimum(D, D.T)
    np.fill_diagonal(D, 0.0)
    return D


def diameter_radius(space: SampledMetricSpace) -> tuple[float, float]:
    """(max pairwise distance, min over x of max over y)."""
    if len(space) < 2:
        raise ValueError("need at least 2 points")
    D = space.dist
    return float(D.max()), float(D.max(axis=1).min())


def half_sphere_distance(s1, psi, s2):
    """Spherical distance between points at distances s1, s2 from a pole, angle psi apart."""
    c = np.cos(s1) * np.cos(s2) + np.sin(s1) * np.sin(s2) * np.cos(psi)
    out = np.arccos(np.clip(c, -1.0, 1.0))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class GHReport:
    k: int
    resolution: int
    max_distortion: float
    covering_defect: float
    circle_fiber_max: float
    radius: float
    diameter: float
    n_points: int

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "resolution": self.resolution,
            "max_distortion": self.max_distortion,
            "covering_defect": self.covering_defect,
            "circle_fiber_max": self.circle_fiber_max,
            "radius": self.radius,
            "diameter": self.diameter,
            "n_points": self.n_points,
        }


def gh_distortion(
    metric: WarpedSphereMetric,
    resolution: int = 128,
    counts: tuple[int, int, int] = (9, 4, 12),
    stencil: int = 3,
    model_s: int = 65,
) -> GHReport:
    """Distortion of (r, u, v) -> point at distance R - r from the pole in direction v.

    The circle coordinate is forgotten. The covering defect is the largest
    distance from a model sample point to the image of the grid radii.
    """
    if not metric.is_pinch:
        raise UnsupportedMetricError("gh_distortion needs a member of the pinch family")
    space = sample_space(metric, counts, resolution, stencil)
    R = metric.R
    s = R - space.points[:, 0]
    psi_sep = wrap_separation(space.points[:, 2][:, None], space.points[:, 2][None, :])
    model = half_sphere_distance(s[:, None], psi_sep, s[None, :])
    distortion = float(np.max(np.abs(space.dist - model)))

    # model sample: s over the whole closed hemisphere, directions of the sample;
    # image: every grid radius in those directions
    grid = space.grid
    psis = np.unique(space.points[:, 2])
    ms = np.linspace(0.0, math.pi / 2, model_s)
    img_s = R - grid.r
    sep = wrap_separation(psis[:, None], psis[None, :])
    cross = half_sphere_distance(
        ms[:, None, None, None], sep[None, :, None, :], img_s[None, None, :, None]
    )  # (model s, model psi, image s, image psi)
    covering = float(cross.min(axis=(2, 3)).max())

    fiber = max(float(grid.field_from(int(i))[int(i), grid.nt, 0]) for i in np.unique(space.r_index))
    diam, rad = diameter_radius(space)
    return GHReport(
        metric.constants.k, resolution, distortion, covering, fiber, rad, diam, len(space)
    )


@dataclass
class DistanceCosineTest:
    """Test function cos(d(x0, .)) with x0 on the S^{n-2} factor at r = 0.

    The function depends on (r, psi) only. Its Rayleigh quotient is
    computed from the grid distance field by central differences and
    trapezoidal quadrature against a(r) b(r)^(n-2) sin(psi)^(n-3).
    """

    resolution: int = 128
    stencil: int = 3
    grid: GeodesicGrid | None = field(default=None, repr=False)

    def values(self, metric: WarpedSphereMetric) -> tuple[np.ndarray, GeodesicGrid]:
        grid = self.grid or GeodesicGrid(metric, self.resolution, self.stencil)
        return np.cos(grid.field_from(0)[:, 0, :]), grid

    def rayleigh(self, metric: WarpedSphereMetric) -> float:
        from .spectrum import DegenerateTestFunction

        f, grid = self.values(metric)
        r = grid.r
        psi = np.arange(grid.np + 1) * grid.hp
        fr = np.gradient(f, r, axis=0)
        fp = np.gradient(f, psi, axis=1)
        a, b = metric.a(r), metric.b(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            tangential = np.where(b[:, None] > 0, (fp / b[:, None]) ** 2, 0.0)
        n = metric.n
        weight = (a * b ** (n - 2))[:, None] * (np.sin(psi) ** (n - 3))[None, :]

        def integrate(g):
            return float(np.trapezoid(np.trapezoid(g * weight, psi, axis=1), r))

        total = integrate(np.ones_like(f))
        mean = integrate(f) / total
        var = integrate((f - mean) ** 2)
        if var <= 1e-300:
            raise DegenerateTestFunction("test function has zero variance")
        return integrate(fr**2 + tangential) / var
