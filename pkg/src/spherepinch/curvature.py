"""Ricci curvature of doubly warped sphere metrics.

For g = dr^2 + a^2 g_S1 + b^2 g_S^{n-2} the Ricci tensor is diagonal in the
frame (d/dr, u, v) with u tangent to the circle and v tangent to the
(n-2)-sphere:

    Ric(r, r) = -a''/a - (n-2) b''/b
    Ric(u, u) = -a''/a - (n-2) a'b'/(ab)
    Ric(v, v) = -b''/b - a'b'/(ab) + (n-3) (1 - b'^2)/b^2

(u, v taken of unit length). Off-diagonal entries vanish identically, so
only the three diagonal quotients are stored.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .warped import WarpedSphereMetric

__all__ = [
    "RicciFrame",
    "RicciMin",
    "LowerBoundReport",
    "OneSidedEvaluationRequired",
    "ricci_frame",
    "ricci_arrays",
    "ricci_min",
    "scan_radii",
    "check_lower_bound",
]

SEAM_OFFSET = 1e-9
ENDPOINT_MARGIN = 1e-6
BOUND_SLACK = 1e-9


class OneSidedEvaluationRequired(ValueError):
    """Raised when the frame is requested exactly at a C1 seam."""


@dataclass(frozen=True)
class RicciFrame:
    r: float
    ric_r: float
    ric_u: float
    ric_v: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.ric_r, self.ric_u, self.ric_v)


def ricci_arrays(metric: WarpedSphereMetric, r):
    """Vectorized frame values; seams take the right-hand segment."""
    n = metric.n
    a, a1, a2 = (metric.a(r, k) for k in range(3))
    b, b1, b2 = (metric.b(r, k) for k in range(3))
    mixed = a1 * b1 / (a * b)
    ric_r = -a2 / a - (n - 2) * b2 / b
    ric_u = -a2 / a - (n - 2) * mixed
    ric_v = -b2 / b - mixed
    if n > 3:
        ric_v = ric_v + (n - 3) * metric.b.slope_defect(r) / (b * b)
    return ric_r, ric_u, ric_v


def ricci_frame(metric: WarpedSphereMetric, r: float) -> RicciFrame:
    r = float(r)
    if not 0.0 < r < metric.R:
        raise ValueError(f"r={r!r} outside the open interval (0, {metric.R!r})")
    if r in metric.interior_breakpoints:
        raise OneSidedEvaluationRequired(
            f"r={r!r} is a C1 seam; evaluate at r +/- {SEAM_OFFSET:g} instead"
        )
    return RicciFrame(r, *(float(x) for x in ricci_arrays(metric, r)))


def scan_radii(metric: WarpedSphereMetric, grid_points: int = 256) -> np.ndarray:
    """Uniform radii plus geometric clusters at 0, R and both sides of each seam."""
    if grid_points < 64:
        raise ValueError("grid_points must be >= 64")
    R = metric.R
    lo, hi = ENDPOINT_MARGIN, R - ENDPOINT_MARGIN
    seams = metric.interior_breakpoints
    n_clusters = 2 + 2 * len(seams)
    per_cluster = max(4, grid_points // (2 * n_clusters))
    n_uniform = max(8, grid_points - per_cluster * n_clusters)

    pts = [np.linspace(lo, hi, n_uniform)]
    pts.append(np.geomspace(lo, 0.25 * R, per_cluster))
    pts.append(R - np.geomspace(ENDPOINT_MARGIN, 0.25 * R, per_cluster))
    for s in seams:
        span = 0.5 * min(s, R - s)
        offsets = np.geomspace(SEAM_OFFSET, span, per_cluster)
        pts.append(s - offsets)
        pts.append(s + offsets)
    r = np.unique(np.clip(np.concatenate(pts), lo, hi))
    if seams:
        r = r[~np.isin(r, seams)]
    return r


@dataclass(frozen=True)
class RicciMin:
    value: float
    r: float
    direction: str


def ricci_min(metric: WarpedSphereMetric, grid_points: int = 256) -> RicciMin:
    r = scan_radii(metric, grid_points)
    values = np.stack(ricci_arrays(metric, r))  # (3, len(r))
    flat = int(np.argmin(values))  # first occurrence: fixed order
    d, i = divmod(flat, values.shape[1])
    return RicciMin(float(values[d, i]), float(r[i]), "ruv"[d])


@dataclass(frozen=True)
class LowerBoundReport:
    bound: float
    passed: bool
    worst: RicciMin


def check_lower_bound(metric: WarpedSphereMetric, bound: float, grid_points: int = 256) -> LowerBoundReport:
    worst = ricci_min(metric, grid_points)
    return LowerBoundReport(float(bound), worst.value >= bound - BOUND_SLACK, worst)
