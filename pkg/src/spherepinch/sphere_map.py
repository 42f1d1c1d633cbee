"""The eigenfunction map x -> (f_1, ..., f_{n+1})(x) / |(f_1, ..., f_{n+1})(x)|.

Functions are separated, f = phi(r) * Theta(theta) * Y(v), and each is
rescaled so that (n+1) * mean(f^2) = 1 over the manifold. Quality checks:
sup |sum f_i^2 - 1|, metric distortion and Lipschitz quotient against a
sampled distance matrix, the pointwise lower bound for Lipschitz functions
under Ric >= 0, and the degree by signed preimage counting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .spectrum import Eigenpair, RadialMode, lowest_eigenpairs
from .warped import WarpedSphereMetric, gauss_panels

__all__ = [
    "SphereFunction",
    "SphereMapSample",
    "MapUndefinedError",
    "DegreeIndeterminate",
    "DegreeReport",
    "LipschitzFloorReport",
    "coordinate_functions",
    "eigen_functions",
    "lowest_eigen_functions",
    "function_mean_square",
    "build_phi",
    "h_deviation",
    "map_distortion",
    "empirical_lipschitz",
    "lipschitz_floor_check",
    "lipschitz_floor_for_function",
    "manifold_mean",
    "degree_estimate",
    "structured_points",
]

H_FLOOR = 1e-8
MIN_PAIR_DISTANCE = 0.05


class MapUndefinedError(ValueError):
    pass


class DegreeIndeterminate(RuntimeError):
    pass


@dataclass(frozen=True)
class SphereFunction:
    """phi(r) times cos/sin(m theta) times an angular factor on S^{n-2}.

    ``circle`` is 'cos' or 'sin' (ignored when m = 0). ``sphere`` selects the
    S^{n-2} factor: for l = 1 the coordinate index of v; for n = 3 and
    l >= 2, 0 for cos(l psi) and 1 for sin(l psi).
    """

    mode: RadialMode
    profile: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    circle: str = "cos"
    sphere: int = 0
    label: str = ""

    def angular(self, theta, psi, n: int):
        m, l = self.mode.m, self.mode.l
        t = 1.0 if m == 0 else (np.cos(m * theta) if self.circle == "cos" else np.sin(m * theta))
        if l == 0:
            y = 1.0
        elif l == 1:
            if self.sphere > n - 2:
                raise ValueError(f"S^{n - 2} has no coordinate {self.sphere}")
            y = np.cos(psi) if self.sphere == 0 else (np.sin(psi) if self.sphere == 1 else 0.0 * psi)
        elif n == 3:
            y = np.cos(l * psi) if self.sphere == 0 else np.sin(l * psi)
        else:
            raise ValueError("angular degree >= 2 is only supported for n = 3")
        return t * y

    def angular_mean_square(self, n: int) -> float:
        m, l = self.mode.m, self.mode.l
        t = 1.0 if m == 0 else 0.5
        if l == 0:
            y = 1.0
        elif l == 1:
            y = 1.0 / (n - 1)
        else:
            y = 0.5
        return t * y

    def __call__(self, points: np.ndarray, n: int) -> np.ndarray:
        r, theta, psi = points[:, 0], points[:, 1], points[:, 2]
        return self.profile(r) * self.angular(theta, psi, n)


def coordinate_functions(metric: WarpedSphereMetric) -> list[SphereFunction]:
    """The n+1 restrictions of linear coordinates (round sphere only).

    With a = sin r, b = cos r these are sin r cos theta, sin r sin theta and
    cos r v_j.
    """
    n = metric.n
    one = RadialMode(1, 0)
    lin = RadialMode(0, 1)
    out = [
        SphereFunction(one, np.sin, "cos", label="sin r cos t"),
        SphereFunction(one, np.sin, "sin", label="sin r sin t"),
    ]
    out += [SphereFunction(lin, np.cos, sphere=j, label=f"cos r v{j}") for j in range(n - 1)]
    return out


def _profile_from_pair(pair: Eigenpair) -> Callable[[np.ndarray], np.ndarray]:
    spline = CubicSpline(pair.r, pair.phi, extrapolate=True)
    R = pair.problem.metric.R
    return lambda r: spline(np.clip(np.asarray(r, dtype=float), 0.0, R))


def eigen_functions(pairs: Sequence[Eigenpair], n: int) -> list[SphereFunction]:
    """Real eigenfunctions from radial eigenpairs, one per angular basis element.

    Each pair expands to its full angular multiplicity in the order
    (cos, sin) x (sphere components); callers take the first n+1.
    """
    out = []
    for pair in pairs:
        profile = _profile_from_pair(pair)
        circles = ["cos"] if pair.mode.m == 0 else ["cos", "sin"]
        l = pair.mode.l
        if l == 0:
            spheres = [0]
        elif l == 1:
            spheres = list(range(n - 1))
        elif n == 3:
            spheres = [0, 1]
        else:
            raise ValueError("angular degree >= 2 is only supported for n = 3")
        for c in circles:
            for s in spheres:
                out.append(
                    SphereFunction(pair.mode, profile, c, s, label=f"({pair.mode.m},{l})#{pair.index} {c}{s}")
                )
    return out


def lowest_eigen_functions(metric: WarpedSphereMetric, N: int = 2000) -> list[SphereFunction]:
    """The n+1 lowest nonconstant eigenfunctions, ties broken by (mode, circle, sphere)."""
    n = metric.n
    return eigen_functions(lowest_eigenpairs(metric, n + 1, N), n)[: n + 1]



def function_mean_square(metric: WarpedSphereMetric, fn: SphereFunction, quad_points: int = 4096) -> float:
    r, qw = gauss_panels(metric.breakpoints, quad_points)
    w = metric.weight(r) * qw
    return float(np.sum(fn.profile(r) ** 2 * w) / np.sum(w)) * fn.angular_mean_square(metric.n)


@dataclass
class SphereMapSample:
    points: np.ndarray  # (P, 3) reduced coordinates
    f_values: np.ndarray  # (P, n+1), normalized
    phi: np.ndarray  # (P, n+1) unit vectors
    h: np.ndarray  # (P,)
    n: int

    def rotated(self, Q: np.ndarray) -> "SphereMapSample":
        """Apply an orthogonal transform to the function tuple."""
        f = self.f_values @ Q.T
        h = np.sum(f * f, axis=1)
        return SphereMapSample(self.points, f, f / np.sqrt(h)[:, None], h, self.n)


def build_phi(
    metric: WarpedSphereMetric,
    functions: Sequence[SphereFunction],
    points: np.ndarray,
    normalize: bool = True,
) -> SphereMapSample:
    n = metric.n
    if len(functions) != n + 1:
        raise ValueError(f"need exactly n+1 = {n + 1} functions, got {len(functions)}")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    cols = []
    for fn in functions:
        vals = np.asarray(fn(points, n), dtype=float) * np.ones(len(points))
        if normalize:
            ms = function_mean_square(metric, fn)
            if ms <= 0.0:
                raise MapUndefinedError(f"function {fn.label or fn.mode} vanishes identically")
            vals = vals / math.sqrt((n + 1) * ms)
        cols.append(vals)
    f = np.column_stack(cols)
    h = np.sum(f * f, axis=1)
    bad = np.nonzero(h <= H_FLOOR)[0]
    if bad.size:
        raise MapUndefinedError(f"map undefined at sample point {points[bad[0]].tolist()} (h={h[bad[0]]:.3g})")
    return SphereMapSample(points, f, f / np.sqrt(h)[:, None], h, n)


def h_deviation(sample: SphereMapSample) -> float:
    return float(np.max(np.abs(sample.h - 1.0)))


def sphere_distances(sample: SphereMapSample) -> np.ndarray:
    return np.arccos(np.clip(sample.phi @ sample.phi.T, -1.0, 1.0))


def map_distortion(sample: SphereMapSample, d_M: np.ndarray) -> float:
    if len(sample.points) < 2:
        return 0.0
    return float(np.max(np.abs(sphere_distances(sample) - d_M)))


def empirical_lipschitz(sample: SphereMapSample, d_M: np.ndarray, min_distance: float = MIN_PAIR_DISTANCE) -> float:
    mask = d_M >= min_distance
    if not mask.any():
        return float("nan")
    return float(np.max(sphere_distances(sample)[mask] / d_M[mask]))


@dataclass(frozen=True)
class LipschitzFloorReport:
    passed: bool
    lower_bound: float
    min_abs_h: float
    worst_slack: float
    n_points: int


def lipschitz_floor_check(values, mean: float, sup: float, diam: float, lip: float, n: int) -> LipschitzFloorReport:
    """|h| >= sup - 2 (diam * lip)^(n/(n+1)) (sup - mean)^(1/(n+1)) at every point.

    ``mean`` is the normalized L1 norm of h and ``sup`` its sup norm.
    """
    absh = np.abs(np.asarray(values, dtype=float))
    gap = max(sup - mean, 0.0)
    bound = sup - 2.0 * (diam * lip) ** (n / (n + 1)) * gap ** (1.0 / (n + 1))
    slack = absh - bound
    return LipschitzFloorReport(bool(np.all(slack >= 0.0)), float(bound), float(absh.min()), float(slack.min()), absh.size)


def manifold_mean(
    metric: WarpedSphereMetric, func: Callable[[np.ndarray], np.ndarray], quad_points: int = 256, angular: int = 64
) -> float:
    """Volume average of func(points) for functions of (r, theta, psi).

    psi is measured from a pole of S^{n-2}, so the angular density is
    |sin psi|^(n-3); for n >= 4 func must be invariant under rotations of
    S^{n-2} fixing that pole. Gauss panels in r, uniform nodes on both
    circles.
    """
    r, qw = gauss_panels(metric.breakpoints, quad_points)
    ang = np.arange(angular) * (2 * math.pi / angular)
    R_, T_, P_ = np.meshgrid(r, ang, ang, indexing="ij")
    pts = np.column_stack([R_.ravel(), T_.ravel(), P_.ravel()])
    dens = (metric.weight(r) * qw)[:, None, None] * np.abs(np.sin(ang))[None, None, :] ** (metric.n - 3)
    dens = np.broadcast_to(dens, R_.shape).ravel()
    return float(np.sum(np.asarray(func(pts), dtype=float) * dens) / np.sum(dens))


def lipschitz_floor_for_function(
    metric: WarpedSphereMetric,
    func: Callable[[np.ndarray], np.ndarray],
    points: np.ndarray,
    d_M: np.ndarray,
    diam: float,
    min_distance: float = MIN_PAIR_DISTANCE,
) -> LipschitzFloorReport:
    """Evaluate the pointwise lower bound for ``func`` on a sample.

    The L1 mean comes from quadrature, the sup from the sample and the
    Lipschitz constant from the largest difference quotient over pairs
    at distance >= ``min_distance``.
    """
    vals = np.asarray(func(points), dtype=float)
    mean = manifold_mean(metric, lambda p: np.abs(func(p)))
    sup = float(np.max(np.abs(vals)))
    mask = d_M >= min_distance
    lip = float(np.max(np.abs(vals[:, None] - vals[None, :])[mask] / d_M[mask])) if mask.any() else 0.0
    return lipschitz_floor_check(vals, mean, sup, diam, lip, metric.n)


# degree ---------------------------------------------------------------


def structured_points(metric: WarpedSphereMetric, counts: tuple[int, int, int]) -> tuple[np.ndarray, tuple[int, int, int]]:
    """Closed tensor grid for n = 3: radii 0..R inclusive, periodic angles.

    Returns points of shape (nr*nt*np, 3) in (r, theta, psi) order and the
    grid shape.
    """
    nr, nt, npsi = counts
    r = np.linspace(0.0, metric.R, nr)
    t = np.arange(nt) * (2 * math.pi / nt)
    p = np.arange(npsi) * (2 * math.pi / npsi)
    R_, T_, P_ = np.meshgrid(r, t, p, indexing="ij")
    return np.column_stack([R_.ravel(), T_.ravel(), P_.ravel()]), (nr, nt, npsi)


def _kuhn_simplices():
    out = []
    for perm in permutations(range(3)):
        verts = [(0, 0, 0)]
        cur = [0, 0, 0]
        for ax in perm:
            cur[ax] += 1
            verts.append(tuple(cur))
        sign = round(np.linalg.det(np.eye(3)[list(perm)]))
        out.append((verts, sign))
    return out


@dataclass(frozen=True)
class DegreeReport:
    degree: int
    votes: tuple[int | None, ...]  # None = discarded target
    agreeing: int
    disagreement: bool


def degree_estimate(
    phi_grid: np.ndarray,
    steps: tuple[float, float, float],
    seed: int = 0,
    n_targets: int = 16,
    jac_floor: float = 1e-4,
) -> DegreeReport:
    """Signed preimage count of random targets under a map S^3-grid -> S^3.

    ``phi_grid`` has shape (nr, nt, np, 4): radii 0..R inclusive, periodic
    circle positions. Every grid cell is split into 6 simplices; a simplex
    is a candidate preimage of y when y lies in the cone over its image,
    and contributes the sign of the determinant times the orientation of
    the simplex in (r, theta, psi). Targets hitting a simplex whose
    Jacobian magnitude is below ``jac_floor`` are discarded.
    """
    nr, nt, npsi, dim = phi_grid.shape
    if dim != 4:
        raise ValueError("degree_estimate handles maps into S^3 (n = 3)")
    cell_volume = steps[0] * steps[1] * steps[2]
    ii, jj, ll = np.meshgrid(np.arange(nr - 1), np.arange(nt), np.arange(npsi), indexing="ij")
    ii, jj, ll = ii.ravel(), jj.ravel(), ll.ravel()

    mats, signs = [], []
    for verts, sign in _kuhn_simplices():
        cols = [phi_grid[ii + di, (jj + dj) % nt, (ll + dl) % npsi] for di, dj, dl in verts]
        mats.append(np.stack(cols, axis=-1))  # (cells, 4, 4) columns = vertex images
        signs.append(np.full(len(ii), sign))
    M = np.concatenate(mats)
    S = np.concatenate(signs)
    det = np.linalg.det(M)
    scale = np.max(np.abs(M), axis=(1, 2))
    good = np.abs(det) > 1e-13 * np.maximum(scale, 1e-300) ** 4
    M, S, det = M[good], S[good], det[good]
    jac = np.abs(det) / cell_volume
    inv = np.linalg.inv(M) if len(M) else M

    rng = np.random.default_rng(seed)
    targets = rng.normal(size=(n_targets, 4))
    targets /= np.linalg.norm(targets, axis=1, keepdims=True)
    votes: list[int | None] = []
    for y in targets:
        if not len(M):
            votes.append(0)
            continue
        c = inv @ y
        hit = np.all(c >= 0.0, axis=1)
        if np.any(jac[hit] < jac_floor):
            votes.append(None)
            continue
        votes.append(int(np.sum(np.sign(det[hit]) * S[hit])))
    valid = [v for v in votes if v is not None]
    if not valid:
        raise DegreeIndeterminate(f"all {n_targets} targets fell near the critical set")
    values, counts = np.unique(valid, return_counts=True)
    best = int(np.argmax(counts))
    return DegreeReport(int(values[best]), tuple(votes), int(counts[best]), len(values) > 1)
