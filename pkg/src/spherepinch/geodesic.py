"""Shortest-path distances on the reduced (r, dtheta, dpsi) slice.

A minimizing geodesic between two points of a doubly warped sphere can be
taken inside the slice spanned by the radial direction, the circle, and the
great circle of S^{n-2} through the two angular positions, so distances
only need the 3-D metric ds^2 = dr^2 + a(r)^2 dtheta^2 + b(r)^2 dpsi^2 on
[0, R] x [0, pi] x [0, pi]. The angular axes are folded by the reflections
theta -> -theta and psi -> -psi, so the source can always sit at
theta = psi = 0.

Edges join nodes whose index offset is a primitive integer vector with
components bounded by the stencil radius (radius 2 gives the 16-neighbour
stencil in every coordinate plane). Edge weights are the exact length of
the straight coordinate segment, integrated by Gauss-Legendre split at the
metric's breakpoints, so every grid path is a real curve and grid distances
bound the true distance from above.
"""

from __future__ import annotations

import heapq
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from itertools import product

import numpy as np
from numba import njit

from .warped import WarpedSphereMetric

__all__ = ["GeodesicGrid", "primitive_offsets", "axis_counts"]

BASE_RESOLUTION = 32
EDGE_GAUSS_ORDER = 8


def primitive_offsets(radius: int = 2) -> np.ndarray:
    offs = [
        v
        for v in product(range(-radius, radius + 1), repeat=3)
        if any(v) and math.gcd(math.gcd(abs(v[0]), abs(v[1])), abs(v[2])) == 1
    ]
    return np.array(sorted(offs), dtype=np.int64)


def axis_counts(metric: WarpedSphereMetric, resolution: int) -> tuple[int, int, int]:
    """Interval counts along (r, theta, psi) with balanced physical spacing.

    Counts at the base resolution 32 are scaled by resolution/32, so doubling
    the resolution nests the grids exactly.
    """
    if resolution < BASE_RESOLUTION:
        raise ValueError(f"resolution must be >= {BASE_RESOLUTION}")
    probe = np.linspace(0.0, metric.R, 513)
    lengths = np.array(
        [metric.R, math.pi * float(np.max(metric.a(probe))), math.pi * float(np.max(metric.b(probe)))]
    )
    base = np.maximum(1, np.ceil(BASE_RESOLUTION * lengths / lengths.max() - 1e-9)).astype(int)
    scale = resolution / BASE_RESOLUTION
    return tuple(int(max(2, round(c * scale))) for c in base)


@njit(cache=True, nogil=True)
def _dijkstra(shape, offsets, lengths, source, target):
    nr, nt, npsi = shape
    total = nr * nt * npsi
    dist = np.full(total, np.inf)
    done = np.zeros(total, dtype=np.bool_)
    dist[source] = 0.0
    heap = [(0.0, source)]
    n_off = offsets.shape[0]
    while len(heap) > 0:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if u == target:
            break
        i = u // (nt * npsi)
        rem = u - i * nt * npsi
        j = rem // npsi
        l = rem - j * npsi
        for o in range(n_off):
            ii = i + offsets[o, 0]
            jj = j + offsets[o, 1]
            ll = l + offsets[o, 2]
            if ii < 0 or ii >= nr or jj < 0 or jj >= nt or ll < 0 or ll >= npsi:
                continue
            v = (ii * nt + jj) * npsi + ll
            if done[v]:
                continue
            nd = d + lengths[i, o]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


@dataclass
class GeodesicGrid:
    metric: WarpedSphereMetric
    resolution: int = 128
    stencil: int = 3

    def __post_init__(self):
        self.nr, self.nt, self.np = axis_counts(self.metric, self.resolution)
        self.r = np.linspace(0.0, self.metric.R, self.nr + 1)
        self.r[-1] = self.metric.R
        self.hr = self.metric.R / self.nr
        self.ht = math.pi / self.nt
        self.hp = math.pi / self.np
        self.offsets = primitive_offsets(self.stencil)
        self._cache: dict[int, np.ndarray] = {}

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.nr + 1, self.nt + 1, self.np + 1)

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        """(nr+1, n_offsets) lengths of straight coordinate segments."""
        x0, w0 = np.polynomial.legendre.leggauss(EDGE_GAUSS_ORDER)
        bps = np.asarray(self.metric.interior_breakpoints)
        out = np.full((self.nr + 1, len(self.offsets)), np.inf)
        for o, (di, dj, dl) in enumerate(self.offsets):
            dt2 = (dj * self.ht) ** 2
            dp2 = (dl * self.hp) ** 2
            span = abs(di) * self.hr
            for i in range(self.nr + 1):
                i2 = i + di
                if i2 < 0 or i2 > self.nr:
                    continue
                lo, hi = sorted((self.r[i], self.r[i2]))
                if di == 0:
                    a, b = self.metric.a(lo), self.metric.b(lo)
                    out[i, o] = math.sqrt(a * a * dt2 + b * b * dp2)
                    continue
                cuts = [lo] + [x for x in bps if lo < x < hi] + [hi]
                total = 0.0
                for s0, s1 in zip(cuts, cuts[1:]):
                    half = 0.5 * (s1 - s0)
                    rr = 0.5 * (s0 + s1) + half * x0
                    # unit parameter speed along the segment has dr = span
                    frac = half / span
                    a = self.metric.a(rr)
                    b = self.metric.b(rr)
                    total += frac * float(np.sum(w0 * np.sqrt(span**2 + a * a * dt2 + b * b * dp2)))
                out[i, o] = total
        return out

    # indices ----------------------------------------------------------

    def r_index(self, r: float) -> int:
        if not -1e-12 <= r <= self.metric.R + 1e-12:
            raise ValueError(f"r={r!r} outside [0, {self.metric.R!r}]")
        return int(round(r / self.hr))

    def angle_index(self, angle: float, step: float) -> int:
        if not -1e-12 <= angle <= math.pi + 1e-12:
            raise ValueError(f"angle {angle!r} outside [0, pi]")
        return int(round(angle / step))

    def node(self, i: int, j: int, l: int) -> int:
        return (i * (self.nt + 1) + j) * (self.np + 1) + l

    # distances --------------------------------------------------------

    def prefetch(self, sources, workers: int | None = None) -> None:
        """Compute the fields for several source radii on a thread pool."""
        todo = sorted({int(i) for i in sources} - set(self._cache))
        if not todo:
            return
        self.edge_lengths
        workers = workers or min(len(todo), os.cpu_count() or 1)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for i, fld in zip(todo, pool.map(self._solve_field, todo)):
                self._cache[i] = fld

    def _solve_field(self, i_source: int) -> np.ndarray:
        dist = _dijkstra(self.shape, self.offsets, self.edge_lengths, self.node(i_source, 0, 0), -1)
        return dist.reshape(self.shape)

    def field_from(self, i_source: int) -> np.ndarray:
        """Distances from (r_i, 0, 0) to every node, shape (nr+1, nt+1, np+1)."""
        if i_source not in self._cache:
            self._cache[i_source] = self._solve_field(i_source)
        return self._cache[i_source]

    def distance_indices(self, i1: int, i2: int, dj: int, dl: int) -> float:
        return float(self.field_from(i1)[i2, dj, dl])

    def distance(self, r1: float, r2: float, dtheta: float, dpsi: float) -> float:
        """Grid distance between (r1, 0, 0) and (r2, dtheta, dpsi), snapped to nodes."""
        i1, i2 = sorted((self.r_index(r1), self.r_index(r2)))  # fixed order: exact symmetry
        dj = self.angle_index(dtheta, self.ht)
        dl = self.angle_index(dpsi, self.hp)
        if i1 in self._cache:
            return float(self._cache[i1][i2, dj, dl])
        # single query: stop as soon as the target is settled
        dist = _dijkstra(
            self.shape, self.offsets, self.edge_lengths, self.node(i1, 0, 0), self.node(i2, dj, dl)
        )
        return float(dist[self.node(i2, dj, dl)])
