"""Doubly warped metrics dr^2 + a(r)^2 g_S1 + b(r)^2 g_S^{n-2} on the n-sphere.

The circle factor collapses at r = 0 (a(0) = 0) and the (n-2)-sphere factor
collapses at r = R (b(R) = 0). Two families are built here: the round sphere
(a = sin r, b = cos r, R = pi/2) and the collapsing family indexed by k whose
circle factor shrinks to size ~1/sqrt(k) while Ric stays >= n - 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import mpmath
import numpy as np

from .profiles import (
    AffineCosineBlend,
    PiecewiseSmoothFunction,
    ScaledCosine,
    ScaledSine,
)

__all__ = [
    "WarpedSphereMetric",
    "PinchConstants",
    "ClosureCheck",
    "ClosureReport",
    "pinch_constants",
    "make_round_sphere",
    "make_pinch_family",
    "validate_closure",
    "volume",
    "radial_integral",
    "gauss_panels",
    "sphere_volume",
    "dump_metric",
    "load_metric",
]

CLOSURE_TOL = 1e-10
SEAM_TOL = 1e-12


def sphere_volume(d: int) -> float:
    """Volume of the unit d-sphere."""
    return 2.0 * math.pi ** ((d + 1) / 2) / math.gamma((d + 1) / 2)


@dataclass(frozen=True)
class WarpedSphereMetric:
    n: int
    a: PiecewiseSmoothFunction
    b: PiecewiseSmoothFunction
    label: str = ""
    constants: "PinchConstants | None" = None

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"unsupported dimension n={self.n}; need n >= 3")
        if self.a.R != self.b.R:
            raise ValueError("warping functions must share the radial interval")

    @property
    def R(self) -> float:
        return self.a.R

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(sorted(set(self.a.breakpoints) | set(self.b.breakpoints)))

    @property
    def interior_breakpoints(self) -> tuple[float, ...]:
        return self.breakpoints[1:-1]

    @property
    def is_pinch(self) -> bool:
        return self.constants is not None

    def fiber_volume(self) -> float:
        """Vol(S^1) * Vol(S^{n-2})."""
        return sphere_volume(1) * sphere_volume(self.n - 2)

    def weight(self, r):
        """Radial density a * b^(n-2) of the volume form."""
        return self.a(r) * self.b(r) ** (self.n - 2)

    def with_profiles(self, a=None, b=None, label=None) -> "WarpedSphereMetric":
        return replace(
            self,
            a=a if a is not None else self.a,
            b=b if b is not None else self.b,
            label=label if label is not None else self.label,
            constants=None,
        )


@dataclass(frozen=True)
class PinchConstants:
    k: int
    eta: float
    eps: float
    theta: float
    R: float

    def eta_identity_residual(self) -> float:
        s = 1.0 / math.sqrt(self.k)
        return abs(self.eta**2 - (math.sin(s) ** 2 + math.cos(s) ** 2 / self.k**2))

    def angle_identity_residual(self) -> float:
        target = math.atan(1.0 / (self.k * math.tan(1.0 / math.sqrt(self.k))))
        return abs(self.eps + self.theta - target)


@lru_cache(maxsize=None)
def pinch_constants(k: int) -> PinchConstants:
    """eta_k, eps_k, theta_k evaluated at 50 digits, then rounded."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    with mpmath.workdps(50):
        kk = mpmath.mpf(k)
        s = 1 / mpmath.sqrt(kk)
        eta = mpmath.sqrt(mpmath.sin(s) ** 2 + mpmath.cos(s) ** 2 / kk**2)
        eps = (mpmath.pi / 2 - s) / kk
        theta = mpmath.atan(1 / (kk * mpmath.tan(s))) - mpmath.pi / (2 * kk) + s / kk
        R = mpmath.pi / 2 - theta
        return PinchConstants(int(k), float(eta), float(eps), float(theta), float(R))


def make_round_sphere(n: int) -> WarpedSphereMetric:
    if n < 3:
        raise ValueError(f"unsupported dimension n={n}; need n >= 3")
    R = math.pi / 2
    a = PiecewiseSmoothFunction((0.0, R), (ScaledSine(1.0),))
    b = PiecewiseSmoothFunction((0.0, R), (ScaledCosine(1.0),))
    return WarpedSphereMetric(n, a, b, label=f"round n={n}")


def make_pinch_family(n: int, k: int) -> tuple[WarpedSphereMetric, PinchConstants]:
    if n < 3:
        raise ValueError(f"unsupported dimension n={n}; need n >= 3")
    c = pinch_constants(k)
    bp = (0.0, c.eps, c.R)
    a = PiecewiseSmoothFunction(
        bp, (ScaledSine(1.0 / k, float(k)), ScaledSine(c.eta, 1.0, c.theta))
    )
    with mpmath.workdps(50):
        total = mpmath.mpf(c.eps) + mpmath.mpf(c.theta)
        weight = float(mpmath.mpf(c.eps) / total)
        freq = float(total / mpmath.mpf(c.eps))
    b = PiecewiseSmoothFunction(
        bp,
        (AffineCosineBlend(weight, freq, c.eps + c.theta), ScaledCosine(1.0, 1.0, c.theta)),
    )
    return WarpedSphereMetric(n, a, b, label=f"pinch n={n} k={k}", constants=c), c


# closure ---------------------------------------------------------------


@dataclass(frozen=True)
class ClosureCheck:
    name: str
    expected: str
    actual: float
    residual: float

    @property
    def ok(self) -> bool:
        return self.residual < CLOSURE_TOL


@dataclass(frozen=True)
class ClosureReport:
    checks: tuple[ClosureCheck, ...]
    seams: tuple[tuple[float, float, float], ...]

    @property
    def ok(self) -> bool:
        seams_ok = all(dv < SEAM_TOL and dd < SEAM_TOL for _, dv, dd in self.seams)
        return seams_ok and all(c.ok for c in self.checks)

    def failures(self) -> list[str]:
        bad = [c.name for c in self.checks if not c.ok]
        bad += [f"C1 seam at r={x:.6g}" for x, dv, dd in self.seams if max(dv, dd) >= SEAM_TOL]
        return bad


def validate_closure(metric: WarpedSphereMetric) -> ClosureReport:
    """The eight endpoint conditions for smooth closure plus the C1 seams."""
    a, b, R = metric.a, metric.b, metric.R

    def eq(name, value, target):
        return ClosureCheck(name, repr(float(target)), value, abs(value - target))

    def pos(name, value):
        return ClosureCheck(name, "> 0", value, 0.0 if value > CLOSURE_TOL else abs(value) + CLOSURE_TOL)

    checks = (
        eq("a(0)", a(0.0), 0.0),
        eq("a'(0)", a(0.0, 1), 1.0),
        pos("b(0)", b(0.0)),
        eq("b'(0)", b(0.0, 1), 0.0),
        eq("b(R)", b(R), 0.0),
        eq("b'(R)", b(R, 1), -1.0),
        pos("a(R)", a(R)),
        eq("a'(R)", a(R, 1), 0.0),
    )
    seams = tuple(a.seam_residuals()) + tuple(b.seam_residuals())
    return ClosureReport(checks, seams)


# quadrature ------------------------------------------------------------

GAUSS_ORDER = 8


def gauss_panels(breakpoints, quad_points: int, order: int = GAUSS_ORDER):
    """Composite Gauss-Legendre nodes/weights split at every breakpoint.

    Roughly ``quad_points`` nodes in total, distributed by segment length.
    """
    if quad_points < 16:
        raise ValueError("quad_points must be >= 16")
    bp = np.asarray(breakpoints, dtype=float)
    lengths = np.diff(bp)
    panels_total = max(len(lengths), quad_points // order)
    counts = np.maximum(1, np.round(panels_total * lengths / lengths.sum()).astype(int))
    x0, w0 = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for lo, hi, m in zip(bp[:-1], bp[1:], counts):
        edges = np.linspace(lo, hi, m + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        nodes.append((mid[:, None] + half[:, None] * x0[None, :]).ravel())
        weights.append((half[:, None] * w0[None, :]).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def radial_integral(metric: WarpedSphereMetric, integrand, quad_points: int = 2048) -> float:
    """Integral over [0, R] of integrand(r) * a * b^(n-2) dr."""
    r, w = gauss_panels(metric.breakpoints, quad_points)
    return float(np.sum(w * integrand(r) * metric.weight(r)))


def volume(metric: WarpedSphereMetric, quad_points: int = 2048) -> float:
    return metric.fiber_volume() * radial_integral(metric, np.ones_like, quad_points)


# text format -----------------------------------------------------------


def dump_metric(metric: WarpedSphereMetric) -> str:
    lines = [f"warped n={metric.n} R={metric.R:.17g}"]
    lines += metric.a.to_lines("a")
    lines += metric.b.to_lines("b")
    return "\n".join(lines) + "\n"


def load_metric(text: str, label: str = "") -> WarpedSphereMetric:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or not lines[0].startswith("warped "):
        raise ValueError("missing 'warped n=<n> R=<R>' header")
    header = dict(tok.split("=", 1) for tok in lines[0].split()[1:])
    n, R = int(header["n"]), float(header["R"])
    a = PiecewiseSmoothFunction.from_lines([ln for ln in lines[1:] if ln.split()[0] == "a"])
    b = PiecewiseSmoothFunction.from_lines([ln for ln in lines[1:] if ln.split()[0] == "b"])
    if a.R != R or b.R != R:
        raise ValueError("segment ranges disagree with header R")
    return WarpedSphereMetric(n, a, b, label=label)
