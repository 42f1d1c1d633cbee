"""Laplace spectrum of warped sphere metrics by separation of variables.

An eigenfunction f = phi(r) * Theta_m * Y_l (Theta_m a circle harmonic of
frequency m, Y_l a degree-l harmonic on S^{n-2}) solves Delta f = lambda f
iff

    -(w phi')'/w + V phi = lambda phi,   w = a b^(n-2),
    V = m^2/a^2 + l(l+n-3)/b^2.

The radial problem is discretized on a staggered grid r_i = (i + 1/2) h with
flux weights on the faces. Since w vanishes at both ends the boundary faces
carry zero flux, which selects the correct closure behaviour for every mode
without case analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .curvature import ricci_arrays
from .sturm import bisect_eigenvalues, inverse_iteration, sturm_count
from .warped import WarpedSphereMetric, gauss_panels

__all__ = [
    "RadialMode",
    "RadialProblem",
    "Eigenpair",
    "SpectrumEntry",
    "SpectrumResult",
    "ProfileTest",
    "BochnerDefect",
    "ModeCutoffError",
    "harmonic_dimension",
    "mode_multiplicity",
    "radial_problem",
    "solve_radial",
    "merged_spectrum",
    "rayleigh_quotient",
    "lowest_eigenpairs",
    "bochner_defect",
    "round_sphere_spectrum",
]

MAX_MODES = 100_000


class ModeCutoffError(RuntimeError):
    pass


@dataclass(frozen=True, order=True)
class RadialMode:
    m: int
    l: int

    def __post_init__(self):
        if self.m < 0 or self.l < 0:
            raise ValueError("mode indices must be >= 0")

    def sphere_eigenvalue(self, n: int) -> int:
        return self.l * (self.l + n - 3)


def harmonic_dimension(d: int, l: int) -> int:
    """Dimension of degree-l spherical harmonics on S^d."""
    if l == 0:
        return 1
    if d == 1:
        return 2
    if l == 1:
        return d + 1
    return math.comb(l + d, d) - math.comb(l + d - 2, d)


def mode_multiplicity(n: int, mode: RadialMode) -> int:
    if n < 3:
        raise ValueError(f"unsupported dimension n={n}")
    return (1 if mode.m == 0 else 2) * harmonic_dimension(n - 2, mode.l)


@dataclass(frozen=True)
class RadialProblem:
    metric: WarpedSphereMetric
    mode: RadialMode
    N: int
    h: float
    r: np.ndarray  # cell centres
    w: np.ndarray  # a b^(n-2) at centres
    w_face: np.ndarray  # at faces r = j h, j = 0..N
    V: np.ndarray

    def tridiagonal(self) -> tuple[np.ndarray, np.ndarray]:
        """Diagonal and off-diagonal of the symmetrized operator.

        Symmetrized with phi~_i = sqrt(w_i h) phi_i.
        """
        h2 = self.h * self.h
        d = (self.w_face[1:] + self.w_face[:-1]) / (self.w * h2) + self.V
        e = -self.w_face[1:-1] / (h2 * np.sqrt(self.w[1:] * self.w[:-1]))
        return d, e


def radial_problem(metric: WarpedSphereMetric, mode: RadialMode, N: int) -> RadialProblem:
    if N < 64:
        raise ValueError("N must be >= 64")
    h = metric.R / N
    r = (np.arange(N) + 0.5) * h
    faces = np.arange(N + 1) * h
    faces[-1] = metric.R
    n = metric.n
    a, b = metric.a(r), metric.b(r)
    w = a * b ** (n - 2)
    w_face = metric.a(faces) * metric.b(faces) ** (n - 2)
    w_face[0] = w_face[-1] = 0.0
    V = np.zeros(N)
    if mode.m:
        V += mode.m**2 / a**2
    L = mode.sphere_eigenvalue(n)
    if L:
        V += L / b**2
    return RadialProblem(metric, mode, N, h, r, w, w_face, V)


@dataclass(frozen=True)
class Eigenpair:
    mode: RadialMode
    lam: float
    phi: np.ndarray = field(repr=False)
    problem: RadialProblem = field(repr=False)
    index: int = 0  # radial index within the mode

    @property
    def r(self) -> np.ndarray:
        return self.problem.r

    def norm2(self) -> float:
        """Weighted sum of w h phi^2 (radial L2 norm squared)."""
        p = self.problem
        return float(np.sum(p.w * p.h * self.phi**2))

    def dirichlet(self) -> float:
        """Discrete radial energy: sum w_face (dphi)^2/h + sum V w h phi^2."""
        p = self.problem
        dphi = np.diff(self.phi)
        return float(np.sum(p.w_face[1:-1] * dphi**2) / p.h + np.sum(p.V * p.w * p.h * self.phi**2))

    def rayleigh(self) -> float:
        return self.dirichlet() / self.norm2()


def solve_radial(problem: RadialProblem, count: int, tol: float = 1e-10) -> list[Eigenpair]:
    """The ``count`` smallest radial eigenpairs of one mode."""
    if count > problem.N // 4:
        raise ValueError(f"count={count} exceeds N/4={problem.N // 4}")
    d, e = problem.tridiagonal()
    vals = bisect_eigenvalues(d, e, count, tol)
    target = 1.0 / problem.metric.fiber_volume()
    scale = np.sqrt(problem.w * problem.h)
    out = []
    for j, lam in enumerate(vals):
        vec = inverse_iteration(d, e, lam)
        phi = vec / scale
        phi *= math.sqrt(target / np.sum(problem.w * problem.h * phi**2))
        out.append(Eigenpair(problem.mode, float(lam), phi, problem, j))
    return out


def count_below(problem: RadialProblem, lam: float) -> int:
    d, e = problem.tridiagonal()
    return sturm_count(d, e, lam)


# merged spectrum -------------------------------------------------------


@dataclass(frozen=True)
class SpectrumEntry:
    lam: float  # reported value (extrapolated when enabled)
    multiplicity: int
    mode: RadialMode
    index: int
    raw: float  # value at N
    fine: float | None  # value at 2N when extrapolating
    N: int

    @property
    def extrapolated(self) -> bool:
        return self.fine is not None


@dataclass(frozen=True)
class SpectrumResult:
    metric_label: str
    n: int
    lmax: float
    N: int
    entries: tuple[SpectrumEntry, ...]

    def values(self) -> np.ndarray:
        """Eigenvalues repeated by multiplicity, nondecreasing."""
        return np.repeat([e.lam for e in self.entries], [e.multiplicity for e in self.entries])

    def clusters(self, rtol: float = 1e-3, atol: float = 1e-6) -> list[tuple[float, int, list[SpectrumEntry]]]:
        """Group numerically equal eigenvalues from different modes."""
        groups: list[list[SpectrumEntry]] = []
        for ent in self.entries:
            if groups and abs(ent.lam - groups[-1][0].lam) <= atol + rtol * abs(groups[-1][0].lam):
                groups[-1].append(ent)
            else:
                groups.append([ent])
        return [
            (float(np.mean([e.lam for e in g])), sum(e.multiplicity for e in g), g) for g in groups
        ]


def enumerate_modes(metric: WarpedSphereMetric, lmax: float, N: int) -> list[RadialMode]:
    """Every mode whose potential minimum on the grid is <= lmax.

    The kinetic term is nonnegative, so min V bounds the mode's lowest
    eigenvalue from below and no mode outside this list can contribute.
    """
    h = metric.R / N
    r = (np.arange(N) + 0.5) * h
    inv_a2 = 1.0 / metric.a(r) ** 2
    inv_b2 = 1.0 / metric.b(r) ** 2
    min_inv_a2, min_inv_b2 = float(inv_a2.min()), float(inv_b2.min())
    n = metric.n
    modes = []
    m = 0
    while m * m * min_inv_a2 <= lmax:
        l = 0
        while m * m * min_inv_a2 + l * (l + n - 3) * min_inv_b2 <= lmax:
            V = m * m * inv_a2 + l * (l + n - 3) * inv_b2
            if V.min() <= lmax:
                modes.append(RadialMode(m, l))
                if len(modes) > MAX_MODES:
                    raise ModeCutoffError(
                        f"more than {MAX_MODES} angular modes below lmax={lmax:g}; use a smaller lmax"
                    )
            l += 1
        m += 1
    return modes


def merged_spectrum(
    metric: WarpedSphereMetric, lmax: float, N: int = 2000, richardson: bool = True, tol: float = 1e-10
) -> SpectrumResult:
    """All eigenvalues <= lmax with multiplicities, merged over angular modes.

    With ``richardson`` each mode is also solved at 2N and the reported value
    is (4 lam(2N) - lam(N)) / 3.
    """
    if lmax <= 0:
        raise ValueError("lmax must be > 0")
    entries = []
    for mode in enumerate_modes(metric, lmax, N):
        coarse = radial_problem(metric, mode, N)
        count = count_below(coarse, lmax * (1 + 1e-9) + 1e-9)
        fine = radial_problem(metric, mode, 2 * N) if richardson else None
        if fine is not None:
            count = max(count, count_below(fine, lmax * (1 + 1e-9) + 1e-9))
        if count == 0:
            continue
        count = min(count, N // 4)
        d, e = coarse.tridiagonal()
        raw = bisect_eigenvalues(d, e, count, tol)
        if fine is not None:
            df, ef = fine.tridiagonal()
            raw_fine = bisect_eigenvalues(df, ef, count, tol)
            reported = (4.0 * raw_fine - raw) / 3.0
        else:
            raw_fine = [None] * count
            reported = raw
        mult = mode_multiplicity(metric.n, mode)
        for j in range(count):
            if reported[j] <= lmax:
                entries.append(
                    SpectrumEntry(
                        float(reported[j]),
                        mult,
                        mode,
                        j,
                        float(raw[j]),
                        None if raw_fine[j] is None else float(raw_fine[j]),
                        N,
                    )
                )
    entries.sort(key=lambda e: (e.lam, e.mode, e.index))
    return SpectrumResult(metric.label, metric.n, float(lmax), N, tuple(entries))


def lowest_eigenpairs(
    metric: WarpedSphereMetric, count: int, N: int = 2000, by_multiplicity: bool = True, lmax: float | None = None
) -> list[Eigenpair]:
    """Nonconstant radial eigenpairs in increasing order.

    Returns the shortest prefix covering ``count`` eigenfunctions (each pair
    counting with its angular multiplicity) or, with ``by_multiplicity``
    false, exactly ``count`` pairs. The search cutoff starts at 2n and
    doubles until enough eigenvalues lie below it.
    """
    lmax = lmax or 2.0 * metric.n
    while True:
        pairs = []
        for mode in enumerate_modes(metric, lmax, N):
            prob = radial_problem(metric, mode, N)
            c = min(count_below(prob, lmax), N // 4)
            pairs += [p for p in solve_radial(prob, c) if not (mode == RadialMode(0, 0) and p.index == 0)]
        pairs.sort(key=lambda p: (p.lam, p.mode, p.index))
        out, covered = [], 0
        for p in pairs:
            if covered >= count:
                break
            out.append(p)
            covered += mode_multiplicity(metric.n, p.mode) if by_multiplicity else 1
        if covered >= count:
            return out
        lmax *= 2.0


def round_sphere_spectrum(n: int, jmax: int) -> list[tuple[int, int]]:
    """Closed-form (eigenvalue, multiplicity) of the round n-sphere, degree <= jmax."""
    return [(j * (j + n - 1), harmonic_dimension(n, j)) for j in range(jmax + 1)]


# Rayleigh quotients ----------------------------------------------------


@dataclass(frozen=True)
class ProfileTest:
    """Test function phi(r) times an angular harmonic of the given mode."""

    mode: RadialMode
    phi: Callable[[np.ndarray], np.ndarray]
    dphi: Callable[[np.ndarray], np.ndarray]


class DegenerateTestFunction(ValueError):
    pass


def _profile_rayleigh(metric: WarpedSphereMetric, test: ProfileTest, quad_points: int) -> float:
    r, qw = gauss_panels(metric.breakpoints, quad_points)
    w = metric.weight(r) * qw
    phi, dphi = test.phi(r), test.dphi(r)
    V = np.zeros_like(r)
    if test.mode.m:
        V += test.mode.m**2 / metric.a(r) ** 2
    L = test.mode.sphere_eigenvalue(metric.n)
    if L:
        V += L / metric.b(r) ** 2
    num = np.sum((dphi**2 + V * phi**2) * w)
    if test.mode == RadialMode(0, 0):
        mean = np.sum(phi * w) / np.sum(w)
        den = np.sum((phi - mean) ** 2 * w)
    else:
        den = np.sum(phi**2 * w)
    if den <= 1e-300:
        raise DegenerateTestFunction("test function has zero variance")
    return float(num / den)


def rayleigh_quotient(metric: WarpedSphereMetric, test, quad_points: int = 4096) -> float:
    """Integral of |df|^2 over the integral of (f - mean f)^2.

    ``test`` is a ProfileTest, an Eigenpair (discrete quotient on its own
    grid) or any object with a ``rayleigh(metric)`` method such as
    :class:`spherepinch.geometry.DistanceCosineTest`.
    """
    if isinstance(test, Eigenpair):
        if test.mode == RadialMode(0, 0):
            p = test.problem
            mean = np.sum(p.w * test.phi) / np.sum(p.w)
            den = float(np.sum(p.w * p.h * (test.phi - mean) ** 2))
            if den <= 1e-300:
                raise DegenerateTestFunction("constant eigenfunction")
            return test.dirichlet() / den
        return test.rayleigh()
    if isinstance(test, ProfileTest):
        return _profile_rayleigh(metric, test, quad_points)
    if hasattr(test, "rayleigh"):
        return float(test.rayleigh(metric))
    raise TypeError(f"unsupported test function {type(test).__name__}")


# Bochner defect --------------------------------------------------------


@dataclass(frozen=True)
class BochnerDefect:
    n: int
    lam: float
    defect: float  # lam^2 - 2 lam + n - Ric-term
    rhs: float  # (lam - n)(lam - 1) - excess-Ric-term
    ric_term: float  # int Ric(grad f, grad f) / ||f||^2
    excess_term: float  # int (Ric - (n-1))(grad f, grad f) / ||f||^2
    energy: float  # ||df||^2 / ||f||^2 by the same quadrature

    @property
    def bound(self) -> float:
        return (self.lam - self.n) * (self.lam - 1.0)

    @property
    def identity_residual(self) -> float:
        """|D - rhs| relative to max(|rhs|, 1); rhs vanishes at lam = n."""
        return abs(self.defect - self.rhs) / max(abs(self.rhs), 1.0)

    def within_bound(self, rtol: float = 1e-6, atol: float = 1e-6) -> bool:
        """-atol <= D <= bound (1 + rtol) + atol.

        The absolute slack absorbs discrete eigenvalues that land a hair
        below n, where the bound itself turns slightly negative.
        """
        return -atol <= self.defect <= self.bound * (1.0 + rtol) + atol


def bochner_defect(metric: WarpedSphereMetric, pair: Eigenpair) -> BochnerDefect:
    """Integrated Bochner defect of an eigenfunction, two ways.

    The Ricci terms use the discrete quadrature that defines the eigenpair:
    derivative terms on interior faces, potential terms at cell centres.
    """
    p = pair.problem
    n = metric.n
    lam = pair.lam
    phi = pair.phi
    faces = np.arange(1, p.N) * p.h
    dphi2 = (np.diff(phi) / p.h) ** 2
    face_mass = p.w_face[1:-1] * p.h * dphi2
    rr_face, _, _ = ricci_arrays(metric, faces)
    _, ru, rv = ricci_arrays(metric, p.r)

    ang_u = np.zeros(p.N)
    ang_v = np.zeros(p.N)
    if pair.mode.m:
        ang_u = pair.mode.m**2 / metric.a(p.r) ** 2 * phi**2
    L = pair.mode.sphere_eigenvalue(n)
    if L:
        ang_v = L / metric.b(p.r) ** 2 * phi**2
    cell = p.w * p.h

    norm2 = float(np.sum(cell * phi**2))
    ric = np.sum(rr_face * face_mass) + np.sum(cell * (ru * ang_u + rv * ang_v))
    excess = np.sum((rr_face - (n - 1)) * face_mass) + np.sum(
        cell * ((ru - (n - 1)) * ang_u + (rv - (n - 1)) * ang_v)
    )
    energy = (np.sum(face_mass) + np.sum(cell * (ang_u + ang_v))) / norm2
    defect = lam * lam - 2.0 * lam + n - ric / norm2
    rhs = (lam - n) * (lam - 1.0) - excess / norm2
    return BochnerDefect(
        n, float(lam), float(defect), float(rhs), float(ric / norm2), float(excess / norm2), float(energy)
    )
