"""Piecewise closed-form radial profiles.

A profile is a list of segments on consecutive radial intervals. Each segment
is drawn from a small catalog of trigonometric shapes so that value, first
and second derivative are exact and the profile can be written to and read
back from plain text without loss (17 significant digits).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "Segment",
    "ScaledSine",
    "ScaledCosine",
    "AffineCosineBlend",
    "PiecewiseSmoothFunction",
    "SEGMENT_CATALOG",
]

BREAKPOINT_RTOL = 1e-14


class Segment:
    """Base class for catalog segments; subclasses are frozen dataclasses."""

    expr_id: str = ""

    def params(self) -> tuple[float, ...]:
        raise NotImplementedError

    def eval(self, r, order: int = 0):
        raise NotImplementedError

    def slope_defect(self, r):
        """1 - f'(r)^2 without cancellation where |f'| is close to 1."""
        return 1.0 - self.eval(r, 1) ** 2


@dataclass(frozen=True)
class ScaledSine(Segment):
    """amplitude * sin(freq * r + phase)"""

    amplitude: float
    freq: float = 1.0
    phase: float = 0.0
    expr_id = "scaled-sine"

    def params(self):
        return (self.amplitude, self.freq, self.phase)

    def eval(self, r, order=0):
        x = self.freq * np.asarray(r, dtype=float) + self.phase
        if order == 0:
            return self.amplitude * np.sin(x)
        if order == 1:
            return self.amplitude * self.freq * np.cos(x)
        return -self.amplitude * self.freq**2 * np.sin(x)

    def slope_defect(self, r):
        s2 = (self.amplitude * self.freq) ** 2
        x = self.freq * np.asarray(r, dtype=float) + self.phase
        return (1.0 - s2) + s2 * np.sin(x) ** 2


@dataclass(frozen=True)
class ScaledCosine(Segment):
    """amplitude * cos(freq * r + phase) + offset"""

    amplitude: float
    freq: float = 1.0
    phase: float = 0.0
    offset: float = 0.0
    expr_id = "scaled-cosine-shifted"

    def params(self):
        return (self.amplitude, self.freq, self.phase, self.offset)

    def eval(self, r, order=0):
        x = self.freq * np.asarray(r, dtype=float) + self.phase
        if order == 0:
            return self.amplitude * np.cos(x) + self.offset
        if order == 1:
            return -self.amplitude * self.freq * np.sin(x)
        return -self.amplitude * self.freq**2 * np.cos(x)

    def slope_defect(self, r):
        s2 = (self.amplitude * self.freq) ** 2
        x = self.freq * np.asarray(r, dtype=float) + self.phase
        return (1.0 - s2) + s2 * np.cos(x) ** 2


@dataclass(frozen=True)
class AffineCosineBlend(Segment):
    """weight * cos(freq * r) + (1 - weight) * cos(angle)

    This is the inner branch of the collapsing sphere factor: with
    weight = eps/(eps+theta), freq = 1/weight and angle = eps+theta it meets
    cos(r + theta) to first order at r = eps.
    """

    weight: float
    freq: float
    angle: float
    expr_id = "affine-cosine-blend"

    def params(self):
        return (self.weight, self.freq, self.angle)

    def eval(self, r, order=0):
        x = self.freq * np.asarray(r, dtype=float)
        if order == 0:
            return self.weight * np.cos(x) + (1.0 - self.weight) * np.cos(self.angle)
        if order == 1:
            return -self.weight * self.freq * np.sin(x)
        return -self.weight * self.freq**2 * np.cos(x)

    def slope_defect(self, r):
        s2 = (self.weight * self.freq) ** 2
        x = self.freq * np.asarray(r, dtype=float)
        return (1.0 - s2) + s2 * np.cos(x) ** 2


SEGMENT_CATALOG: dict[str, type[Segment]] = {
    cls.expr_id: cls for cls in (ScaledSine, ScaledCosine, AffineCosineBlend)
}


@dataclass(frozen=True)
class PiecewiseSmoothFunction:
    """Closed-form segments on ``[breakpoints[i], breakpoints[i+1]]``."""

    breakpoints: tuple[float, ...]
    segments: tuple[Segment, ...]

    def __post_init__(self):
        bp = tuple(float(x) for x in self.breakpoints)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "segments", tuple(self.segments))
        if len(bp) < 2 or len(self.segments) != len(bp) - 1:
            raise ValueError("need len(segments) == len(breakpoints) - 1 >= 1")
        if bp[0] != 0.0:
            raise ValueError("first breakpoint must be 0")
        if any(b <= a for a, b in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be strictly increasing")

    @property
    def R(self) -> float:
        return self.breakpoints[-1]

    @property
    def interior_breakpoints(self) -> tuple[float, ...]:
        return self.breakpoints[1:-1]

    def segment_index(self, r):
        """Index of the active segment; a breakpoint belongs to the right segment."""
        r = np.asarray(r, dtype=float)
        idx = np.searchsorted(self.breakpoints, r, side="right") - 1
        return np.clip(idx, 0, len(self.segments) - 1)

    def _dispatch(self, r, func):
        arr = np.asarray(r, dtype=float)
        slack = BREAKPOINT_RTOL * max(1.0, self.R)
        if np.any(arr < -slack) or np.any(arr > self.R + slack) or np.any(np.isnan(arr)):
            raise ValueError(f"radius outside [0, {self.R!r}]")
        if arr.ndim == 0:
            return float(func(self.segments[int(self.segment_index(arr))], arr))
        idx = self.segment_index(arr)
        out = np.empty_like(arr)
        for i, seg in enumerate(self.segments):
            mask = idx == i
            if mask.any():
                out[mask] = func(seg, arr[mask])
        return out

    def eval(self, r, order: int = 0):
        if order not in (0, 1, 2):
            raise ValueError(f"order must be 0, 1 or 2, got {order!r}")
        return self._dispatch(r, lambda seg, x: seg.eval(x, order))

    __call__ = eval

    def slope_defect(self, r):
        """1 - f'(r)^2, evaluated per segment in a cancellation-free form."""
        return self._dispatch(r, lambda seg, x: seg.slope_defect(x))

    def one_sided(self, r: float, order: int, side: str) -> float:
        """Evaluate the segment to the left ('-') or right ('+') of ``r``."""
        i = int(self.segment_index(r))
        if side == "-" and i > 0 and r == self.breakpoints[i]:
            i -= 1
        return float(self.segments[i].eval(r, order))

    def seam_residuals(self) -> list[tuple[float, float, float]]:
        """(breakpoint, |jump in value|, |jump in derivative|) at interior breakpoints."""
        out = []
        for i, x in enumerate(self.interior_breakpoints, start=1):
            left, right = self.segments[i - 1], self.segments[i]
            out.append(
                (
                    x,
                    abs(float(left.eval(x, 0)) - float(right.eval(x, 0))),
                    abs(float(left.eval(x, 1)) - float(right.eval(x, 1))),
                )
            )
        return out

    def scaled(self, factor: float) -> "PiecewiseSmoothFunction":
        segs = []
        for s in self.segments:
            if isinstance(s, ScaledSine):
                segs.append(ScaledSine(factor * s.amplitude, s.freq, s.phase))
            elif isinstance(s, ScaledCosine):
                segs.append(ScaledCosine(factor * s.amplitude, s.freq, s.phase, factor * s.offset))
            else:
                raise TypeError(f"cannot scale segment {s.expr_id}")
        return PiecewiseSmoothFunction(self.breakpoints, tuple(segs))

    # text format -------------------------------------------------------

    def to_lines(self, name: str) -> list[str]:
        lines = []
        for lo, hi, seg in zip(self.breakpoints, self.breakpoints[1:], self.segments):
            fields = [name, f"{lo:.17g}", f"{hi:.17g}", seg.expr_id]
            fields += [f"{p:.17g}" for p in seg.params()]
            lines.append(" ".join(fields))
        return lines

    @classmethod
    def from_lines(cls, lines: Sequence[str]) -> "PiecewiseSmoothFunction":
        breakpoints: list[float] = []
        segments: list[Segment] = []
        for line in lines:
            parts = line.split()
            lo, hi, expr_id = float(parts[1]), float(parts[2]), parts[3]
            try:
                seg_cls = SEGMENT_CATALOG[expr_id]
            except KeyError:
                raise ValueError(f"unknown segment expression {expr_id!r}") from None
            if not breakpoints:
                breakpoints.append(lo)
            elif lo != breakpoints[-1]:
                raise ValueError(f"segments not contiguous at {lo!r}")
            breakpoints.append(hi)
            segments.append(seg_cls(*(float(p) for p in parts[4:])))
        return cls(tuple(breakpoints), tuple(segments))
