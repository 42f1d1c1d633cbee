import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spherepinch.profiles import (
    SEGMENT_CATALOG,
    AffineCosineBlend,
    PiecewiseSmoothFunction,
    ScaledCosine,
    ScaledSine,
)
from spherepinch.warped import make_pinch_family, make_round_sphere


def test_segment_derivatives_match_finite_differences():
    segs = [ScaledSine(0.3, 2.0, 0.1), ScaledCosine(1.2, 0.7, -0.4, 0.05), AffineCosineBlend(0.2, 5.0, 0.3)]
    r, h = 0.37, 1e-5
    for seg in segs:
        d1 = (seg.eval(r + h) - seg.eval(r - h)) / (2 * h)
        d2 = (seg.eval(r + h) - 2 * seg.eval(r) + seg.eval(r - h)) / h**2
        assert seg.eval(r, 1) == pytest.approx(d1, rel=1e-8)
        assert seg.eval(r, 2) == pytest.approx(d2, rel=1e-4)


def test_round_profiles_at_quarter_turn():
    m = make_round_sphere(3)
    assert m.a(math.pi / 4) == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
    assert m.b(math.pi / 4) == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
    assert m.b(0.0) == 1.0 and m.a(0.0, 1) == 1.0


def test_pinch_inner_branch_value():
    m, _ = make_pinch_family(3, 100)
    assert m.a(0.005) == pytest.approx(math.sin(0.5) / 100, rel=1e-14)
    assert m.a(0.005) == pytest.approx(0.00479426, abs=1e-8)


def test_breakpoint_takes_right_segment():
    f = PiecewiseSmoothFunction((0.0, 1.0, 2.0), (ScaledSine(1.0), ScaledCosine(0.0, 1.0, 0.0, 7.0)))
    assert f(1.0) == 7.0
    assert f.one_sided(1.0, 0, "-") == pytest.approx(math.sin(1.0))
    assert f.one_sided(1.0, 0, "+") == 7.0


def test_pinch_seam_is_c1():
    m, c = make_pinch_family(3, 100)
    for f in (m.a, m.b):
        for order in (0, 1):
            left = f.one_sided(c.eps, order, "-")
            right = f.one_sided(c.eps, order, "+")
            assert abs(left - right) < 1e-12


@pytest.mark.parametrize("r", [-1e-3, 2.0, float("nan")])
def test_out_of_range_radius(r):
    m = make_round_sphere(3)
    with pytest.raises(ValueError):
        m.a(r)


def test_bad_order_and_breakpoints():
    with pytest.raises(ValueError):
        make_round_sphere(3).a(0.1, 3)
    with pytest.raises(ValueError):
        PiecewiseSmoothFunction((0.1, 1.0), (ScaledSine(1.0),))
    with pytest.raises(ValueError):
        PiecewiseSmoothFunction((0.0, 1.0, 1.0), (ScaledSine(1.0), ScaledSine(1.0)))


def test_text_round_trip_is_exact():
    m, _ = make_pinch_family(3, 1000)
    for f, name in ((m.a, "a"), (m.b, "b")):
        back = PiecewiseSmoothFunction.from_lines(f.to_lines(name))
        assert back == f
    assert set(SEGMENT_CATALOG) == {"scaled-sine", "scaled-cosine-shifted", "affine-cosine-blend"}


def test_slope_defect_near_collapse():
    m = make_round_sphere(4)
    r = np.array([math.pi / 2 - 1e-6, math.pi / 2 - 1e-3, 0.3])
    assert np.allclose(m.b.slope_defect(r), np.cos(r) ** 2, rtol=1e-12, atol=0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.1, 3.0), st.floats(-1.0, 1.0))
def test_vectorized_eval_matches_scalar(t, amp, phase):
    f = PiecewiseSmoothFunction((0.0, 0.4, 1.0), (ScaledSine(amp, 1.0, phase), ScaledCosine(amp, 2.0, phase, 0.1)))
    grid = np.array([t, 0.4, 0.0, 1.0])
    for order in (0, 1, 2):
        vec = f(grid, order)
        assert all(vec[i] == f(float(x), order) for i, x in enumerate(grid))
