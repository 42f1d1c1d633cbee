import math

import numpy as np
import pytest

from spherepinch.geodesic import GeodesicGrid, axis_counts, primitive_offsets
from spherepinch.geometry import (
    ReducedPoint,
    ResourceGuardError,
    UnsupportedMetricError,
    circle_fiber_distance,
    diameter_radius,
    distance,
    gh_distortion,
    half_sphere_distance,
    sample_space,
    wrap_separation,
)

from conftest import pinch_metric, round_metric


def great_circle(r1, r2, dtheta, dpsi):
    """Round S^3 with a = sin r, b = cos r embedded in R^4."""
    c = math.sin(r1) * math.sin(r2) * math.cos(dtheta) + math.cos(r1) * math.cos(r2) * math.cos(dpsi)
    return math.acos(max(-1.0, min(1.0, c)))


@pytest.fixture(scope="module")
def round_grid64():
    return GeodesicGrid(round_metric(3), 64)


def test_offsets():
    offs = primitive_offsets(2)
    assert len(offs) == 98
    assert not any(np.all(o == 0) for o in offs)
    plane = {tuple(o[:2]) for o in offs if o[2] == 0}
    assert len(plane) == 16  # the 16-neighbourhood in a coordinate plane
    assert len(primitive_offsets(3)) == 290


def test_axis_counts_nest():
    m = pinch_metric(1000)
    c32, c64 = axis_counts(m, 32), axis_counts(m, 64)
    assert all(b == 2 * a for a, b in zip(c32, c64))
    with pytest.raises(ValueError):
        axis_counts(m, 16)


def test_round_examples(round_grid64):
    m = round_metric(3)
    # the unit S^1 of the second factor sits at r = 0 with a = sin r, b = cos r
    for psi in (0.5, 1.0, math.pi):
        d = distance(m, ReducedPoint(0.0, 0.0, 0.0), ReducedPoint(0.0, 0.0, psi), 128)
        assert d.value == pytest.approx(psi, rel=0.02)
    d = distance(m, ReducedPoint(0.0), ReducedPoint(m.R), 128)
    assert d.value == pytest.approx(math.pi / 2, rel=0.02)
    assert d.coarse is not None and d.metrication_estimate >= -1e-12


def test_pinch_circle_fiber():
    m, c = pinch_metric(1000), None
    from spherepinch.warped import pinch_constants

    c = pinch_constants(1000)
    grid = GeodesicGrid(m, 64)
    for r in np.linspace(0, m.R, 5):
        r = grid.r[grid.r_index(r)]
        assert circle_fiber_distance(grid, r) <= math.pi * c.eta * 1.02


def test_upper_bound_and_nesting(round_grid64):
    fine = GeodesicGrid(round_metric(3), 128)
    coarse = round_grid64
    fc, ff = coarse.field_from(8), fine.field_from(16)
    sub = ff[::2, ::2, ::2]
    assert np.all(sub <= fc + 1e-12)
    for i2, j, l in [(0, 0, 0), (5, 10, 3), (32, 64, 32), (20, 3, 60)]:
        true = great_circle(coarse.r[8], coarse.r[i2], j * coarse.ht, l * coarse.hp)
        assert fc[i2, j, l] >= true - 1e-12


def test_symmetry_and_zero(round_grid64):
    g = round_grid64
    assert g.distance(0.3, 1.1, 0.7, 2.0) == g.distance(1.1, 0.3, 0.7, 2.0)
    assert g.distance(0.5, 0.5, 0.0, 0.0) == 0.0


def test_domain_errors():
    m = round_metric(3)
    with pytest.raises(ValueError):
        ReducedPoint(0.1, 4.0, 0.0)
    with pytest.raises(ValueError):
        ReducedPoint(-0.1)
    with pytest.raises(ValueError):
        distance(m, ReducedPoint(2.0), ReducedPoint(0.0), 64)
    with pytest.raises(ValueError):
        GeodesicGrid(m, 64).distance(0.1, 0.1, 0.0, 3.5)


@pytest.mark.parametrize("resolution, limit", [(128, 0.02), (256, 0.01)])
def test_round_relative_error(resolution, limit):
    """Relative error against great-circle distances from one source radius."""
    g = GeodesicGrid(round_metric(3), resolution)
    i = g.nr // 4
    f = g.field_from(i)
    worst = 0.0
    step_r, step_t, step_p = max(1, g.nr // 8), max(1, g.nt // 8), max(1, g.np // 8)
    for i2 in range(0, g.nr + 1, step_r):
        for j in range(0, g.nt + 1, step_t):
            for l in range(0, g.np + 1, step_p):
                true = great_circle(g.r[i], g.r[i2], j * g.ht, l * g.hp)
                if true > 0.05:
                    worst = max(worst, (f[i2, j, l] - true) / true)
    assert worst < limit, f"max relative error {worst:.4f} at resolution {resolution}"


def test_sample_space_properties(round_grid64):
    m = round_metric(3)
    space = sample_space(m, (4, 4, 4), grid=round_grid64)
    D = space.dist
    assert np.array_equal(D, D.T) and np.all(np.diag(D) == 0)
    tol = 2 * 0.1  # twice the observed metrication error on this grid
    viol = D[:, None, :] - (D[:, :, None] + D[None, :, :])
    assert viol.max() <= tol
    one = sample_space(m, (1, 1, 1), grid=round_grid64)
    assert one.dist.shape == (1, 1) and one.dist[0, 0] == 0
    with pytest.raises(ResourceGuardError):
        sample_space(m, (20, 20, 20), grid=round_grid64)


def test_pinch_distances_bounded_by_diameter():
    space = sample_space(pinch_metric(100), (6, 6, 6), 64)
    diam, rad = diameter_radius(space)
    assert np.all(space.dist <= diam + 1e-12)
    assert rad <= diam


def test_diameter_radius_round(round_grid64):
    m = round_metric(3)
    space = sample_space(m, (5, 8, 8), grid=round_grid64)
    diam, rad = diameter_radius(space)
    assert diam == pytest.approx(math.pi, rel=0.05)
    assert rad == pytest.approx(math.pi, rel=0.05)
    two = sample_space(m, (1, 1, 2), grid=round_grid64)
    d2, r2 = diameter_radius(two)
    assert d2 == pytest.approx(math.pi, rel=1e-12) and r2 == d2
    with pytest.raises(ValueError):
        diameter_radius(sample_space(m, (1, 1, 1), grid=round_grid64))


def test_half_sphere_examples():
    assert half_sphere_distance(math.pi / 2, math.pi, math.pi / 2) == pytest.approx(math.pi)
    assert half_sphere_distance(0.0, 1.3, 0.7) == pytest.approx(0.7)
    assert half_sphere_distance(math.pi / 4, math.pi / 2, math.pi / 4) == pytest.approx(math.pi / 3)


def test_wrap_separation():
    assert wrap_separation(0.1, 2 * math.pi - 0.1) == pytest.approx(0.2)
    assert wrap_separation(0.0, math.pi) == pytest.approx(math.pi)


def test_gh_round_unsupported():
    with pytest.raises(UnsupportedMetricError):
        gh_distortion(round_metric(3), 64)


def test_gh_trend_coarse():
    from spherepinch.warped import pinch_constants

    reps = [gh_distortion(pinch_metric(k), 64, counts=(5, 4, 8)) for k in (100, 1000, 10**4)]
    d = [r.max_distortion for r in reps]
    assert d[0] > d[1] > d[2]
    for k, rep in zip((100, 1000, 10**4), reps):
        c = pinch_constants(k)
        assert rep.covering_defect <= c.eps + c.theta + 0.05
    assert set(reps[0].as_dict()) >= {"k", "resolution", "max_distortion", "covering_defect", "circle_fiber_max"}
