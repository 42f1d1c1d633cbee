import math

import mpmath
import numpy as np
import pytest

from spherepinch.profiles import PiecewiseSmoothFunction, ScaledCosine
from spherepinch.warped import (
    dump_metric,
    load_metric,
    make_pinch_family,
    make_round_sphere,
    pinch_constants,
    sphere_volume,
    validate_closure,
    volume,
)


def reference_constants(k):
    """Independent 60-digit evaluation of the closed forms."""
    with mpmath.workdps(60):
        s = 1 / mpmath.sqrt(k)
        eta = mpmath.sqrt(mpmath.sin(s) ** 2 + mpmath.cos(s) ** 2 / k**2)
        eps = (mpmath.pi / 2 - s) / k
        theta = mpmath.atan(1 / (k * mpmath.tan(s))) - mpmath.pi / (2 * k) + 1 / (k * mpmath.sqrt(k))
        return float(eta), float(eps), float(theta), float(mpmath.pi / 2 - theta)


def test_constants_k100():
    c = pinch_constants(100)
    assert c.eta == pytest.approx(0.1003280, abs=5e-8)
    assert c.eps == pytest.approx(0.0147080, abs=5e-8)
    assert c.R == pytest.approx(1.4861659, abs=5e-8)
    eta, eps, theta, R = reference_constants(100)
    assert (c.eta, c.eps, c.theta, c.R) == pytest.approx((eta, eps, theta, R), rel=1e-15)


@pytest.mark.parametrize("k", [2, 10, 100, 1000, 10**4, 10**5])
def test_constant_identities(k):
    c = pinch_constants(k)
    assert c.angle_identity_residual() < 1e-12
    assert c.eta_identity_residual() < 1e-14


@pytest.mark.parametrize("k", [10, 1000, 10**5])
def test_pinch_closure_and_seams(k):
    m, c = make_pinch_family(3, k)
    rep = validate_closure(m)
    assert rep.ok, rep.failures()
    assert m.a(0.0, 1) == 1.0 and m.b(0.0, 1) == 0.0
    assert all(max(dv, dd) < 1e-12 for _, dv, dd in rep.seams)


def test_round_closure_exact():
    rep = validate_closure(make_round_sphere(3))
    assert rep.ok
    assert max(c.residual for c in rep.checks) < 1e-15


def test_closure_violation_flagged():
    m = make_round_sphere(3)
    bad_b = PiecewiseSmoothFunction((0.0, m.R), (ScaledCosine(0.9, 1.0, 0.0, 0.1),))
    rep = validate_closure(m.with_profiles(b=bad_b))
    assert not rep.ok
    assert "b'(R)" in rep.failures()


def test_small_dimension_rejected():
    with pytest.raises(ValueError):
        make_round_sphere(2)
    with pytest.raises(ValueError):
        make_pinch_family(2, 100)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_round_volume(n):
    assert volume(make_round_sphere(n)) == pytest.approx(sphere_volume(n), rel=1e-7)


def test_round_s3_volume_value():
    assert volume(make_round_sphere(3)) == pytest.approx(2 * math.pi**2, abs=1e-8)


def test_pinch_volume_trend():
    vols = [volume(make_pinch_family(3, k)[0]) for k in (100, 1000, 10**4)]
    assert vols[0] > vols[1] > vols[2]
    base = sphere_volume(3)
    for k, v in zip((100, 1000, 10**4), vols):
        ratio = v / base / pinch_constants(k).eta
        assert 0.5 < ratio < 2.0


def test_volume_linear_in_a_and_monotone():
    m = make_round_sphere(3)
    half = m.with_profiles(a=m.a.scaled(0.5))
    big = m.with_profiles(a=m.a.scaled(1.1))
    assert volume(half) == pytest.approx(volume(m) / 2, rel=1e-14)
    assert volume(big) > volume(m)


def test_volume_quadrature_guard():
    with pytest.raises(ValueError):
        volume(make_round_sphere(3), quad_points=8)


def test_metric_text_round_trip():
    m, _ = make_pinch_family(4, 1000)
    text = dump_metric(m)
    assert text.startswith("warped n=4 R=")
    back = load_metric(text)
    assert back.a == m.a and back.b == m.b and back.n == 4
    r = np.linspace(0, m.R, 101)
    assert np.array_equal(back.weight(r), m.weight(r))
