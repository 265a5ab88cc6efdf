import math

import numpy as np
import pytest

from curveflow.geometry import frame, is_convex, is_simple, length
from curveflow.monitors import chord_arc_min, theta_report
from curveflow.scenarios import (
    SCENARIOS,
    ScenarioError,
    ScenarioSpec,
    make_cexample,
    make_circle,
    make_ellipse,
    make_grim_reaper,
    make_open_vee,
    make_square,
    make_wavy,
    neck_points,
)


@pytest.mark.parametrize("name", sorted(SCENARIOS))
def test_every_scenario_builds_simple_and_deterministic(name):
    a = ScenarioSpec(name, N=128).build()
    b = ScenarioSpec(name, N=128).build()
    assert len(a) == 128
    assert is_simple(a)
    assert np.array_equal(a.vertices, b.vertices)


def test_unknown_scenario():
    with pytest.raises(ScenarioError, match="unknown scenario"):
        ScenarioSpec("blob").build()


def test_parameter_guards():
    with pytest.raises(ScenarioError):
        make_circle(-1.0)
    with pytest.raises(ScenarioError):
        make_ellipse(0.0, 1.0)
    with pytest.raises(ScenarioError):
        make_wavy(1.0, 3)
    with pytest.raises(ScenarioError):
        make_square(30)
    with pytest.raises(ScenarioError):
        make_grim_reaper(math.pi / 2)
    with pytest.raises(ScenarioError):
        make_open_vee(math.pi)


def test_ellipse_is_equally_spaced_and_convex():
    c = make_ellipse(2, 1, 256)
    ds = frame(c).ds
    assert np.ptp(ds) / ds.mean() < 1e-3
    assert theta_report(c).theta_min == 0.0


@pytest.mark.parametrize("eps,m,convex", [(0.05, 2, True), (0.19, 2, True), (0.21, 2, False), (0.3, 3, False)])
def test_wavy_convexity_threshold(eps, m, convex):
    # r = 1 + eps cos(m phi) is convex iff eps < 1 / (m^2 + 1)
    assert is_convex(make_wavy(eps, m, 512)) is convex


def test_cexample_geometry():
    c = make_cexample(N=1024)
    rep = theta_report(c)
    assert rep.theta_min < -math.pi
    p, q = neck_points(c)
    fr = frame(c)
    assert abs(fr.kappa[p]) < 1e-9 and abs(fr.kappa[q]) < 1e-9
    assert c.vertices[p, 0] - c.vertices[q, 0] == pytest.approx(0.02, abs=1e-9)
    # symmetric about the x2-axis
    mirrored = c.vertices * [-1, 1]
    d = np.min(np.hypot(*(mirrored[:, None, :] - c.vertices[None, :, :]).transpose(2, 0, 1)), axis=1)
    assert np.max(d) < 0.05


def test_widened_cexample_meets_theta_condition():
    c = make_cexample(neck_gap=1.0, N=1024)
    # the slit is as wide as the hole: the U bottom turns by exactly -pi
    assert theta_report(c).theta_min == pytest.approx(-math.pi, abs=1e-12)


def test_grim_reaper_is_the_exact_graph():
    r = make_grim_reaper(1.5, 256)
    x, y = r.vertices.T
    assert np.allclose(y, -np.log(np.cos(x)), atol=1e-12)
    ds = frame(r).ds
    assert np.ptp(ds) / ds.mean() < 1e-2
    assert r.alpha == math.pi and not r.in_alpha_window


def test_grim_reaper_chord_arc_degenerates():
    values = [chord_arc_min(make_grim_reaper(s, 512)).min_value for s in (1.4, 1.5, 1.55)]
    assert values[0] > values[1] > values[2]


@pytest.mark.parametrize("alpha", [math.pi / 2, -math.pi / 3, 0.0])
def test_vee_total_curvature_and_end_angles(alpha):
    v = make_open_vee(alpha)
    fr = frame(v)
    assert fr.total_turning == pytest.approx(alpha, abs=1e-12)
    a0, a1 = v.end_angles()
    assert a0 == pytest.approx((math.pi - alpha) / 2, abs=1e-12)
    assert a1 == pytest.approx((math.pi + alpha) / 2, abs=1e-12)


def test_square_corners_and_length():
    sq = make_square(64, side=2.0)
    assert length(sq) == pytest.approx(8.0)
    turning = frame(sq).turning
    assert np.count_nonzero(np.abs(turning) > 1e-12) == 4
