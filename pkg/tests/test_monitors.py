import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curveflow.geometry import ClosedCurve, CurveError, NotConvexError
from curveflow.monitors import (
    bonnesen_gap,
    certificate_report,
    chord_arc_min,
    chord_psi_min,
    conserved_interpolant,
    gage_residual,
    isoperimetric_deficit,
    psi,
    theta_report,
)
from curveflow.oracles import brute_force_ratio, brute_force_theta
from curveflow.scenarios import (
    make_cexample,
    make_circle,
    make_ellipse,
    make_grim_reaper,
    make_open_vee,
    make_square,
    make_straight_line,
    make_wavy,
)


def test_psi_values():
    assert psi(0.0, 4.0) == 0.0
    assert psi(2.0, 4.0) == pytest.approx(4 / math.pi)
    with pytest.raises(ValueError):
        psi(5.0, 4.0)


@settings(max_examples=50, deadline=None)
@given(L=st.floats(0.1, 100.0), frac=st.floats(0.0, 1.0))
def test_psi_symmetric_and_below_arclength(L, frac):
    l = frac * L
    assert psi(l, L) == pytest.approx(psi(L - l, L), abs=1e-12 * L)
    assert psi(l, L) <= min(l, L - l) + 1e-12 * L


def test_circle_psi_ratio_is_one():
    rep = chord_psi_min(make_circle(1.0, 256))
    assert rep.min_value == pytest.approx(1.0, abs=1e-12)


def test_ellipse_psi_ratio_below_one_and_matches_oracle():
    c = make_ellipse(2, 1, 96)
    rep = chord_psi_min(c, keep_matrix=True)
    oracle = brute_force_ratio(c.vertices, True, "d_over_psi")
    assert rep.min_value < 1
    assert rep.min_value == pytest.approx(oracle.min_value, abs=1e-12)
    assert rep.argmin == oracle.argmin
    assert np.allclose(rep.matrix, rep.matrix.T, atol=1e-12)


def test_chord_arc_on_line_and_reaper():
    assert chord_arc_min(make_straight_line()).min_value == pytest.approx(1.0, abs=1e-15)
    values = [chord_arc_min(make_grim_reaper(s, 256)).min_value for s in (1.4, 1.5, 1.55)]
    assert values[0] > values[1] > values[2]


def test_open_curve_rejects_psi():
    with pytest.raises(CurveError):
        chord_psi_min(make_straight_line())


def test_theta_on_convex_curve():
    rep = theta_report(make_ellipse(2, 1, 256))
    assert rep.theta_min == 0.0
    assert rep.theta_sup == pytest.approx(2 * math.pi, abs=1e-12)


def test_theta_identity_on_wavy_and_oracle():
    c = make_wavy(0.3, 3, 128)
    rep = theta_report(c)
    assert rep.identity_defect < 1e-12
    lo, hi = brute_force_theta(c.vertices, True)
    assert rep.theta_min == pytest.approx(lo, abs=1e-12)
    assert rep.theta_sup == pytest.approx(hi, abs=1e-12)


def test_theta_on_open_vee():
    rep = theta_report(make_open_vee(math.pi / 2))
    assert rep.theta_min == pytest.approx(0.0, abs=1e-12)
    assert rep.theta_sup == pytest.approx(math.pi / 2, abs=1e-12)
    neg = theta_report(make_open_vee(-math.pi / 2))
    assert neg.theta_min == pytest.approx(-math.pi / 2, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(
    radii=st.lists(st.floats(0.5, 1.5), min_size=20, max_size=60),
    seed=st.integers(0, 1000),
)
def test_theta_identity_on_random_star_polygons(radii, seed):
    n = len(radii)
    rng = np.random.default_rng(seed)
    a = np.sort(rng.uniform(0, 2 * math.pi, n))
    a = np.unique(a)
    r = np.asarray(radii[: len(a)])
    c = ClosedCurve(np.column_stack((r * np.cos(a), r * np.sin(a))))
    rep = theta_report(c)
    assert rep.identity_defect < 1e-12
    lo, hi = brute_force_theta(c.vertices, True)
    assert rep.theta_min == pytest.approx(lo, abs=1e-12)
    assert rep.theta_sup == pytest.approx(hi, abs=1e-12)


def test_unit_square_hand_values():
    sq = make_square(64)
    assert isoperimetric_deficit(4.0, 1.0) * 4 * math.pi == pytest.approx(16 - 4 * math.pi)
    gap = bonnesen_gap(sq)
    want = 16 - 4 * math.pi - math.pi ** 2 * (math.sqrt(2) / 2 - 0.5) ** 2
    assert gap == pytest.approx(want, abs=1e-9)


def test_gage_residual_on_circle_and_ellipse():
    assert 0 <= gage_residual(make_circle(1.0, 512)) <= 1e-4
    assert gage_residual(make_ellipse(2, 1, 512)) > 0.1
    with pytest.raises(NotConvexError):
        gage_residual(make_wavy(0.3, 3, 256))


def test_bonnesen_gap_on_circle():
    assert abs(bonnesen_gap(make_circle(1.0, 1024))) <= 1e-4


def test_conserved_interpolant_endpoints():
    assert conserved_interpolant(0.0, 3.0, 7.0) == 3.0
    assert conserved_interpolant(1.0, 3.0, 7.0) == pytest.approx(49 / (4 * math.pi))


def test_certificate_report_closed_convex():
    rep = certificate_report(make_circle(1.0, 256), gamma=0.5)
    assert rep.ratio_min == pytest.approx(1.0, abs=1e-6)
    assert rep.convex and rep.gage_residual is not None
    assert not rep.violates_theta_condition
    d = rep.to_dict()
    assert d["ratio_kind"] == "d_over_psi"
    assert d["gamma"] == 0.5


def test_certificate_report_flags_counterexample():
    rep = certificate_report(make_cexample(N=512))
    assert rep.theta_min < -math.pi
    assert rep.violates_theta_condition
    assert not rep.convex and rep.gage_residual is None


def test_certificate_report_open_curve():
    rep = certificate_report(make_grim_reaper(1.5, 256))
    assert rep.ratio_kind == "d_over_l"
    assert rep.truncated and rep.alpha == pytest.approx(math.pi)


def test_certificate_report_rejects_non_simple(figure_eight):
    with pytest.raises(CurveError, match="edges"):
        certificate_report(figure_eight)
