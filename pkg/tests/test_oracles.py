import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curveflow.flow import StepConfig, Trajectory, run
from curveflow.forcing import ForcingSpec, curvature_energy
from curveflow.geometry import ClosedCurve, enclosed_area, frame, length
from curveflow.monitors import chord_arc_min, chord_psi_min, theta_report
from curveflow.oracles import (
    brute_force_ratio,
    brute_force_theta,
    convergence_order,
    ellipse_quadrature,
    exact_circle_csf,
    fd_identity_check,
    polar_quadrature,
    polar_theta_min,
    polygon_area,
    polygon_energy,
    polygon_length,
)
from curveflow.scenarios import make_circle, make_ellipse, make_grim_reaper, make_wavy


def test_exact_circle_values():
    assert exact_circle_csf(1.0, 0.0) == 1.0
    assert exact_circle_csf(1.0, 0.375) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        exact_circle_csf(1.0, 0.6)


def test_polygon_helpers_match_main_code():
    c = make_wavy(0.2, 4, 200)
    assert polygon_length(c.vertices) == pytest.approx(length(c), rel=1e-14)
    assert polygon_area(c.vertices) == pytest.approx(enclosed_area(c), rel=1e-13)
    assert polygon_energy(c.vertices) == pytest.approx(curvature_energy(c), rel=1e-12)


def test_ellipse_quadrature_circle_limit():
    assert ellipse_quadrature(2.0, 2.0, "L") == pytest.approx(4 * math.pi, rel=1e-12)
    assert ellipse_quadrature(2.0, 2.0, "energy") == pytest.approx(math.pi, rel=1e-12)
    assert ellipse_quadrature(2.0, 1.0, "kappa_max") == 2.0
    with pytest.raises(ValueError):
        ellipse_quadrature(-1.0, 1.0, "L")


def test_discrete_ellipse_converges_to_quadrature():
    errs = []
    for n in (256, 512):
        c = make_ellipse(2, 1, n)
        errs.append(abs(curvature_energy(c) - ellipse_quadrature(2, 1, "energy")))
        assert length(c) == pytest.approx(ellipse_quadrature(2, 1, "L"), rel=1e-4)
        assert np.max(frame(c).kappa) == pytest.approx(ellipse_quadrature(2, 1, "kappa_max"), rel=1e-3)
    assert convergence_order(errs[0], errs[1]) > 1.8


def test_polar_quadrature_and_theta_against_wavy():
    c = make_wavy(0.3, 3, 1024)
    assert length(c) == pytest.approx(polar_quadrature(0.3, 3, "L"), rel=1e-5)
    assert enclosed_area(c) == pytest.approx(polar_quadrature(0.3, 3, "area"), rel=1e-5)
    assert curvature_energy(c) == pytest.approx(polar_quadrature(0.3, 3, "energy"), rel=1e-3)
    assert theta_report(c).theta_min == pytest.approx(polar_theta_min(0.3, 3), abs=5e-3)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(16, 40))
def test_pair_scans_match_brute_force(seed, n):
    rng = np.random.default_rng(seed)
    a = np.sort(rng.uniform(0, 2 * math.pi, n))
    a = np.unique(a)
    if len(a) < 16:
        return
    r = rng.uniform(0.6, 1.4, len(a))
    c = ClosedCurve(np.column_stack((r * np.cos(a), r * np.sin(a))))
    o = brute_force_ratio(c.vertices, True, "d_over_psi")
    m = chord_psi_min(c)
    assert m.min_value == pytest.approx(o.min_value, abs=1e-12)
    lo, hi = brute_force_theta(c.vertices, True)
    rep = theta_report(c)
    assert (rep.theta_min, rep.theta_sup) == pytest.approx((lo, hi), abs=1e-12)


def test_open_pair_scan_matches_brute_force():
    r = make_grim_reaper(1.5, 96)
    assert chord_arc_min(r).min_value == pytest.approx(
        brute_force_ratio(r.vertices, False, "d_over_l").min_value, abs=1e-12
    )
    with pytest.raises(ValueError):
        brute_force_ratio(r.vertices, False, "d_over_x")


def test_fd_check_on_csf_circle():
    # on the regular N-gon dA/dt = -2pi cos(pi/N), so N = 1024 is needed for 1e-4
    tr = run(make_circle(1.0, 1024), ForcingSpec.csf(),
             StepConfig(scheme="heun", dt=5e-6, t_max=1e-4, record_every=1, monitors="basic"))
    for which in ("area", "length"):
        assert fd_identity_check(tr, which).max_defect <= 1e-4


def test_fd_check_preconditions():
    tr = Trajectory(True, ForcingSpec.csf(), StepConfig())
    tr.series["t"] = [0.0, 0.1, 0.2]
    with pytest.raises(ValueError, match="5"):
        fd_identity_check(tr, "area")
    tr.series["t"] = [0.0, 0.1, 0.2, 0.4, 0.5]
    with pytest.raises(ValueError, match="uniformly"):
        fd_identity_check(tr, "area")
    with pytest.raises(ValueError):
        fd_identity_check(tr, "volume")


def test_convergence_order():
    assert convergence_order(4e-4, 1e-4) == pytest.approx(2.0)
