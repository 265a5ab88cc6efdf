import math

import numpy as np
import pytest

from curveflow.forcing import (
    AdmissibilityError,
    ForcingError,
    ForcingSpec,
    RateTable,
    compute_h,
    curvature_energy,
    gamma_from_delta,
    h_window,
    regular_polygon_deficit,
)
from curveflow.geometry import enclosed_area, frame, length
from curveflow.scenarios import make_circle, make_ellipse, make_grim_reaper, make_square


def test_apcsf_is_two_pi_over_length():
    c = make_ellipse(2, 1, 256)
    assert compute_h(ForcingSpec.area_preserving(), c, 0.0) == pytest.approx(2 * math.pi / length(c))


def test_discrete_exact_apcsf_uses_polygon_turning():
    c = make_square(64)
    h = compute_h(ForcingSpec.area_preserving(discrete_exact=True), c, 0.0)
    assert h == pytest.approx(frame(c).total_turning / 4.0, rel=1e-14)


def test_lpcf_on_circle_is_reciprocal_radius():
    c = make_circle(2.0, 1024)
    assert compute_h(ForcingSpec.length_preserving(), c, 0.0) == pytest.approx(0.5, rel=1e-5)


def test_csf_is_zero_everywhere():
    assert compute_h(ForcingSpec.csf(), make_grim_reaper(1.4, 64), 3.0) == 0.0


def test_gamma_formula():
    L0, A0 = 10.0, 5.0
    deficit = L0 ** 2 / (4 * math.pi) - A0
    assert gamma_from_delta(1.1, L0, A0) == pytest.approx(0.1 * A0 / deficit)
    assert gamma_from_delta(1.0, L0, A0) == 0.0


def test_interpolated_delta_one_has_zero_gamma_and_matches_apcsf():
    c = make_ellipse(2, 1, 256)
    spec = ForcingSpec.interpolated(1.0, c)
    assert spec.gamma == 0.0
    assert compute_h(spec, c, 0.0) == pytest.approx(compute_h(ForcingSpec.area_preserving(), c, 0.0))


def test_interpolated_rejected_on_circle():
    with pytest.raises(ForcingError, match="circle"):
        ForcingSpec.interpolated(1.1, make_circle(1.0, 256))
    # delta = 1 stays admissible on the circle
    assert ForcingSpec.interpolated(1.0, make_circle(1.0, 256)).gamma == 0.0


def test_interpolated_weights():
    c = make_ellipse(2, 1, 256)
    spec = ForcingSpec.interpolated(1.3, c)
    E = curvature_energy(c)
    L = length(c)
    want = (1 - spec.gamma) * 2 * math.pi / L + spec.gamma * E / (2 * math.pi)
    assert compute_h(spec, c, 0.0) == pytest.approx(want)
    assert spec.gamma > 1
    assert ForcingSpec.interpolated(0.9, c).gamma < 0


def test_regular_polygon_deficit():
    L = 2 * math.pi
    assert regular_polygon_deficit(L, 4) == pytest.approx(math.pi - math.pi ** 2 / 4)
    big = regular_polygon_deficit(np.array([L, L]), np.array([256, 512]))
    assert big[0] > big[1] > 0
    c = make_circle(1.0, 64)
    assert regular_polygon_deficit(length(c), 64) == pytest.approx(
        length(c) ** 2 / (4 * math.pi) - enclosed_area(c), rel=1e-9
    )


def test_rate_table():
    tab = RateTable((0.0, 1.0, 2.0), (-1.0, -0.5, 0.0))
    assert tab(0.5) == pytest.approx(-0.75)
    assert tab(5.0) == 0.0
    assert tab.integral() == pytest.approx(-1.0)
    assert tab.nondecreasing and not tab.nonincreasing
    with pytest.raises(ForcingError):
        RateTable((0.0, 0.0), (1.0, 1.0))


def test_area_rate_windows():
    ForcingSpec.area_rate([0, 1], [-1.0, 0.0])
    ForcingSpec.area_rate([0, 1], [2.0, 0.0])
    with pytest.raises(AdmissibilityError):
        ForcingSpec.area_rate([0, 1], [-7.0, 0.0])  # below -2 pi
    with pytest.raises(AdmissibilityError):
        ForcingSpec.area_rate([0, 1], [0.0, -1.0])  # decreasing
    with pytest.raises(AdmissibilityError):
        ForcingSpec.area_rate([0, 1], [-1.0, -0.5])  # does not end at 0


def test_area_rate_integral_conditions():
    c = make_ellipse(2, 1, 256)
    A0 = enclosed_area(c)
    spec = ForcingSpec.area_rate([0, 2 * A0 / 3], [-3.0, 0.0])  # integral = -A0
    with pytest.raises(AdmissibilityError, match="-A0"):
        spec.check_initial(c)
    ForcingSpec.area_rate([0, 0.1], [-3.0, 0.0]).check_initial(c)


def test_area_rate_h_and_pointwise_check():
    c = make_ellipse(2, 1, 256)
    spec = ForcingSpec.area_rate([0, 1], [-1.0, 0.0])
    assert compute_h(spec, c, 0.0) == pytest.approx((2 * math.pi - 1.0) / length(c))
    # positive rates must stay below L/2pi int kappa^2 - 2pi
    E, L = curvature_energy(c), length(c)
    too_big = L * E / (2 * math.pi) - 2 * math.pi + 1.0
    bad = ForcingSpec.area_rate([0, 1], [too_big, 0.0])
    with pytest.raises(AdmissibilityError):
        compute_h(bad, c, 0.0)


def test_length_rate():
    c = make_ellipse(2, 1, 256)
    spec = ForcingSpec.length_rate([0, 1], [-0.5, 0.0])
    assert compute_h(spec, c, 0.0) == pytest.approx((curvature_energy(c) - 0.5) / (2 * math.pi))
    with pytest.raises(AdmissibilityError):
        ForcingSpec.length_rate([0, 1], [-0.5, 0.5])


def test_schedule_needs_nonnegative_values():
    spec = ForcingSpec.schedule([0, 1], [0.0, 1.0])
    assert compute_h(spec, make_grim_reaper(1.4, 64), 0.5) == 0.5
    with pytest.raises(ForcingError):
        ForcingSpec.schedule([0, 1], [0.0, -1.0])


def test_closed_only_forcing_rejects_open_curves():
    reaper = make_grim_reaper(1.4, 64)
    with pytest.raises(ForcingError):
        ForcingSpec.area_preserving().check_initial(reaper)
    with pytest.raises(ForcingError):
        compute_h(ForcingSpec.length_preserving(), reaper, 0.0)


def test_h_window_contains_standard_forcings():
    c = make_ellipse(2, 1, 256)
    lo, hi = h_window(c)
    for spec in (ForcingSpec.area_preserving(), ForcingSpec.length_preserving(),
                 ForcingSpec.interpolated(1.1, c)):
        assert lo <= compute_h(spec, c, 0.0) <= hi


def test_describe_roundtrips_names():
    c = make_ellipse(2, 1, 64)
    assert ForcingSpec.interpolated(1.1, c).describe() == "interp(delta=1.1)"
    assert ForcingSpec.area_preserving(discrete_exact=True).describe() == "apcsf(discrete_exact)"
    assert ForcingSpec.csf().describe() == "csf"
