import math

import numpy as np
import pytest

from curveflow.flow import BLOWUP, Event, StepConfig, Trajectory, run
from curveflow.forcing import ForcingSpec
from curveflow.geometry import CurveError, OpenCurve, frame
from curveflow.scenarios import make_circle, make_grim_reaper
from curveflow.singularity import (
    BlowupRecord,
    INCONCLUSIVE,
    TYPE_I,
    TYPE_II,
    SingularityError,
    classify,
    estimate_T,
    grim_reaper_deviation,
    parabolic_rescale,
    rescaled_curve,
)


def _synthetic(times, kappas, with_event=True):
    tr = Trajectory(True, ForcingSpec.csf(), StepConfig())
    tr.series["t"] = list(times)
    tr.series["kappa_abs_max"] = list(kappas)
    if with_event:
        tr.events.append(Event(BLOWUP, times[-1], len(times)))
    return tr


def test_estimate_T_exact_on_type_one_profile():
    T = 0.5
    t = np.linspace(0, 0.49, 50)
    k = 1 / np.sqrt(2 * (T - t))
    rec = estimate_T(_synthetic(t, k))
    assert rec.T_hat == pytest.approx(T, rel=1e-10)
    cls, C0 = classify(rec)
    assert cls == TYPE_I
    assert C0 == pytest.approx(1 / math.sqrt(2), rel=1e-8)


def test_type_two_profile():
    # kappa ~ (T - t)^(-3/4): kappa sqrt(T - t) grows without bound
    T = 1.0
    t = T - np.geomspace(1.0, 1e-6, 60)
    k = (T - t) ** -0.75
    rec = BlowupRecord(T, t, k, k * np.sqrt(T - t))
    cls, C0 = classify(rec)
    assert cls == TYPE_II and C0 is None
    assert rec.tail_slope == pytest.approx(0.25, abs=1e-6)


def test_non_monotone_tail_is_inconclusive():
    t = np.linspace(0, 1, 20)
    k = 1 + np.sin(8 * t) ** 2
    k[-1] = 10
    rec = estimate_T(_synthetic(t, k))
    assert math.isnan(rec.T_hat)
    assert classify(rec) == (INCONCLUSIVE, None)


def test_short_record_is_inconclusive():
    rec = BlowupRecord(1.0, np.array([0.1, 0.2, 0.3]), np.ones(3), np.ones(3))
    assert classify(rec) == (INCONCLUSIVE, None)


def test_missing_blowup_event():
    with pytest.raises(SingularityError):
        estimate_T(_synthetic([0, 1, 2], [1, 2, 3], with_event=False))


@pytest.fixture(scope="module")
def circle_blowup():
    return run(make_circle(1.0, 128), ForcingSpec.csf(), StepConfig(t_max=1.0, record_dt=0.01, monitors="basic"))


def test_rescale_bookkeeping_on_circle(circle_blowup):
    tr = circle_blowup
    rec = estimate_T(tr)
    assert rec.T_hat == pytest.approx(0.5, rel=0.02)
    fr = parabolic_rescale(tr, 10, rec.T_hat)
    assert fr.kappa_at_selected == pytest.approx(1.0, abs=1e-12)
    assert fr.taus[fr.record_k - int(np.flatnonzero(tr.column("t") <= rec.T_hat - 0.1)[0])] == 0.0
    assert fr.alpha_k == pytest.approx(-fr.lambda_k ** 2 * fr.t_k)
    # the maximising choice bounds kappa_k^2 by T_k / (T_k - tau)
    for i, tau in enumerate(fr.taus):
        k = np.max(np.abs(frame(rescaled_curve(fr, i)).kappa))
        assert k ** 2 <= fr.T_k / (fr.T_k - tau) * (1 + 1e-9)
    assert fr.sup_kappa_past <= 1 + 1e-9
    # selected vertex sits at the origin
    assert np.allclose(fr.snapshots[fr.record_k - 0][fr.p_k], 0.0, atol=1e-12)


def test_rescale_k_too_large(circle_blowup):
    with pytest.raises(SingularityError, match="too large"):
        parabolic_rescale(circle_blowup, 1, 0.5)


def test_grim_reaper_deviation_zero_on_exact_curve():
    r = make_grim_reaper(1.4, 256)
    assert grim_reaper_deviation(r) < 1e-10
    shifted = OpenCurve(r.vertices + [0.0, 0.3], r.axis, r.alpha, asymptotic=False)
    assert grim_reaper_deviation(shifted) < 1e-9


def test_grim_reaper_deviation_detects_parabola():
    x = np.linspace(-1.2, 1.2, 200)
    par = OpenCurve(np.column_stack((x, 0.5 * x ** 2)), asymptotic=False)
    assert grim_reaper_deviation(par) > 1e-2


def test_grim_reaper_deviation_needs_graph():
    x = np.linspace(-2, 2, 64)
    with pytest.raises(CurveError, match="strip"):
        grim_reaper_deviation(OpenCurve(np.column_stack((x, x * 0)), asymptotic=False))
