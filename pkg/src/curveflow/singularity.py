"""Blow-up time estimation, type classification and parabolic rescaling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .geometry import ClosedCurve, Curve, CurveError, OpenCurve, frame

TYPE_I = "TypeI"
TYPE_II = "TypeII"
INCONCLUSIVE = "Inconclusive"

SLOPE_TOL = 0.05
GROWTH_FACTOR = 3.0
MIN_TAIL = 10


class SingularityError(ValueError):
    pass


@dataclass
class BlowupRecord:
    T_hat: float
    t: np.ndarray = field(repr=False)
    kappa: np.ndarray = field(repr=False)  # max |kappa| per tail sample
    scaled: np.ndarray = field(repr=False)  # max |kappa| * sqrt(T_hat - t)
    classification: str = INCONCLUSIVE
    C0: float | None = None
    tail_slope: float | None = None
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "T_hat": self.T_hat,
            "classification": self.classification,
            "C0": self.C0,
            "tail_slope": self.tail_slope,
            "note": self.note,
            "samples": [
                {"t": float(a), "kappa_max": float(b), "scaled": float(c)}
                for a, b, c in zip(self.t, self.kappa, self.scaled)
            ],
        }


def _blowup_series(traj):
    if traj.first_event("blowup") is None:
        raise SingularityError("trajectory has no blow-up trigger")
    return traj.column("t"), traj.column("kappa_abs_max")


def estimate_T(traj, tail_ratio: float = 0.5) -> BlowupRecord:
    """Fit 1/max|kappa|^2 = a (T - t) over the tail of a blow-up trajectory.

    The tail is every recorded sample from the last time max|kappa| was below
    ``tail_ratio`` times its final value (at least ``MIN_TAIL`` samples when
    available).  A tail in which max|kappa| is not increasing, or a fit that
    places T before the last sample, gives an Inconclusive record with NaN T.
    """
    t, k = _blowup_series(traj)
    below = np.flatnonzero(k < tail_ratio * k[-1])
    start = below[-1] + 1 if below.size else 0
    start = min(start, max(len(t) - MIN_TAIL, 0))
    tt, kk = t[start:], k[start:]
    nan = np.full_like(tt, np.nan)
    if len(tt) < 3:
        return BlowupRecord(math.nan, tt, kk, nan, note="fewer than 3 tail samples")
    if np.any(np.diff(kk) < 0):
        return BlowupRecord(math.nan, tt, kk, nan, note="max|kappa| is not monotone over the tail")
    slope, intercept = np.polyfit(tt, 1.0 / kk ** 2, 1)
    if slope >= 0:
        return BlowupRecord(math.nan, tt, kk, nan, note="1/kappa^2 does not decrease over the tail")
    T_hat = -intercept / slope
    if T_hat <= tt[-1]:
        return BlowupRecord(math.nan, tt, kk, nan, note="fitted T precedes the last sample")
    return BlowupRecord(float(T_hat), tt, kk, kk * np.sqrt(T_hat - tt))


def classify(record: BlowupRecord) -> tuple[str, float | None]:
    """TypeI(C0), TypeII or Inconclusive from the tail of max|kappa| sqrt(T_hat - t)."""
    if not np.isfinite(record.T_hat) or len(record.t) < MIN_TAIL:
        record.classification, record.C0 = INCONCLUSIVE, None
        return INCONCLUSIVE, None
    x = -np.log(record.T_hat - record.t)
    y = np.log(record.scaled)
    slope = float(np.polyfit(x, y, 1)[0])
    record.tail_slope = slope
    if slope <= SLOPE_TOL:
        record.classification, record.C0 = TYPE_I, float(np.max(record.scaled))
    elif slope > 0 and np.max(record.scaled) > GROWTH_FACTOR * np.median(record.scaled):
        record.classification, record.C0 = TYPE_II, None
    else:
        record.classification, record.C0 = INCONCLUSIVE, None
    return record.classification, record.C0


@dataclass
class RescaleFrame:
    k: int
    lambda_k: float
    t_k: float
    p_k: int
    record_k: int  # index of the selected recorded state
    alpha_k: float
    T_k: float
    T_hat: float
    taus: np.ndarray = field(repr=False)
    snapshots: list = field(repr=False)
    kappa_at_selected: float = 1.0
    sup_kappa: float = math.nan  # over all rescaled snapshots
    sup_kappa_past: float = math.nan  # over rescaled times tau <= 0

    @property
    def tau_range(self) -> tuple[float, float]:
        return self.alpha_k, self.T_k

    def to_dict(self) -> dict:
        return {
            "k": self.k, "lambda_k": self.lambda_k, "t_k": self.t_k, "p_k": self.p_k,
            "alpha_k": self.alpha_k, "T_k": self.T_k, "T_hat": self.T_hat,
            "kappa_at_selected": self.kappa_at_selected,
            "sup_kappa": self.sup_kappa, "sup_kappa_past": self.sup_kappa_past,
            "taus": [float(x) for x in self.taus],
        }


def parabolic_rescale(traj, k: int, T_hat: float | None = None) -> RescaleFrame:
    """Rescale a blow-up trajectory about the point maximising kappa^2 (T - 1/k - t).

    The maximum runs over recorded states with t <= T - 1/k and all their
    vertices.  Every such state is mapped to lambda (X - X(p_k, t_k)) at
    rescaled time lambda^2 (t - t_k), with lambda = |kappa(p_k, t_k)|.
    """
    if T_hat is None:
        T_hat = estimate_T(traj).T_hat
    if not np.isfinite(T_hat):
        raise SingularityError("blow-up time could not be estimated")
    cutoff = T_hat - 1.0 / k
    t = traj.column("t")
    eligible = np.flatnonzero(t <= cutoff)
    if eligible.size == 0:
        raise SingularityError(f"k={k} too large: T - 1/k = {cutoff:.6g} precedes all samples")
    curves = [traj.curve_at(i) for i in eligible]
    kappas = [frame(c).kappa for c in curves]
    best, sel = -math.inf, (0, 0)
    for j, kap in enumerate(kappas):
        p = int(np.argmax(np.abs(kap)))
        value = kap[p] ** 2 * (cutoff - t[eligible[j]])
        if value > best:
            best, sel = value, (j, p)
    j, p = sel
    lam = float(abs(kappas[j][p]))
    t_k = float(t[eligible[j]])
    origin = curves[j].vertices[p].copy()
    taus = lam ** 2 * (t[eligible] - t_k)
    snaps = []
    sup, sup_past = 0.0, 0.0
    for c, kap, tau in zip(curves, kappas, taus):
        snaps.append(lam * (c.vertices - origin))
        m = float(np.max(np.abs(kap))) / lam
        sup = max(sup, m)
        if tau <= 0:
            sup_past = max(sup_past, m)
    return RescaleFrame(
        k=k, lambda_k=lam, t_k=t_k, p_k=p, record_k=int(eligible[j]),
        alpha_k=-lam ** 2 * t_k, T_k=lam ** 2 * (cutoff - t_k), T_hat=float(T_hat),
        taus=taus, snapshots=snaps,
        kappa_at_selected=float(abs(kappas[j][p]) / lam),
        sup_kappa=sup, sup_kappa_past=sup_past,
    )


def rescaled_curve(frame_: RescaleFrame, i: int, closed: bool = True) -> Curve:
    v = frame_.snapshots[i]
    return ClosedCurve(v, orient=False) if closed else OpenCurve(v, asymptotic=False)


# --- grim reaper comparison ----------------------------------------------------


def _reaper_point(s):
    return np.column_stack((np.arctan(np.sinh(s)), np.log(np.cosh(s))))


def _distance_to_reaper(q: np.ndarray) -> np.ndarray:
    """Euclidean distance from each point to the graph of -log cos x."""
    dense = np.linspace(-12.0, 12.0, 4801)
    P = _reaper_point(dense)
    # nearest dense sample, then Newton on the foot-point condition
    s = np.empty(len(q))
    for lo in range(0, len(q), 512):
        blk = q[lo:lo + 512]
        d2 = (blk[:, None, 0] - P[None, :, 0]) ** 2 + (blk[:, None, 1] - P[None, :, 1]) ** 2
        s[lo:lo + 512] = dense[np.argmin(d2, axis=1)]
    for _ in range(30):
        p = _reaper_point(s)
        sech = 1.0 / np.cosh(s)
        tx, ty = sech, np.tanh(s)
        nx, ny = -ty, sech  # d tau / ds = kappa n with kappa = sech
        dx, dy = p[:, 0] - q[:, 0], p[:, 1] - q[:, 1]
        f = dx * tx + dy * ty
        fp = 1.0 + sech * (dx * nx + dy * ny)
        ds = f / np.where(np.abs(fp) < 1e-12, 1e-12, fp)
        s = np.clip(s - ds, -30, 30)
        if np.max(np.abs(ds)) < 1e-14:
            break
    p = _reaper_point(s)
    return np.hypot(p[:, 0] - q[:, 0], p[:, 1] - q[:, 1])


def grim_reaper_deviation(curve: OpenCurve) -> float:
    """Sup distance from the vertices to the best vertical translate of y = -log cos x.

    The curve must be a graph over the x1-axis within |x1| < pi/2.
    """
    pts = curve.vertices
    dx = np.diff(pts[:, 0])
    if not (np.all(dx > 0) or np.all(dx < 0)):
        raise CurveError("curve is not a graph over the x1-axis")
    if np.max(np.abs(pts[:, 0])) >= math.pi / 2:
        raise CurveError("curve leaves the strip |x1| < pi/2")
    mid = int(np.argmin(np.abs(pts[:, 0])))
    c0 = pts[mid, 1] + math.log(math.cos(pts[mid, 0]))

    def sup_dist(c):
        q = pts - np.array([0.0, c])
        return float(np.max(_distance_to_reaper(q)))

    res = minimize_scalar(sup_dist, bounds=(c0 - 0.5, c0 + 0.5), method="bounded",
                          options={"xatol": 1e-12})
    return float(min(res.fun, sup_dist(c0)))
