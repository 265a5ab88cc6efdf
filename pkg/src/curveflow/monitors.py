"""Certificate functionals evaluated on single curves and on trajectories."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .forcing import regular_polygon_deficit
from .geometry import (
    ClosedCurve,
    Curve,
    CurveError,
    CurveFrame,
    NotConvexError,
    cumulative_turning,
    enclosed_area,
    find_crossing,
    frame,
    is_convex,
    radii,
)

TWO_PI = 2.0 * math.pi
_CHUNK = 256  # rows per block in the O(N^2) pair scans


def psi(l, L):
    """(L/pi) sin(pi l / L), the chord of the circle with perimeter L at arc distance l."""
    l = np.asarray(l, dtype=float)
    if np.any(l < 0) or np.any(l > L):
        raise ValueError("arc distance must lie in [0, L]")
    folded = np.minimum(l, L - l)
    out = (L / math.pi) * np.sin(math.pi * folded / L)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PairRatioReport:
    kind: str  # "d_over_psi" or "d_over_l"
    min_value: float
    argmin: tuple
    matrix: np.ndarray | None = field(default=None, repr=False, compare=False)


def _pair_scan(curve: Curve, kind: str, fr: CurveFrame | None, keep_matrix: bool) -> PairRatioReport:
    fr = fr if fr is not None else frame(curve)
    pts = curve.vertices
    s = fr.s
    L = fr.length
    n = len(pts)
    best, arg = 1.0, (0, 0)
    full = np.empty((n, n)) if keep_matrix else None
    for r0 in range(0, n, _CHUNK):
        rows = slice(r0, min(r0 + _CHUNK, n))
        diff = pts[None, :, :] - pts[rows, None, :]
        d = np.hypot(diff[..., 0], diff[..., 1])
        l = np.abs(s[None, :] - s[rows, None])
        with np.errstate(divide="ignore", invalid="ignore"):
            if kind == "d_over_psi":
                l = np.minimum(l, L - l)
                ratio = d / ((L / math.pi) * np.sin(math.pi * l / L))
            else:
                ratio = d / l
        idx = np.arange(rows.start, rows.stop)
        ratio[idx - r0, idx] = 1.0
        if keep_matrix:
            full[rows] = ratio
        k = int(np.argmin(ratio))
        value = float(ratio.flat[k])
        if value < best:
            best, arg = value, (r0 + k // n, k % n)
    return PairRatioReport(kind, best, arg, full)


def chord_psi_min(curve: ClosedCurve, fr: CurveFrame | None = None,
                  keep_matrix: bool = False) -> PairRatioReport:
    """Minimum of d/psi over vertex pairs; the diagonal counts as 1."""
    if not curve.closed:
        raise CurveError("d/psi is defined for closed curves")
    return _pair_scan(curve, "d_over_psi", fr, keep_matrix)


def chord_arc_min(curve: Curve, fr: CurveFrame | None = None,
                  keep_matrix: bool = False) -> PairRatioReport:
    """Minimum of chord over arclength between vertices (arclength along the parametrisation).

    For truncated open curves this bounds the infimum over the full curve from above.
    """
    return _pair_scan(curve, "d_over_l", fr, keep_matrix)


def ratio_min(curve: Curve, fr: CurveFrame | None = None) -> PairRatioReport:
    return chord_psi_min(curve, fr) if curve.closed else chord_arc_min(curve, fr)


@dataclass(frozen=True)
class ThetaReport:
    theta_min: float
    theta_sup: float
    argmin: tuple
    identity_defect: float | None  # closed curves: |theta_sup - (2 pi - theta_min)|


def _pair_difference_extremes(q: np.ndarray):
    """min and max of q[j] - q[i] over i < j, with the lexicographically first argmin."""
    n = len(q)
    prev_max = np.maximum.accumulate(q[:-1])
    prev_min = np.minimum.accumulate(q[:-1])
    dmin = q[1:] - prev_max
    dmax = q[1:] - prev_min
    jmin = int(np.argmin(dmin)) + 1
    jmax = int(np.argmax(dmax)) + 1
    imin = int(np.argmax(q[:jmin]))
    imax = int(np.argmin(q[:jmax]))
    assert n >= 2
    return float(dmin[jmin - 1]), (imin, jmin), float(dmax[jmax - 1]), (imax, jmax)


def theta_report(curve: Curve, fr: CurveFrame | None = None) -> ThetaReport:
    """Extremes of the local total curvature theta(p, q) over vertex pairs.

    Closed curves use every ordered pair; theta(i, j) for j < i wraps through
    vertex 0.  Open curves use pairs i <= j.  The diagonal theta(i, i) = 0 is
    included in the infimum, and on closed curves the supremum includes the
    full loop, so theta_sup = total turning - theta_min.
    """
    fr = fr if fr is not None else frame(curve)
    q = cumulative_turning(fr)
    dmin, amin, dmax, amax = _pair_difference_extremes(q)
    if not curve.closed:
        if dmin < 0:
            t_min, arg = dmin, amin
        else:
            t_min, arg = 0.0, (0, 0)
        return ThetaReport(t_min, max(0.0, dmax), arg, None)
    total = fr.total_turning
    wrap_min = total - dmax  # theta(j, i) for the pair realising dmax
    candidates = [(0.0, (0, 0)), (dmin, amin), (wrap_min, (amax[1], amax[0]))]
    t_min, arg = min(candidates, key=lambda c: (c[0], c[1]))
    t_sup = max(total, dmax, total - dmin)
    return ThetaReport(t_min, t_sup, arg, abs(t_sup - (TWO_PI - t_min)))


def theta_extremes(curve: Curve, fr: CurveFrame | None = None) -> tuple[float, float]:
    r = theta_report(curve, fr)
    return r.theta_min, r.theta_sup


def conserved_interpolant(gamma: float, A: float, L: float) -> float:
    return (1.0 - gamma) * A + gamma * L * L / (4.0 * math.pi)


def isoperimetric_deficit(L: float, A: float) -> float:
    return L * L / (4.0 * math.pi) - A


def gage_residual(curve: ClosedCurve, fr: CurveFrame | None = None) -> float:
    """int kappa^2 ds - pi L / A on a convex polygon.

    Curvature here is that of the circle tangent to both edges at a vertex,
    2 tan(phi/2) / ds, which makes the residual nonnegative on regular
    polygons (with the plain turning-angle curvature it is slightly negative).
    """
    fr = fr if fr is not None else frame(curve)
    if not is_convex(curve, fr):
        raise NotConvexError("gage residual needs a convex curve")
    k = 2.0 * np.tan(0.5 * fr.turning) / fr.dual
    energy = float(np.sum(k * k * fr.dual))
    return energy - math.pi * fr.length / enclosed_area(curve)


def bonnesen_gap(curve: ClosedCurve, fr: CurveFrame | None = None,
                 r: tuple[float, float] | None = None) -> float:
    """L^2/A - 4 pi - pi^2 (r_circ - r_in)^2 / A on a convex curve."""
    fr = fr if fr is not None else frame(curve)
    r_in, r_circ = r if r is not None else radii(curve, fr)
    A = enclosed_area(curve)
    L = fr.length
    return L * L / A - 4 * math.pi - math.pi ** 2 * (r_circ - r_in) ** 2 / A


@dataclass
class CertificateReport:
    closed: bool
    n: int
    length: float
    ratio_kind: str
    ratio_min: float
    ratio_argmin: tuple
    theta_min: float
    theta_sup: float
    theta_argmin: tuple
    theta_identity_defect: float | None
    violates_theta_condition: bool
    area: float | None = None
    deficit: float | None = None
    conserved_interp: float | None = None
    gamma: float = 0.0
    convex: bool | None = None
    gage_residual: float | None = None
    bonnesen_gap: float | None = None
    r_in: float | None = None
    r_circ: float | None = None
    alpha: float | None = None
    truncated: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ratio_argmin"] = list(self.ratio_argmin)
        d["theta_argmin"] = list(self.theta_argmin)
        return d


def certificate_report(curve: Curve, gamma: float = 0.0) -> CertificateReport:
    """All static certificates of one simple curve.

    Raises ``CurveError`` naming the crossing edges if the curve is not simple.
    """
    crossing = find_crossing(curve)
    if crossing is not None:
        raise CurveError(
            f"curve is not simple: edges {crossing.edge_i} and {crossing.edge_j} "
            f"cross at ({crossing.point[0]:.6g}, {crossing.point[1]:.6g})"
        )
    fr = frame(curve)
    ratio = ratio_min(curve, fr)
    th = theta_report(curve, fr)
    rep = CertificateReport(
        closed=curve.closed,
        n=len(curve),
        length=fr.length,
        ratio_kind=ratio.kind,
        ratio_min=ratio.min_value,
        ratio_argmin=ratio.argmin,
        theta_min=th.theta_min,
        theta_sup=th.theta_sup,
        theta_argmin=th.argmin,
        theta_identity_defect=th.identity_defect,
        violates_theta_condition=th.theta_min < -math.pi,
        gamma=gamma,
    )
    if not curve.closed:
        rep.alpha = curve.alpha
        rep.truncated = True
        return rep
    A = enclosed_area(curve)
    rep.area = A
    rep.deficit = isoperimetric_deficit(fr.length, A)
    rep.conserved_interp = conserved_interpolant(gamma, A, fr.length)
    rep.convex = is_convex(curve, fr)
    if rep.convex:
        r = radii(curve, fr)
        rep.r_in, rep.r_circ = r
        rep.gage_residual = gage_residual(curve, fr)
        rep.bonnesen_gap = bonnesen_gap(curve, fr, r)
    return rep


# --- trajectory diagnostics ----------------------------------------------------


@dataclass
class ConvergenceReport:
    R_hat: float
    convex_onset: float | None
    convexity_persists: bool
    kappa_dev: np.ndarray = field(repr=False)  # max |kappa R_hat - 1| per record
    h_dev: np.ndarray = field(repr=False)  # |h R_hat - 1|
    kappa_ratio: np.ndarray = field(repr=False)  # kappa_max / kappa_min - 1
    deficit: np.ndarray = field(repr=False)
    excess: np.ndarray = field(repr=False)  # deficit above the regular-polygon floor
    rate: float | None = None
    implied_beta: float | None = None
    fit_window: tuple | None = None

    @property
    def final(self) -> dict:
        return {
            "R_hat": self.R_hat,
            "kappa_dev": float(self.kappa_dev[-1]),
            "h_dev": float(self.h_dev[-1]),
            "kappa_ratio": float(self.kappa_ratio[-1]),
            "deficit": float(self.deficit[-1]),
            "rate": self.rate,
            "implied_beta": self.implied_beta,
            "convex_onset": self.convex_onset,
        }


def convergence_report(traj, fit_fraction: float = 0.6, convex_tol: float = 1e-9,
                       floor_rel: float = 1e-9) -> ConvergenceReport:
    """Convergence-to-a-circle diagnostics for a closed-curve trajectory.

    R_hat is L/2pi at the last record.  The deficit L^2/4pi - A is compared
    against the deficit of the regular polygon with the same length and vertex
    count (the discrete circle) and the excess is fitted log-linearly over
    the final ``fit_fraction`` of the convex phase, ignoring samples at the
    rounding floor.  The implied beta solves rate = 2 beta / R_hat^2.
    """
    if not traj.closed:
        raise CurveError("convergence diagnostics need a closed-curve trajectory")
    t = traj.column("t")
    L = traj.column("L")
    A = traj.column("A")
    h = traj.column("h")
    kmin = traj.column("kappa_min")
    kmax = traj.column("kappa_max")
    R_hat = float(L[-1] / TWO_PI)
    kappa_dev = np.array([np.max(np.abs(frame(c).kappa * R_hat - 1.0)) for c in traj.curves()])
    h_dev = np.abs(h * R_hat - 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa_ratio = np.where(kmin > 0, kmax / kmin - 1.0, np.inf)
    deficit = L * L / (4 * math.pi) - A
    sizes = np.array([len(c) for c in traj.curves()])
    excess = deficit - regular_polygon_deficit(L, sizes) if sizes.size else deficit

    convex = kmin >= -convex_tol
    onset_idx = int(np.argmax(convex)) if convex.any() else None
    onset = float(t[onset_idx]) if onset_idx is not None else None
    persists = bool(onset_idx is not None and convex[onset_idx:].all())
    rep = ConvergenceReport(R_hat, onset, persists, kappa_dev, h_dev, kappa_ratio, deficit, excess)
    if onset_idx is None:
        return rep
    usable = np.flatnonzero(convex & (np.arange(len(t)) >= onset_idx) & (excess > floor_rel * A))
    if usable.size < 5:
        return rep
    # stop at the first sample that reaches the floor
    gaps = np.flatnonzero(np.diff(usable) != 1)
    usable = usable[: gaps[0] + 1] if gaps.size else usable
    start = usable[0] + int(math.floor((1 - fit_fraction) * (usable[-1] - usable[0])))
    idx = np.arange(start, usable[-1] + 1)
    if idx.size < 5:
        return rep
    slope, _ = np.polyfit(t[idx], np.log(excess[idx]), 1)
    rep.rate = float(-slope)
    rep.implied_beta = float(-slope * R_hat ** 2 / 2)
    rep.fit_window = (float(t[idx[0]]), float(t[idx[-1]]))
    return rep
