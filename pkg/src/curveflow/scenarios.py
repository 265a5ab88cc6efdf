"""Deterministic initial curves for experiments and tests."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .geometry import ClosedCurve, CurveError, OpenCurve, find_crossing, frame
from .monitors import theta_extremes

_DENSE = 64  # quadrature points per output vertex when inverting arclength


class ScenarioError(CurveError):
    pass


# --- piecewise paths of segments and circular arcs ---------------------------


class _Segment:
    def __init__(self, p0, p1):
        self.p0 = np.asarray(p0, float)
        self.p1 = np.asarray(p1, float)
        d = self.p1 - self.p0
        self.length = float(np.hypot(*d))
        self.dir = d / self.length if self.length > 0 else d

    def at(self, s):
        return self.p0 + np.multiply.outer(s, self.dir)


class _Arc:
    """Circular arc from angle a0 to a1; a1 > a0 runs counterclockwise."""

    def __init__(self, center, radius, a0, a1):
        self.c = np.asarray(center, float)
        self.r = float(radius)
        self.a0 = float(a0)
        self.sweep = float(a1 - a0)
        self.length = self.r * abs(self.sweep)

    def at(self, s):
        a = self.a0 + math.copysign(1.0, self.sweep) * np.asarray(s) / self.r
        return self.c + self.r * np.column_stack((np.cos(a), np.sin(a)))


def _sample_path(pieces, n: int, closed: bool) -> np.ndarray:
    pieces = [p for p in pieces if p.length > 1e-14]
    lengths = np.array([p.length for p in pieces])
    bounds = np.concatenate(([0.0], np.cumsum(lengths)))
    total = bounds[-1]
    s = np.arange(n) * total / n if closed else np.linspace(0.0, total, n)
    idx = np.clip(np.searchsorted(bounds, s, side="right") - 1, 0, len(pieces) - 1)
    out = np.empty((n, 2))
    for k, piece in enumerate(pieces):
        sel = idx == k
        if np.any(sel):
            out[sel] = piece.at(s[sel] - bounds[k])
    return out


def _sample_by_arclength(curve_fn, t0: float, t1: float, n: int, closed: bool) -> np.ndarray:
    """Sample a parametrised curve at (near) equal arclength spacing.

    ``curve_fn`` maps parameter values to points.  Arclength is tabulated on a
    dense grid and inverted by interpolation.
    """
    t = np.linspace(t0, t1, _DENSE * n + 1)
    pts = curve_fn(t)
    speed_pts = np.hypot(*np.gradient(pts, t, axis=0).T)
    s = cumulative_trapezoid(speed_pts, t, initial=0.0)
    targets = np.arange(n) * s[-1] / n if closed else np.linspace(0.0, s[-1], n)
    tk = np.interp(targets, s, t)
    return curve_fn(tk)


# --- closed scenarios --------------------------------------------------------


def make_circle(R: float = 1.0, N: int = 256, center=(0.0, 0.0)) -> ClosedCurve:
    if R <= 0:
        raise ScenarioError("radius must be positive")
    a = 2 * math.pi * np.arange(N) / N
    return ClosedCurve(np.column_stack((center[0] + R * np.cos(a), center[1] + R * np.sin(a))))


def make_ellipse(a: float = 2.0, b: float = 1.0, N: int = 512) -> ClosedCurve:
    if a <= 0 or b <= 0:
        raise ScenarioError("semi-axes must be positive")
    if a == b:
        return make_circle(a, N)

    def fn(t):
        return np.column_stack((a * np.cos(t), b * np.sin(t)))

    return ClosedCurve(_sample_by_arclength(fn, 0.0, 2 * math.pi, N, closed=True))


def make_wavy(amplitude: float = 0.3, petals: int = 3, N: int = 512) -> ClosedCurve:
    """Polar curve r(phi) = 1 + amplitude * cos(petals * phi).

    Any such curve with amplitude < 1 is star-shaped about the origin and
    hence simple.  It is convex roughly when amplitude * (petals**2 - 1) < 1.
    """
    if not 0 <= amplitude < 1:
        raise ScenarioError("amplitude must lie in [0, 1) for a simple polar curve")
    if amplitude == 0:
        return make_circle(1.0, N)

    def fn(t):
        r = 1 + amplitude * np.cos(petals * t)
        return np.column_stack((r * np.cos(t), r * np.sin(t)))

    curve = ClosedCurve(_sample_by_arclength(fn, 0.0, 2 * math.pi, N, closed=True))
    if find_crossing(curve) is not None:
        raise ScenarioError("sampled wavy curve is not simple; increase N")
    return curve


def cexample_pieces(neck_gap: float, lobe_size: float, fillet: float | None = None,
                    hole: float = 0.25):
    """Slit annulus whose slit faces are flat and face each other.

    Outer radius ``lobe_size``, inner radius ``hole * lobe_size``; a vertical
    slit of width ``neck_gap`` is cut through the top.  The slit faces carry
    the neck points: flat, zero curvature, normals -e1 (right face) and +e1
    (left face).  With ``neck_gap`` equal to the hole diameter the slit is as
    wide as the hole, which becomes a U whose bottom is a half circle.
    """
    r_out = float(lobe_size)
    r_in = hole * r_out
    rf = 0.05 * r_out if fillet is None else float(fillet)
    c = 0.5 * neck_gap
    if neck_gap <= 0:
        raise ScenarioError("neck gap must be positive")
    if c > r_in * (1 + 1e-12):
        raise ScenarioError("neck gap cannot exceed the inner diameter")
    c = min(c, r_in)
    y_of = math.sqrt((r_out - rf) ** 2 - (c + rf) ** 2)
    y_if = math.sqrt(max((r_in + rf) ** 2 - (c + rf) ** 2, 0.0))
    if y_of <= y_if:
        raise ScenarioError("fillets do not fit on the slit faces")
    phi_r = math.atan2(y_of, c + rf)
    a = math.atan2(y_if, c + rf)
    C, Cl = (c + rf, y_of), (-(c + rf), y_of)
    D, Dl = (c + rf, y_if), (-(c + rf), y_if)
    return [
        _Arc((0, 0), r_out, -math.pi / 2, phi_r),
        _Arc(C, rf, phi_r, math.pi),
        _Segment((c, y_of), (c, y_if)),
        _Arc(D, rf, math.pi, math.pi + a),
        _Arc((0, 0), r_in, a, -math.pi - a),
        _Arc(Dl, rf, -a, 0.0),
        _Segment((-c, y_if), (-c, y_of)),
        _Arc(Cl, rf, 0.0, math.pi - phi_r),
        _Arc((0, 0), r_out, math.pi - phi_r, 1.5 * math.pi),
    ]


def make_cexample(neck_gap: float = 0.02, lobe_size: float = 2.0, N: int = 1024,
                  require_violation: bool | None = None, hole: float = 0.25) -> ClosedCurve:
    """Embedded curve whose local total curvature dips below -pi (for narrow necks).

    The curve is symmetric about the x2-axis.  For a neck narrower than the
    hole the minimum of theta is below -pi and this is certified on
    construction; pass ``require_violation=False`` to skip that check.
    """
    pts = _sample_path(cexample_pieces(neck_gap, lobe_size, hole=hole), N, closed=True)
    curve = ClosedCurve(pts)
    if find_crossing(curve) is not None:
        raise ScenarioError("counterexample curve self-intersects at construction")
    if require_violation is None:
        require_violation = neck_gap < 2 * hole * lobe_size
    if require_violation:
        t_min, _ = theta_extremes(curve)
        if not t_min < -math.pi:
            raise ScenarioError(f"expected theta_min < -pi, got {t_min / math.pi:.4f} pi")
    return curve


def neck_points(curve: ClosedCurve) -> tuple[int, int]:
    """Indices of the right (p) and left (q) neck points: flat, normals -e1 and +e1."""
    fr = frame(curve)
    pts = curve.vertices
    top = pts[:, 1] > 0
    flat = np.abs(fr.kappa) < 1e-9
    right = np.flatnonzero(top & flat & (fr.nu[:, 0] < -1 + 1e-9))
    left = np.flatnonzero(top & flat & (fr.nu[:, 0] > 1 - 1e-9))
    if right.size == 0 or left.size == 0:
        raise ScenarioError("no flat neck points found")
    p = int(right[np.argmin(np.abs(pts[right, 1] - np.median(pts[right, 1])))])
    q = int(left[np.argmin(np.abs(pts[left, 1] - np.median(pts[left, 1])))])
    return p, q


# --- open scenarios ----------------------------------------------------------


def make_grim_reaper(sigma_max: float = 1.5, N: int = 512) -> OpenCurve:
    """Graph of -log cos(sigma) on |sigma| <= sigma_max, equally spaced in arclength.

    The arclength from the vertex is asinh(tan sigma), which inverts in closed
    form.  Total curvature is pi and both ends approach the direction of e2,
    so the curve is outside the |alpha| < pi window; axis is -e2 so that the
    first end tangent approaches the axis direction.
    """
    if not 0 < sigma_max < math.pi / 2:
        raise ScenarioError("sigma_max must lie in (0, pi/2)")
    smax = math.asinh(math.tan(sigma_max))
    s = np.linspace(-smax, smax, N)
    pts = np.column_stack((np.arctan(np.sinh(s)), np.log(np.cosh(s))))
    return OpenCurve(pts, axis=(0.0, -1.0), alpha=math.pi, asymptotic=False)


def make_open_vee(alpha: float = math.pi / 2, N: int = 256, truncation: float = 4.0,
                  corner_radius: float = 0.5) -> OpenCurve:
    """Two straight arms joined by a circular arc of total turning ``alpha``.

    Axis is e2.  The first arm heads at angle pi - alpha/2 from e1 and the last
    at pi + alpha/2, which are the asymptotic angles (pi -+ alpha)/2 against
    the axis.
    """
    if not -math.pi < alpha < math.pi:
        raise ScenarioError("alpha must lie in (-pi, pi)")
    phi0 = math.pi - alpha / 2
    d0 = np.array([math.cos(phi0), math.sin(phi0)])
    start = -truncation * d0
    if alpha == 0:
        pieces = [_Segment(start, start + (2 * truncation) * d0)]
    else:
        sign = math.copysign(1.0, alpha)
        left = np.array([-d0[1], d0[0]])
        center = sign * corner_radius * left  # arc starts at the origin
        a0 = math.atan2(-center[1], -center[0])
        arc = _Arc(center, corner_radius, a0, a0 + alpha)
        end_arc = arc.at(np.array([arc.length]))[0]
        phi1 = phi0 + alpha
        d1 = np.array([math.cos(phi1), math.sin(phi1)])
        pieces = [
            _Segment(start, (0.0, 0.0)),
            arc,
            _Segment(end_arc, end_arc + truncation * d1),
        ]
    pts = _sample_path(pieces, N, closed=False)
    return OpenCurve(pts, axis=(0.0, 1.0), alpha=alpha)


def make_straight_line(N: int = 64, spacing: float = 0.125) -> OpenCurve:
    """Horizontal line through the origin with dyadic spacing (exact arithmetic)."""
    x = (np.arange(N) - N // 2) * spacing
    return OpenCurve(np.column_stack((x, np.zeros(N))), axis=(0.0, 1.0), alpha=0.0)


def make_square(N: int = 64, side: float = 1.0) -> ClosedCurve:
    """Axis-aligned square with corners at vertices (N divisible by 4)."""
    if N % 4:
        raise ScenarioError("square needs N divisible by 4")
    k = N // 4
    t = np.arange(k) / k * side
    z = np.zeros(k)
    pts = np.vstack((
        np.column_stack((t, z)),
        np.column_stack((z + side, t)),
        np.column_stack((side - t, z + side)),
        np.column_stack((z, side - t)),
    ))
    return ClosedCurve(pts)


# --- registry ------------------------------------------------------------------


@dataclass
class ScenarioSpec:
    name: str
    params: dict = field(default_factory=dict)
    N: int | None = None

    def build(self):
        try:
            maker = SCENARIOS[self.name]
        except KeyError:
            raise ScenarioError(f"unknown scenario {self.name!r}; known: {', '.join(SCENARIOS)}") from None
        kwargs = dict(self.params)
        if self.N is not None:
            kwargs["N"] = self.N
        return maker(**kwargs)


SCENARIOS = {
    "circle": make_circle,
    "ellipse": make_ellipse,
    "wavy": make_wavy,
    "cexample": make_cexample,
    "grim_reaper": make_grim_reaper,
    "vee": make_open_vee,
    "line": make_straight_line,
    "square": make_square,
}
