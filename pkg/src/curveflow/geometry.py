"""Discrete embedded planar curves and the geometric quantities built on them.

Curves are ordered vertex arrays.  Curvature lives on vertices as the turning
angle between the two adjacent edges divided by the vertex-centred length
(half the sum of the adjacent edges), so that the discrete total curvature is
exactly the sum of turning angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import linprog
from scipy.spatial import cKDTree

TWO_PI = 2.0 * math.pi

MIN_CLOSED_VERTICES = 16
MIN_OPEN_VERTICES = 32
GAP_TOL = 1e-12
ANGLE_TOL = 1e-6
CONVEX_TOL = 1e-9


class CurveError(ValueError):
    pass


class DegenerateEdgeError(CurveError):
    def __init__(self, index: int, length: float):
        super().__init__(f"edge {index} has degenerate length {length:.3e}")
        self.index = index
        self.length = length


class OrientationError(CurveError):
    pass


class NotConvexError(CurveError):
    pass


def _points(vertices) -> np.ndarray:
    pts = np.array(vertices, dtype=float, copy=True)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise CurveError(f"vertices must have shape (N, 2), got {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise CurveError("vertices contain non-finite values")
    pts.setflags(write=False)
    return pts


def signed_area(vertices: np.ndarray) -> float:
    """Shoelace area of the closed polygon through ``vertices``."""
    x, y = vertices[:, 0], vertices[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return 0.5 * float(np.sum(x * yn - xn * y))


def _extent(vertices: np.ndarray) -> float:
    return float(np.hypot(*np.ptp(vertices, axis=0)))


def _check_gaps(edges: np.ndarray, scale: float) -> None:
    lens = np.hypot(edges[:, 0], edges[:, 1])
    bad = np.flatnonzero(lens < GAP_TOL * scale)
    if bad.size:
        raise DegenerateEdgeError(int(bad[0]), float(lens[bad[0]]))


@dataclass(frozen=True, eq=False)
class ClosedCurve:
    """A closed polygon, positively oriented.

    Vertices given clockwise are reversed on construction.  Pass
    ``orient=False`` to keep the given order (used inside the flow, where a
    curve that has crossed itself must not be silently re-oriented).
    """

    vertices: np.ndarray
    orient: bool = field(default=True, repr=False)

    def __post_init__(self):
        pts = _points(self.vertices)
        if len(pts) < MIN_CLOSED_VERTICES:
            raise CurveError(
                f"closed curve needs at least {MIN_CLOSED_VERTICES} vertices, got {len(pts)}"
            )
        _check_gaps(np.roll(pts, -1, axis=0) - pts, _extent(pts))
        if self.orient and signed_area(pts) < 0:
            pts = _points(pts[::-1])
        object.__setattr__(self, "vertices", pts)

    closed = True

    def __len__(self):
        return len(self.vertices)

    def with_vertices(self, vertices) -> "ClosedCurve":
        return ClosedCurve(vertices, orient=False)

    def scaled(self, factor: float) -> "ClosedCurve":
        return ClosedCurve(self.vertices * factor)


@dataclass(frozen=True, eq=False)
class OpenCurve:
    """Truncation of a curve asymptotic to two lines.

    ``axis`` is the unit vector v and ``alpha`` the total curvature; the end
    tangents make angles (pi - alpha)/2 and (pi + alpha)/2 with v.  Truncated
    exact solutions whose ends only approach those directions (the grim
    reaper) are built with ``asymptotic=False``, which skips the end-angle
    check and marks the curve as lying outside the |alpha| < pi window when
    applicable.
    """

    vertices: np.ndarray
    axis: tuple = (0.0, 1.0)
    alpha: float = 0.0
    asymptotic: bool = True

    def __post_init__(self):
        pts = _points(self.vertices)
        if len(pts) < MIN_OPEN_VERTICES:
            raise CurveError(
                f"open curve needs at least {MIN_OPEN_VERTICES} vertices, got {len(pts)}"
            )
        _check_gaps(np.diff(pts, axis=0), _extent(pts))
        v = np.asarray(self.axis, dtype=float)
        norm = float(np.hypot(*v))
        if norm == 0:
            raise CurveError("axis must be non-zero")
        object.__setattr__(self, "axis", (float(v[0] / norm), float(v[1] / norm)))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "vertices", pts)
        if self.asymptotic:
            if not -math.pi < self.alpha < math.pi:
                raise CurveError(f"alpha must lie in (-pi, pi), got {self.alpha}")
            start, end = self.end_angles()
            want = ((math.pi - self.alpha) / 2, (math.pi + self.alpha) / 2)
            if abs(start - want[0]) > ANGLE_TOL or abs(end - want[1]) > ANGLE_TOL:
                raise CurveError(
                    f"end tangent angles {start:.8f}, {end:.8f} do not match "
                    f"asymptotic angles {want[0]:.8f}, {want[1]:.8f}"
                )

    closed = False

    def __len__(self):
        return len(self.vertices)

    @property
    def in_alpha_window(self) -> bool:
        return -math.pi < self.alpha < math.pi

    def end_tangents(self) -> tuple[np.ndarray, np.ndarray]:
        e0 = self.vertices[1] - self.vertices[0]
        e1 = self.vertices[-1] - self.vertices[-2]
        return e0 / np.hypot(*e0), e1 / np.hypot(*e1)

    def end_angles(self) -> tuple[float, float]:
        """Unsigned angles between the end tangents and the axis."""
        v = np.asarray(self.axis)
        t0, t1 = self.end_tangents()
        a0 = math.acos(max(-1.0, min(1.0, float(t0 @ v))))
        a1 = math.acos(max(-1.0, min(1.0, float(t1 @ v))))
        return a0, a1

    def with_vertices(self, vertices) -> "OpenCurve":
        return OpenCurve(vertices, self.axis, self.alpha, asymptotic=False)

    def scaled(self, factor: float) -> "OpenCurve":
        return OpenCurve(self.vertices * factor, self.axis, self.alpha, self.asymptotic)


Curve = ClosedCurve | OpenCurve


@dataclass(frozen=True, eq=False)
class CurveFrame:
    s: np.ndarray  # arclength at each vertex, s[0] = 0
    ds: np.ndarray  # edge lengths; edge i joins vertex i and i+1
    tau: np.ndarray
    nu: np.ndarray
    kappa: np.ndarray
    turning: np.ndarray  # exterior angle at each vertex
    dual: np.ndarray  # vertex-centred length element
    length: float
    closed: bool

    @property
    def total_turning(self) -> float:
        return float(np.sum(self.turning))


def _edges(curve: Curve) -> np.ndarray:
    pts = curve.vertices
    if curve.closed:
        return np.roll(pts, -1, axis=0) - pts
    return np.diff(pts, axis=0)


def frame(curve: Curve) -> CurveFrame:
    pts = curve.vertices
    edges = _edges(curve)
    ds = np.hypot(edges[:, 0], edges[:, 1])
    tol = GAP_TOL * _extent(pts)
    bad = np.flatnonzero(ds <= tol)
    if bad.size:
        raise DegenerateEdgeError(int(bad[0]), float(ds[bad[0]]))
    u = edges / ds[:, None]

    if curve.closed:
        u_prev = np.roll(u, 1, axis=0)
        ds_prev = np.roll(ds, 1)
        cross = u_prev[:, 0] * u[:, 1] - u_prev[:, 1] * u[:, 0]
        dot = np.einsum("ij,ij->i", u_prev, u)
        turning = np.arctan2(cross, dot)
        dual = 0.5 * (ds_prev + ds)
        t = u_prev + u
        s = np.concatenate(([0.0], np.cumsum(ds[:-1])))
    else:
        n = len(pts)
        turning = np.zeros(n)
        cross = u[:-1, 0] * u[1:, 1] - u[:-1, 1] * u[1:, 0]
        dot = np.einsum("ij,ij->i", u[:-1], u[1:])
        turning[1:-1] = np.arctan2(cross, dot)
        dual = np.empty(n)
        dual[0] = 0.5 * ds[0]
        dual[-1] = 0.5 * ds[-1]
        dual[1:-1] = 0.5 * (ds[:-1] + ds[1:])
        t = np.empty_like(pts)
        t[0] = u[0]
        t[-1] = u[-1]
        t[1:-1] = u[:-1] + u[1:]
        s = np.concatenate(([0.0], np.cumsum(ds)))

    tn = np.hypot(t[:, 0], t[:, 1])
    cusp = tn < 1e-12
    if np.any(cusp):
        # reversal: fall back to the incoming edge direction
        t[cusp] = np.roll(u, 1, axis=0)[cusp] if curve.closed else u[np.clip(np.flatnonzero(cusp) - 1, 0, None)]
        tn[cusp] = 1.0
    tau = t / tn[:, None]
    nu = np.column_stack((tau[:, 1], -tau[:, 0]))
    kappa = turning / dual
    return CurveFrame(
        s=s,
        ds=ds,
        tau=tau,
        nu=nu,
        kappa=kappa,
        turning=turning,
        dual=dual,
        length=float(np.sum(ds)),
        closed=curve.closed,
    )


def length(curve: Curve) -> float:
    edges = _edges(curve)
    return float(np.sum(np.hypot(edges[:, 0], edges[:, 1])))


def enclosed_area(curve: ClosedCurve) -> float:
    a = signed_area(curve.vertices)
    if a <= 0:
        raise OrientationError(f"signed area {a:.6g} is not positive")
    return a


def cumulative_turning(fr: CurveFrame) -> np.ndarray:
    """Unwrapped tangent angle at each vertex relative to the tangent at vertex 0.

    theta(i, j) = q[j] - q[i] for i <= j, where each endpoint vertex
    contributes half of its turning angle.
    """
    phi = fr.turning
    before = np.concatenate(([0.0], np.cumsum(phi[:-1])))
    return before + 0.5 * phi - 0.5 * phi[0]


def turning_angle(curve: Curve, i: int, j: int, fr: CurveFrame | None = None) -> float:
    """Local total curvature from vertex i to vertex j along the parametrisation.

    On closed curves the integral wraps past vertex 0 when j < i, so that
    theta(i, j) + theta(j, i) equals the total turning.  On open curves
    theta(j, i) = -theta(i, j).  theta(i, i) = 0.
    """
    n = len(curve)
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"vertex index out of range: ({i}, {j}) for {n} vertices")
    if i == j:
        return 0.0
    fr = fr if fr is not None else frame(curve)
    q = cumulative_turning(fr)
    if curve.closed and j < i:
        return fr.total_turning - float(q[i] - q[j])
    return float(q[j] - q[i])


def angle_of(tau) -> float:
    """Tangent angle in [0, 2pi) measured from the x1-axis."""
    c = max(-1.0, min(1.0, float(tau[0])))
    if tau[1] >= 0:
        return math.acos(c)
    return TWO_PI - math.acos(c)


def tangent_angle(curve: Curve, i: int, fr: CurveFrame | None = None) -> float:
    fr = fr if fr is not None else frame(curve)
    return angle_of(fr.tau[i])


def is_convex(curve: ClosedCurve, fr: CurveFrame | None = None) -> bool:
    fr = fr if fr is not None else frame(curve)
    return bool(np.all(fr.turning >= -CONVEX_TOL))


# --- resampling -------------------------------------------------------------


def _parametrisation(pts: np.ndarray, closed: bool, method: str):
    if closed:
        ext = np.vstack((pts, pts[:1]))
    else:
        ext = pts
    seg = np.hypot(*np.diff(ext, axis=0).T)
    s = np.concatenate(([0.0], np.cumsum(seg)))
    total = float(s[-1])
    if method == "linear":
        def at(u):
            u = np.mod(u, total) if closed else u
            return np.column_stack((np.interp(u, s, ext[:, 0]), np.interp(u, s, ext[:, 1])))
    elif method == "spline":
        spline = CubicSpline(s, ext, bc_type="periodic" if closed else "not-a-knot")

        def at(u):
            return spline(np.mod(u, total) if closed else u)
    else:
        raise ValueError(f"unknown resampling method {method!r}")
    return at, total


def resample_uniform(curve: Curve, n: int, method: str = "linear", tol: float = 1e-13) -> Curve:
    """Resample to ``n`` vertices with equal consecutive chord lengths.

    New vertices lie on the old polygon (``linear``) or on the cubic spline
    through the old vertices (``spline``).  Closed curves keep vertex 0 in
    place; open curves keep both endpoints.  Spacing is refined by rescaling
    parameter increments against measured chords until the chords agree to
    ``tol`` relative.
    """
    minimum = MIN_CLOSED_VERTICES if curve.closed else MIN_OPEN_VERTICES
    if n < minimum:
        raise CurveError(f"need at least {minimum} vertices, got {n}")
    at, total = _parametrisation(curve.vertices, curve.closed, method)
    segments = n if curve.closed else n - 1
    du = np.full(segments, total / segments)
    for _ in range(100):
        u = np.concatenate(([0.0], np.cumsum(du)))
        u[-1] = total
        pts = at(u)
        chord = np.hypot(*np.diff(pts, axis=0).T)
        mean = chord.mean()
        if np.max(np.abs(chord / mean - 1.0)) < tol:
            break
        du = du * (mean / chord)
        du *= total / du.sum()
    verts = pts[:-1] if curve.closed else pts
    if not curve.closed:
        verts = verts.copy()
        verts[0] = curve.vertices[0]
        verts[-1] = curve.vertices[-1]
    return curve.with_vertices(verts)


# --- self-intersection ------------------------------------------------------


class Crossing(NamedTuple):
    edge_i: int
    edge_j: int
    point: tuple


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _on_segment(ax, ay, bx, by, cx, cy):
    return (
        (np.minimum(ax, bx) <= cx) & (cx <= np.maximum(ax, bx))
        & (np.minimum(ay, by) <= cy) & (cy <= np.maximum(ay, by))
    )


def _segments_intersect(a, b, c, d) -> np.ndarray:
    ax, ay, bx, by = a[:, 0], a[:, 1], b[:, 0], b[:, 1]
    cx, cy, dx, dy = c[:, 0], c[:, 1], d[:, 0], d[:, 1]
    o1 = _orient(ax, ay, bx, by, cx, cy)
    o2 = _orient(ax, ay, bx, by, dx, dy)
    o3 = _orient(cx, cy, dx, dy, ax, ay)
    o4 = _orient(cx, cy, dx, dy, bx, by)
    proper = (np.sign(o1) * np.sign(o2) < 0) & (np.sign(o3) * np.sign(o4) < 0)
    touch = (
        ((o1 == 0) & _on_segment(ax, ay, bx, by, cx, cy))
        | ((o2 == 0) & _on_segment(ax, ay, bx, by, dx, dy))
        | ((o3 == 0) & _on_segment(cx, cy, dx, dy, ax, ay))
        | ((o4 == 0) & _on_segment(cx, cy, dx, dy, bx, by))
    )
    return proper | touch


def _intersection_point(a, b, c, d) -> tuple:
    r = b - a
    s = d - c
    denom = r[0] * s[1] - r[1] * s[0]
    if denom == 0:
        # collinear overlap: report the first overlapping endpoint
        for p in (c, d, a, b):
            if _on_segment(*a, *b, *p) and _on_segment(*c, *d, *p):
                return (float(p[0]), float(p[1]))
        return (float(c[0]), float(c[1]))
    t = ((c[0] - a[0]) * s[1] - (c[1] - a[1]) * s[0]) / denom
    p = a + t * r
    return (float(p[0]), float(p[1]))


def find_crossing(curve: Curve) -> Crossing | None:
    """First pair of non-adjacent intersecting edges in lexicographic order.

    Candidate pairs come from a k-d tree over edge midpoints: two segments can
    only meet if their midpoints are within the longest edge length of each
    other, so the prefilter is exact.
    """
    pts = curve.vertices
    if curve.closed:
        start, end = pts, np.roll(pts, -1, axis=0)
    else:
        start, end = pts[:-1], pts[1:]
    m = len(start)
    lens = np.hypot(*(end - start).T)
    mid = 0.5 * (start + end)
    radius = float(lens.max()) * (1 + 1e-9)
    pairs = cKDTree(mid).query_pairs(radius, output_type="ndarray")
    if len(pairs) == 0:
        return None
    pairs = np.sort(pairs, axis=1)
    i, j = pairs[:, 0], pairs[:, 1]
    adjacent = (j - i == 1)
    if curve.closed:
        adjacent |= (i == 0) & (j == m - 1)
    i, j = i[~adjacent], j[~adjacent]
    if i.size == 0:
        return None
    hit = _segments_intersect(start[i], end[i], start[j], end[j])
    if not np.any(hit):
        return None
    hi, hj = i[hit], j[hit]
    order = np.lexsort((hj, hi))
    a, b = int(hi[order[0]]), int(hj[order[0]])
    point = _intersection_point(start[a], end[a], start[b], end[b])
    return Crossing(a, b, point)


def is_simple(curve: Curve) -> bool:
    return find_crossing(curve) is None


# --- radii --------------------------------------------------------------------


def _circle_two(a, b):
    cx, cy = (a[0] + b[0]) / 2, (a[1] + b[1]) / 2
    return cx, cy, max(math.hypot(a[0] - cx, a[1] - cy), math.hypot(b[0] - cx, b[1] - cy))


def _circle_three(a, b, c):
    ox = (min(a[0], b[0], c[0]) + max(a[0], b[0], c[0])) / 2
    oy = (min(a[1], b[1], c[1]) + max(a[1], b[1], c[1])) / 2
    ax, ay = a[0] - ox, a[1] - oy
    bx, by = b[0] - ox, b[1] - oy
    cx, cy = c[0] - ox, c[1] - oy
    d = (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by)) * 2
    if d == 0:
        return None
    x = ox + ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) + (cx * cx + cy * cy) * (ay - by)) / d
    y = oy + ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) + (cx * cx + cy * cy) * (bx - ax)) / d
    r = max(math.hypot(x - p[0], y - p[1]) for p in (a, b, c))
    return x, y, r


def _inside(circle, p, eps=1e-14):
    return circle is not None and math.hypot(p[0] - circle[0], p[1] - circle[1]) <= circle[2] * (1 + eps)


def min_enclosing_circle(points: np.ndarray) -> tuple[float, float, float]:
    """Smallest circle containing all points (incremental, expected linear time).

    Points are visited in a fixed pseudo-random order so results are
    reproducible.
    """
    order = np.random.default_rng(0).permutation(len(points))
    pts = [tuple(map(float, points[k])) for k in order]
    c = None
    for i, p in enumerate(pts):
        if _inside(c, p):
            continue
        c = (p[0], p[1], 0.0)
        for j in range(i):
            q = pts[j]
            if _inside(c, q):
                continue
            c = _circle_two(p, q)
            for k in range(j):
                r = pts[k]
                if _inside(c, r):
                    continue
                c3 = _circle_three(p, q, r)
                c = c3 if c3 is not None else c
    return c


def max_inscribed_radius(curve: ClosedCurve) -> float:
    """Radius of the largest disc inside a convex polygon (Chebyshev centre)."""
    pts = curve.vertices
    e = np.roll(pts, -1, axis=0) - pts
    lens = np.hypot(e[:, 0], e[:, 1])
    normals = np.column_stack((e[:, 1], -e[:, 0])) / lens[:, None]
    a_ub = np.column_stack((normals, np.ones(len(pts))))
    b_ub = np.einsum("ij,ij->i", normals, pts)
    res = linprog(c=[0.0, 0.0, -1.0], A_ub=a_ub, b_ub=b_ub,
                  bounds=[(None, None), (None, None), (0, None)], method="highs")
    if not res.success:
        raise CurveError(f"inscribed circle LP failed: {res.message}")
    return float(res.x[2])


def radii(curve: ClosedCurve, fr: CurveFrame | None = None) -> tuple[float, float]:
    """(inscribed radius, circumscribed radius) of a convex closed curve."""
    if not is_convex(curve, fr):
        raise NotConvexError("radii are only defined here for convex curves")
    r_circ = min_enclosing_circle(curve.vertices)[2]
    return max_inscribed_radius(curve), r_circ
