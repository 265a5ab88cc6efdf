"""Reference computations used as ground truth by the tests.

Nothing here imports the geometry or monitor code: turning angles, lengths,
areas and pair ratios are recomputed from raw vertex arrays with plain loops
or closed forms, so agreement with the main implementation is evidence
rather than tautology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

TWO_PI = 2.0 * math.pi


def exact_circle_csf(R0: float, t: float) -> float:
    """Radius at time t of a circle shrinking by curvature: sqrt(R0^2 - 2t)."""
    if t > R0 * R0 / 2:
        raise ValueError(f"t={t} is past the extinction time {R0 * R0 / 2}")
    return math.sqrt(R0 * R0 - 2.0 * t)


# --- polygon quantities from raw vertices ----------------------------------------


def _turning_angles(v: np.ndarray, closed: bool) -> list:
    n = len(v)
    out = [0.0] * n
    rng = range(n) if closed else range(1, n - 1)
    for i in rng:
        ax, ay = v[i][0] - v[i - 1][0], v[i][1] - v[i - 1][1]
        j = (i + 1) % n
        bx, by = v[j][0] - v[i][0], v[j][1] - v[i][1]
        out[i] = math.atan2(ax * by - ay * bx, ax * bx + ay * by)
    return out


def _edge_lengths(v: np.ndarray, closed: bool) -> list:
    n = len(v)
    m = n if closed else n - 1
    return [math.hypot(v[(i + 1) % n][0] - v[i][0], v[(i + 1) % n][1] - v[i][1]) for i in range(m)]


def polygon_length(v, closed: bool = True) -> float:
    return math.fsum(_edge_lengths(np.asarray(v, float), closed))


def polygon_area(v) -> float:
    v = np.asarray(v, float)
    n = len(v)
    return 0.5 * math.fsum(v[i][0] * v[(i + 1) % n][1] - v[(i + 1) % n][0] * v[i][1] for i in range(n))


def polygon_energy(v, closed: bool = True) -> float:
    """Sum of turning^2 / vertex-centred length, the discrete int kappa^2 ds."""
    v = np.asarray(v, float)
    phi = _turning_angles(v, closed)
    e = _edge_lengths(v, closed)
    n = len(v)
    total = []
    for i in range(n):
        if closed:
            dual = 0.5 * (e[i - 1] + e[i])
        elif 0 < i < n - 1:
            dual = 0.5 * (e[i - 1] + e[i])
        else:
            continue
        total.append(phi[i] ** 2 / dual)
    return math.fsum(total)


# --- finite-difference consistency of the length and area identities ------------


@dataclass
class FDCheck:
    which: str
    max_defect: float
    times: np.ndarray = field(repr=False)
    defects: np.ndarray = field(repr=False)


def fd_identity_check(traj, which: str) -> FDCheck:
    """Central difference of recorded A or L against the evolution identity.

    dA/dt = h L - 2 pi and dL/dt = 2 pi h - int kappa^2 ds, with L, A and the
    curvature integral recomputed from the recorded vertices and h taken from
    the recorded series.  Records must be uniformly spaced in time.
    """
    if which not in ("area", "length"):
        raise ValueError("which must be 'area' or 'length'")
    t = np.asarray(traj.series["t"], float)
    if len(t) < 5:
        raise ValueError("need at least 5 recorded samples")
    dt = np.diff(t)
    if np.max(np.abs(dt - dt[0])) > 1e-9 * max(dt[0], 1e-300) + 1e-15:
        raise ValueError("records are not uniformly spaced in time")
    h = np.asarray(traj.series["h"], float)
    snaps = traj.snapshots
    closed = traj.closed
    L = np.array([polygon_length(v, closed) for v in snaps])
    if which == "area":
        Q = np.array([polygon_area(v) for v in snaps])
        rhs = h * L - TWO_PI
    else:
        Q = L
        E = np.array([polygon_energy(v, closed) for v in snaps])
        rhs = TWO_PI * h - E
    deriv = (Q[2:] - Q[:-2]) / (t[2:] - t[:-2])
    defects = deriv - rhs[1:-1]
    return FDCheck(which, float(np.max(np.abs(defects))), t[1:-1], defects)


def convergence_order(coarse_defect: float, fine_defect: float, refinement: float = 2.0) -> float:
    return math.log(coarse_defect / fine_defect) / math.log(refinement)


# --- ellipse closed forms ------------------------------------------------------------


def ellipse_quadrature(a: float, b: float, functional: str) -> float:
    """L, int kappa^2 ds or max kappa of the ellipse with semi-axes a, b."""
    if a <= 0 or b <= 0:
        raise ValueError("semi-axes must be positive")
    if functional == "kappa_max":
        return max(a / b ** 2, b / a ** 2)

    def speed(t):
        return math.sqrt(a * a * math.sin(t) ** 2 + b * b * math.cos(t) ** 2)

    if functional == "L":
        f = speed
    elif functional == "energy":
        def f(t):
            return (a * b) ** 2 / speed(t) ** 5
    elif functional == "area":
        return math.pi * a * b
    else:
        raise ValueError(f"unknown functional {functional!r}")
    total = 0.0
    for k in range(4):
        val, _ = quad(f, k * math.pi / 2, (k + 1) * math.pi / 2, epsabs=1e-13, epsrel=1e-13, limit=200)
        total += val
    return total


# --- polar curves r = 1 + eps cos(m phi) ----------------------------------------------


def _polar(eps: float, m: int):
    def r(p):
        return 1 + eps * np.cos(m * p)

    def r1(p):
        return -eps * m * np.sin(m * p)

    def r2(p):
        return -eps * m * m * np.cos(m * p)

    return r, r1, r2


def polar_quadrature(eps: float, m: int, functional: str) -> float:
    """L, A or int kappa^2 ds of r(phi) = 1 + eps cos(m phi)."""
    r, r1, r2 = _polar(eps, m)

    def speed(p):
        return math.sqrt(r(p) ** 2 + r1(p) ** 2)

    def kappa(p):
        return (r(p) ** 2 + 2 * r1(p) ** 2 - r(p) * r2(p)) / speed(p) ** 3

    if functional == "L":
        f = speed
    elif functional == "area":
        def f(p):
            return 0.5 * r(p) ** 2
    elif functional == "energy":
        def f(p):
            return kappa(p) ** 2 * speed(p)
    else:
        raise ValueError(f"unknown functional {functional!r}")
    pieces = max(4, 4 * m)
    return sum(
        quad(f, k * TWO_PI / pieces, (k + 1) * TWO_PI / pieces, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
        for k in range(pieces)
    )


def polar_theta_min(eps: float, m: int, samples: int = 8192) -> float:
    """Minimum local total curvature of r = 1 + eps cos(m phi) on a dense grid.

    The unwrapped tangent angle is phi + atan2(r, r'); theta between two
    points is its increment, wrapping through 2 pi for the complementary arc.
    """
    r, r1, _ = _polar(eps, m)
    p = np.arange(samples) * TWO_PI / samples
    ang = p + np.arctan2(r(p), r1(p))
    ang = np.unwrap(ang)
    best = 0.0
    run_max = ang[0]
    run_min = ang[0]
    dmin, dmax = math.inf, -math.inf
    for a in ang[1:]:
        dmin = min(dmin, a - run_max)
        dmax = max(dmax, a - run_min)
        run_max = max(run_max, a)
        run_min = min(run_min, a)
    return min(best, dmin, TWO_PI - dmax)


# --- independent pair scans ---------------------------------------------------------


@dataclass(frozen=True)
class OracleRatio:
    kind: str
    min_value: float
    argmin: tuple


def brute_force_ratio(vertices, closed: bool, kind: str) -> OracleRatio:
    """Double loop over vertex pairs of d/l or d/psi; diagonal counts as 1."""
    v = np.asarray(vertices, float)
    n = len(v)
    e = _edge_lengths(v, closed)
    s = [0.0]
    for x in e[: n - 1]:
        s.append(s[-1] + x)
    L = sum(e)
    best, arg = 1.0, (0, 0)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            d = math.hypot(v[j][0] - v[i][0], v[j][1] - v[i][1])
            l = abs(s[j] - s[i])
            if kind == "d_over_psi":
                l = min(l, L - l)
                ratio = d / ((L / math.pi) * math.sin(math.pi * l / L))
            elif kind == "d_over_l":
                ratio = d / l
            else:
                raise ValueError(f"unknown ratio {kind!r}")
            if ratio < best:
                best, arg = ratio, (i, j)
    return OracleRatio(kind, best, arg)


def brute_force_theta(vertices, closed: bool) -> tuple[float, float]:
    """(theta_min, theta_sup) by summing turning angles pair by pair.

    theta(i, j) is half the turning at i, the full turning strictly between,
    and half the turning at j, walking forward (and through vertex 0 on
    closed curves).  theta(i, i) = 0; on closed curves the full loop also
    counts towards the supremum.
    """
    v = np.asarray(vertices, float)
    n = len(v)
    phi = _turning_angles(v, closed)
    total = sum(phi)
    lo, hi = 0.0, total if closed else 0.0
    for i in range(n):
        acc = 0.5 * phi[i]
        last = n if not closed else i + n
        for jj in range(i + 1, last):
            j = jj % n
            value = acc + 0.5 * phi[j]
            lo = min(lo, value)
            hi = max(hi, value)
            acc += phi[j]
    return lo, hi
