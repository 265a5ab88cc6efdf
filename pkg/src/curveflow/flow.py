"""Time stepping of dX/dt = (h - kappa) nu with event detection and recording."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._linalg import solve_cyclic_tridiagonal, solve_tridiagonal
from .forcing import (
    AdmissibilityError,
    ForcingError,
    ForcingSpec,
    compute_h,
    curvature_energy,
)
from .geometry import (
    CONVEX_TOL,
    ClosedCurve,
    Curve,
    CurveError,
    CurveFrame,
    DegenerateEdgeError,
    OpenCurve,
    find_crossing,
    frame,
    is_convex,
    radii,
    resample_uniform,
    signed_area,
)
from .monitors import (
    bonnesen_gap,
    conserved_interpolant,
    gage_residual,
    isoperimetric_deficit,
    ratio_min,
    theta_report,
)

EXPLICIT = "explicit"
SEMI_IMPLICIT = "semi_implicit"
HEUN = "heun"  # explicit two-stage, second order in time
DEFAULT_CFL = {EXPLICIT: 0.4, HEUN: 0.4, SEMI_IMPLICIT: 4.0}
SPEED_CAP = 0.1
BOUNDARY_DRIFT_TOL = 1e-4

# event kinds, in decreasing precedence for the halting ones
SELF_INTERSECTION = "self_intersection"
BLOWUP = "blowup"
CONVERGENCE = "convergence"
ADMISSIBILITY = "admissibility"
T_MAX = "t_max"
CONVEXITY_ONSET = "convexity_onset"
BOUNDARY_DRIFT = "boundary_drift"
NEGATIVE_H = "negative_h"

SERIES_COLUMNS = (
    "t", "L", "A", "h", "kappa_min", "kappa_max", "theta_min", "theta_sup",
    "ratio_min", "deficit", "conserved_interp", "gage_residual", "bonnesen_gap",
    "kappa_abs_max", "energy", "theta_defect", "min_ds",
)


class FlowError(RuntimeError):
    pass


@dataclass(frozen=True)
class StepConfig:
    scheme: str = SEMI_IMPLICIT
    cfl: float | None = None
    dt: float | None = None  # fixed step; the speed cap still applies
    resample_every: int = 1
    resample_method: str = "spline"
    resample_tol: float = 1e-10
    N: int | None = None
    t_max: float = 1.0
    convergence_tol: float | None = None
    kappa_amplification: float | None = 5.0
    record_every: int | None = None
    record_dt: float | None = None
    dense_kappa: float = 10.0
    halt_on_intersection: bool = True
    monitors: str = "full"  # "full" or "basic" (skips pair-ratio and radii)
    max_steps: int = 50_000_000

    def __post_init__(self):
        if self.scheme not in DEFAULT_CFL:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.cfl is None:
            object.__setattr__(self, "cfl", DEFAULT_CFL[self.scheme])
        if self.cfl <= 0:
            raise ValueError("cfl must be positive")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.N is not None and self.N < 16:
            raise ValueError("N must be at least 16")
        if self.resample_every < 0:
            raise ValueError("resample_every must be >= 0 (0 disables)")
        if self.monitors not in ("full", "basic"):
            raise ValueError("monitors must be 'full' or 'basic'")
        if self.record_every is None and self.record_dt is None:
            object.__setattr__(self, "record_every", 10)


@dataclass(frozen=True, eq=False)
class FlowState:
    curve: Curve
    t: float
    h: float
    frame: CurveFrame

    @classmethod
    def start(cls, curve: Curve, spec: ForcingSpec) -> "FlowState":
        fr = frame(curve)
        return cls(curve, 0.0, compute_h(spec, curve, 0.0, fr), fr)


@dataclass
class Event:
    kind: str
    t: float
    step: int
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "t": self.t, "step": self.step, **self.detail}


@dataclass
class Trajectory:
    closed: bool
    forcing: ForcingSpec
    config: StepConfig
    axis: tuple | None = None
    alpha: float | None = None
    steps: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    series: dict = field(default_factory=lambda: {c: [] for c in SERIES_COLUMNS})
    events: list = field(default_factory=list)
    stop_reason: str | None = None

    def column(self, name: str) -> np.ndarray:
        return np.asarray(self.series[name], dtype=float)

    @property
    def times(self) -> np.ndarray:
        return self.column("t")

    def curve_at(self, k: int) -> Curve:
        v = self.snapshots[k]
        if self.closed:
            return ClosedCurve(v, orient=False)
        return OpenCurve(v, self.axis, self.alpha, asymptotic=False)

    def curves(self):
        return (self.curve_at(k) for k in range(len(self.snapshots)))

    @property
    def final_curve(self) -> Curve:
        return self.curve_at(len(self.snapshots) - 1)

    def events_of(self, kind: str) -> list:
        return [e for e in self.events if e.kind == kind]

    def first_event(self, kind: str):
        found = self.events_of(kind)
        return found[0] if found else None


def stable_dt(fr: CurveFrame, config: StepConfig, h: float = 0.0) -> float:
    """Parabolic step bound cfl * min(ds)^2 / 2, capped so no vertex turns too fast."""
    if config.dt is not None:
        dt = config.dt
    else:
        dt = config.cfl * float(np.min(fr.ds)) ** 2 / 2.0
    rate = float(np.max(np.abs(fr.kappa) * np.abs(h - fr.kappa)))
    if rate > 0:
        dt = min(dt, SPEED_CAP / rate)
    return dt


# --- stepping ------------------------------------------------------------------


def _second_difference_coeffs(ds: np.ndarray, closed: bool):
    """Coefficients of the nonuniform second difference at each vertex."""
    if closed:
        hm = np.roll(ds, 1)
        hp = ds
    else:
        hm = np.concatenate(([ds[0]], ds))
        hp = np.concatenate((ds, [ds[-1]]))
    a = 2.0 / (hm * (hm + hp))
    c = 2.0 / (hp * (hm + hp))
    return a, -(a + c), c


def _implicit_update(pts, fr: CurveFrame, h: float, dt: float, closed: bool) -> np.ndarray:
    a, b, c = _second_difference_coeffs(fr.ds, closed)
    lower, diag, upper = -dt * a, 1.0 - dt * b, -dt * c
    rhs = pts + dt * h * fr.nu
    if closed:
        return solve_cyclic_tridiagonal(lower, diag, upper, rhs)
    # ends are held during the solve and re-extrapolated afterwards
    lower, diag, upper = lower.copy(), diag.copy(), upper.copy()
    lower[0] = upper[0] = 0.0
    lower[-1] = upper[-1] = 0.0
    diag[0] = diag[-1] = 1.0
    rhs[0] = pts[0]
    rhs[-1] = pts[-1]
    return solve_tridiagonal(lower, diag, upper, rhs)


def _pin_ends(pts: np.ndarray, ends: tuple) -> np.ndarray:
    """Straight end edges along the asymptotic directions, lengths kept."""
    d0, d1 = ends
    out = pts.copy()
    e0 = float(np.hypot(*(pts[1] - pts[0])))
    e1 = float(np.hypot(*(pts[-1] - pts[-2])))
    out[0] = pts[1] - e0 * d0
    out[-1] = pts[-2] + e1 * d1
    return out


def step(state: FlowState, spec: ForcingSpec, config: StepConfig, dt: float | None = None,
         ends: tuple | None = None, resample: bool = True) -> FlowState:
    """Advance one time step.

    ``h`` is evaluated on the current state and held fixed over the step.
    Open curves need ``ends``, the pinned unit end tangents.
    """
    curve, fr = state.curve, state.frame
    h = compute_h(spec, curve, state.t, fr)
    if dt is None:
        dt = stable_dt(fr, config, h)
    pts = curve.vertices
    if config.scheme in (EXPLICIT, HEUN):
        vel = (h - fr.kappa)[:, None] * fr.nu
        new = pts + dt * vel
        if config.scheme == HEUN:
            mid = curve.with_vertices(new)
            mfr = frame(mid)
            vel = 0.5 * (vel + (compute_h(spec, mid, state.t + dt, mfr) - mfr.kappa)[:, None] * mfr.nu)
            new = pts + dt * vel
        if not curve.closed:
            new[0], new[-1] = pts[0], pts[-1]
    else:
        try:
            new = _implicit_update(pts, fr, h, dt, curve.closed)
        except (np.linalg.LinAlgError, ValueError, ZeroDivisionError) as exc:
            raise DegenerateEdgeError(int(np.argmin(fr.ds)), float(np.min(fr.ds))) from exc
    if not np.all(np.isfinite(new)):
        raise DegenerateEdgeError(int(np.argmin(fr.ds)), float(np.min(fr.ds)))
    if not curve.closed:
        if ends is None:
            ends = curve.end_tangents()
        new = _pin_ends(new, ends)
    moved = curve.with_vertices(new)
    if resample:
        moved = resample_uniform(moved, len(moved), method=config.resample_method,
                                 tol=config.resample_tol)
        if not moved.closed:
            moved = moved.with_vertices(_pin_ends(moved.vertices, ends))
    new_fr = frame(moved)
    return FlowState(moved, state.t + dt, h, new_fr)


# --- recording -----------------------------------------------------------------


def _record(traj: Trajectory, state: FlowState, spec: ForcingSpec, step_no: int, full: bool,
            gamma: float) -> None:
    curve, fr = state.curve, state.frame
    L = fr.length
    try:
        h = compute_h(spec, curve, state.t, fr)
    except ForcingError:
        h = math.nan
    th = theta_report(curve, fr)
    row = {
        "t": state.t,
        "L": L,
        "h": h,
        "kappa_min": float(np.min(fr.kappa[1:-1] if not curve.closed else fr.kappa)),
        "kappa_max": float(np.max(fr.kappa[1:-1] if not curve.closed else fr.kappa)),
        "kappa_abs_max": float(np.max(np.abs(fr.kappa))),
        "theta_min": th.theta_min,
        "theta_sup": th.theta_sup,
        "theta_defect": th.identity_defect if th.identity_defect is not None else math.nan,
        "energy": curvature_energy(curve, fr),
        "min_ds": float(np.min(fr.ds)),
        "ratio_min": math.nan,
        "A": math.nan,
        "deficit": math.nan,
        "conserved_interp": math.nan,
        "gage_residual": math.nan,
        "bonnesen_gap": math.nan,
    }
    if full:
        row["ratio_min"] = ratio_min(curve, fr).min_value
    if curve.closed:
        A = signed_area(curve.vertices)
        row["A"] = A
        row["deficit"] = isoperimetric_deficit(L, A)
        row["conserved_interp"] = conserved_interpolant(gamma, A, L)
        if full and A > 0 and is_convex(curve, fr):
            r = radii(curve, fr)
            row["gage_residual"] = gage_residual(curve, fr)
            row["bonnesen_gap"] = bonnesen_gap(curve, fr, r)
    for k in SERIES_COLUMNS:
        traj.series[k].append(row[k])
    traj.snapshots.append(curve.vertices)
    traj.steps.append(step_no)


def _convex(fr: CurveFrame, closed: bool) -> bool:
    turning = fr.turning if closed else fr.turning[1:-1]
    return bool(np.all(turning >= -CONVEX_TOL))


def _end_drift_angles(curve: OpenCurve, ends: tuple) -> np.ndarray:
    """Angle between each pinned end direction and the neighbouring interior edge."""
    pts = curve.vertices
    e_start = pts[2] - pts[1]
    e_end = pts[-2] - pts[-3]
    out = []
    for e, d in ((e_start, ends[0]), (e_end, ends[1])):
        e = e / np.hypot(*e)
        out.append(math.atan2(d[0] * e[1] - d[1] * e[0], float(d @ e)))
    return np.array(out)


def run(initial: Curve, spec: ForcingSpec, config: StepConfig | None = None) -> Trajectory:
    """Evolve ``initial`` until t_max or a halting event; see ``Trajectory``.

    Halting events, in order of precedence within one step: self-intersection,
    blow-up (curvature past both its initial scale and the resolution budget,
    or past ``kappa_amplification`` times its initial scale), convergence
    (max |kappa - 2pi/L| below ``convergence_tol``).  A forcing rate leaving
    its admissible window also halts the run.
    """
    config = config or StepConfig()
    curve = initial
    if config.N is not None and config.N != len(curve):
        curve = resample_uniform(curve, config.N, method="spline")
    spec.check_initial(curve)
    crossing = find_crossing(curve)
    if crossing is not None:
        raise CurveError(f"initial curve is not simple: edges {crossing.edge_i}, {crossing.edge_j}")
    if not curve.closed and spec.variant not in ("csf", "schedule"):
        raise ForcingError("open curves accept only csf or a nonnegative schedule")

    state = FlowState.start(curve, spec)
    traj = Trajectory(curve.closed, spec, config)
    ends = None
    drift0 = None
    if not curve.closed:
        traj.axis, traj.alpha = curve.axis, curve.alpha
        ends = curve.end_tangents()
        drift0 = _end_drift_angles(curve, ends)
    full = config.monitors == "full"
    gamma = spec.gamma
    fr0 = state.frame
    kappa_ref = float(np.max(np.abs(fr0.kappa)))
    if curve.closed:
        kappa_ref = max(kappa_ref, 2 * math.pi / fr0.length)
    budget_amp = config.kappa_amplification * kappa_ref if (config.kappa_amplification and kappa_ref > 0) else math.inf

    _record(traj, state, spec, 0, full, gamma)
    convex_seen = _convex(fr0, curve.closed)
    if convex_seen:
        traj.events.append(Event(CONVEXITY_ONSET, 0.0, 0))
    negative_h_seen = False
    drift_seen = False
    next_record_t = config.record_dt if config.record_dt else math.inf
    n_step = 0
    t_max = config.t_max
    halt = None

    while halt is None:
        if state.t >= t_max * (1 - 1e-14) or n_step >= config.max_steps:
            halt = Event(T_MAX, state.t, n_step)
            break
        try:
            h = compute_h(spec, state.curve, state.t, state.frame)
        except AdmissibilityError as exc:
            halt = Event(ADMISSIBILITY, state.t, n_step, {"message": str(exc)})
            break
        if h < 0 and not negative_h_seen:
            negative_h_seen = True
            traj.events.append(Event(NEGATIVE_H, state.t, n_step, {"h": h}))
        dt = min(stable_dt(state.frame, config, h), t_max - state.t)
        if t_max - state.t - dt < 1e-12 * max(t_max, 1.0):
            dt = t_max - state.t
        resample = config.resample_every > 0 and (n_step + 1) % config.resample_every == 0
        try:
            new = step(state, spec, config, dt=dt, ends=ends, resample=resample)
        except DegenerateEdgeError as exc:
            halt = Event(BLOWUP, state.t, n_step, {"reason": "degenerate_edge", "edge": exc.index})
            break
        n_step += 1
        state = new
        fr = state.frame

        events = []
        crossing = find_crossing(state.curve)
        if crossing is not None:
            events.append(Event(SELF_INTERSECTION, state.t, n_step, {
                "edges": [crossing.edge_i, crossing.edge_j],
                "point": list(crossing.point),
            }))
        kmax = float(np.max(np.abs(fr.kappa)))
        min_ds = float(np.min(fr.ds))
        # an under-resolved start is not a blow-up: curvature must also have grown
        if kmax > 1.0 / (4.0 * min_ds) and kmax > kappa_ref:
            events.append(Event(BLOWUP, state.t, n_step,
                                {"reason": "resolution_budget", "kappa_max": kmax, "min_ds": min_ds}))
        elif kmax > budget_amp:
            events.append(Event(BLOWUP, state.t, n_step,
                                {"reason": "amplification", "kappa_max": kmax, "kappa_ref": kappa_ref}))
        if config.convergence_tol is not None and state.curve.closed:
            dev = float(np.max(np.abs(fr.kappa - 2 * math.pi / fr.length)))
            if dev < config.convergence_tol:
                events.append(Event(CONVERGENCE, state.t, n_step, {"kappa_dev": dev}))
        if not convex_seen and _convex(fr, state.curve.closed):
            convex_seen = True
            traj.events.append(Event(CONVEXITY_ONSET, state.t, n_step))
        if ends is not None and not drift_seen:
            drift = np.max(np.abs(_end_drift_angles(state.curve, ends) - drift0))
            if drift > BOUNDARY_DRIFT_TOL:
                drift_seen = True
                traj.events.append(Event(BOUNDARY_DRIFT, state.t, n_step, {"drift": float(drift)}))

        for ev in events:
            if ev.kind == SELF_INTERSECTION and not config.halt_on_intersection:
                if not traj.events_of(SELF_INTERSECTION):
                    traj.events.append(ev)
                continue
            halt = ev
            break

        due = (
            halt is not None
            or state.t >= t_max * (1 - 1e-14)
            or (config.record_every and n_step % config.record_every == 0)
            or state.t >= next_record_t - 1e-12
            or kmax > config.dense_kappa
        )
        if due:
            _record(traj, state, spec, n_step, full, gamma)
            if config.record_dt:
                while next_record_t <= state.t + 1e-12:
                    next_record_t += config.record_dt

    if traj.steps[-1] != n_step:
        _record(traj, state, spec, n_step, full, gamma)
    traj.events.append(halt)
    traj.stop_reason = halt.kind
    return traj


def evolve_open(initial: OpenCurve, spec: ForcingSpec | None = None,
                config: StepConfig | None = None) -> Trajectory:
    """Run an open curve under curve shortening or a nonnegative schedule h(t)."""
    if initial.closed:
        raise CurveError("evolve_open needs an OpenCurve")
    spec = spec or ForcingSpec.csf()
    return run(initial, spec, config)


def with_config(config: StepConfig, **changes) -> StepConfig:
    return replace(config, **changes)
