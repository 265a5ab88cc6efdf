"""Global forcing terms h(t) for the flow dX/dt = (h - kappa) nu."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .geometry import ClosedCurve, Curve, CurveFrame, enclosed_area, frame

TWO_PI = 2.0 * math.pi
CIRCLE_TOL = 1e-9

CSF = "csf"
AREA_PRESERVING = "apcsf"
LENGTH_PRESERVING = "lpcf"
INTERPOLATED = "interp"
AREA_RATE = "area_rate"
LENGTH_RATE = "length_rate"
SCHEDULE = "schedule"

CLOSED_ONLY = {AREA_PRESERVING, LENGTH_PRESERVING, INTERPOLATED, AREA_RATE, LENGTH_RATE}


class ForcingError(ValueError):
    pass


class AdmissibilityError(ForcingError):
    """A prescribed rate left the window in which the flow is known to behave."""


def regular_polygon_deficit(L, n):
    """Isoperimetric deficit L^2/4pi - A of the regular n-gon with perimeter L.

    Among n-gons of fixed perimeter the regular one has the largest area, so
    this is the floor below which a sampled curve cannot be distinguished
    from a circle.
    """
    L2 = np.asarray(L, dtype=float) ** 2
    out = L2 / (4 * math.pi) - L2 / (4 * n * np.tan(math.pi / np.asarray(n)))
    return float(out) if out.ndim == 0 else out


def gamma_from_delta(delta: float, L0: float, A0: float, floor: float = 0.0) -> float:
    """Weight gamma = (delta - 1) A0 / (L0^2/4pi - A0) that makes delta*A0 the limit area.

    ``floor`` is subtracted from the deficit before the circle test (use the
    regular-polygon deficit for sampled curves).  delta == 1 gives 0 for any
    admissible deficit.
    """
    if delta <= 0:
        raise ForcingError(f"delta must be positive, got {delta}")
    deficit = L0 * L0 / (4 * math.pi) - A0
    if delta == 1.0:
        if deficit < -CIRCLE_TOL * A0:
            raise ForcingError("negative isoperimetric deficit")
        return 0.0
    if deficit - floor <= CIRCLE_TOL * A0:
        raise ForcingError(
            "initial curve is a circle (L0^2/4pi - A0 vanishes); gamma is undefined for delta != 1"
        )
    return (delta - 1.0) * A0 / deficit


def curvature_energy(curve: Curve, fr: CurveFrame | None = None) -> float:
    """Discrete integral of kappa^2 ds with vertex-centred length elements."""
    fr = fr if fr is not None else frame(curve)
    return float(np.sum(fr.kappa ** 2 * fr.dual))


@dataclass(frozen=True)
class RateTable:
    """Piecewise-linear g(t) held constant beyond the last sample."""

    times: tuple
    values: tuple

    def __post_init__(self):
        t = np.asarray(self.times, float)
        g = np.asarray(self.values, float)
        if t.ndim != 1 or t.shape != g.shape or len(t) < 1:
            raise ForcingError("rate table needs matching 1-d times and values")
        if np.any(np.diff(t) <= 0):
            raise ForcingError("rate table times must be strictly increasing")
        object.__setattr__(self, "times", tuple(map(float, t)))
        object.__setattr__(self, "values", tuple(map(float, g)))

    def __call__(self, t: float) -> float:
        return float(np.interp(t, self.times, self.values))

    def integral(self) -> float:
        t = np.asarray(self.times)
        g = np.asarray(self.values)
        return float(trapezoid(g, t)) if len(t) > 1 else 0.0

    @property
    def nondecreasing(self) -> bool:
        return bool(np.all(np.diff(self.values) >= 0))

    @property
    def nonincreasing(self) -> bool:
        return bool(np.all(np.diff(self.values) <= 0))


@dataclass(frozen=True)
class ForcingSpec:
    variant: str
    delta: float | None = None
    gamma: float = 0.0
    L0: float | None = None
    A0: float | None = None
    rate: RateTable | None = None
    discrete_exact: bool = False

    @classmethod
    def csf(cls):
        return cls(CSF)

    @classmethod
    def area_preserving(cls, discrete_exact: bool = False):
        return cls(AREA_PRESERVING, discrete_exact=discrete_exact)

    @classmethod
    def length_preserving(cls):
        return cls(LENGTH_PRESERVING)

    @classmethod
    def interpolated(cls, delta: float, curve: ClosedCurve):
        """Interpolated forcing with gamma frozen from the initial curve."""
        L0 = float(frame(curve).length)
        A0 = enclosed_area(curve)
        gamma = gamma_from_delta(delta, L0, A0, floor=regular_polygon_deficit(L0, len(curve)))
        return cls(INTERPOLATED, delta=float(delta), gamma=gamma, L0=L0, A0=A0)

    @classmethod
    def area_rate(cls, times, values):
        table = RateTable(tuple(times), tuple(values))
        g = np.asarray(table.values)
        decreasing_window = np.all((g > -TWO_PI) & (g <= 0)) and table.nondecreasing
        increasing_window = np.all(g >= 0) and table.nonincreasing
        if not (decreasing_window or increasing_window):
            raise AdmissibilityError(
                "area rate must satisfy -2pi < g <= 0 nondecreasing, or g >= 0 nonincreasing"
            )
        if g[-1] != 0:
            raise AdmissibilityError("area rate must end at 0 so that its integral is finite")
        return cls(AREA_RATE, rate=table)

    @classmethod
    def length_rate(cls, times, values):
        table = RateTable(tuple(times), tuple(values))
        g = np.asarray(table.values)
        if not ((np.all(g <= 0) and table.nondecreasing) or (np.all(g >= 0) and table.nonincreasing)):
            raise AdmissibilityError(
                "length rate must be nonpositive nondecreasing, or nonnegative nonincreasing"
            )
        if g[-1] != 0:
            raise AdmissibilityError("length rate must end at 0 so that its integral is finite")
        return cls(LENGTH_RATE, rate=table)

    @classmethod
    def schedule(cls, times, values):
        """Prescribed nonnegative h(t), for open curves."""
        table = RateTable(tuple(times), tuple(values))
        if min(table.values) < 0:
            raise ForcingError("open-curve forcing must be nonnegative")
        return cls(SCHEDULE, rate=table)

    @property
    def closed_only(self) -> bool:
        return self.variant in CLOSED_ONLY

    def check_initial(self, curve: Curve) -> None:
        """Integral conditions that depend on the initial curve."""
        if self.closed_only and not curve.closed:
            raise ForcingError(f"forcing {self.variant!r} needs a closed curve")
        if self.variant == AREA_RATE:
            A0 = enclosed_area(curve)
            L0 = frame(curve).length
            total = self.rate.integral()
            if total <= -A0:
                raise AdmissibilityError("integral of the area rate must exceed -A0")
            if total > L0 * L0 / (4 * math.pi) - A0:
                raise AdmissibilityError("integral of the area rate exceeds the isoperimetric deficit")
        elif self.variant == LENGTH_RATE and self.rate.integral() <= -frame(curve).length:
            raise AdmissibilityError("integral of the length rate must exceed -L0")

    def describe(self) -> str:
        if self.variant == INTERPOLATED:
            return f"interp(delta={self.delta!r})"
        if self.variant == AREA_PRESERVING and self.discrete_exact:
            return "apcsf(discrete_exact)"
        return self.variant


def compute_h(spec: ForcingSpec, curve: Curve, t: float, fr: CurveFrame | None = None) -> float:
    v = spec.variant
    if v == CSF:
        return 0.0
    if v == SCHEDULE:
        return spec.rate(t)
    if not curve.closed:
        raise ForcingError(f"forcing {v!r} needs a closed curve")
    fr = fr if fr is not None else frame(curve)
    L = fr.length
    if v == AREA_PRESERVING:
        total = fr.total_turning if spec.discrete_exact else TWO_PI
        return total / L
    energy = curvature_energy(curve, fr)
    if v == LENGTH_PRESERVING:
        return energy / TWO_PI
    if v == INTERPOLATED:
        return (1.0 - spec.gamma) * TWO_PI / L + spec.gamma * energy / TWO_PI
    g = spec.rate(t)
    if v == AREA_RATE:
        if g > 0 and g >= L * energy / TWO_PI - TWO_PI:
            raise AdmissibilityError(
                f"area rate g={g:.6g} at t={t:.6g} exceeds L/2pi int kappa^2 - 2pi"
            )
        return (TWO_PI + g) / L
    if v == LENGTH_RATE:
        if g < -energy + 2 * TWO_PI / L:
            raise AdmissibilityError(
                f"length rate g={g:.6g} at t={t:.6g} is below -int kappa^2 + 4pi/L"
            )
        return (energy + g) / TWO_PI
    raise ForcingError(f"unknown forcing variant {v!r}")


def h_window(curve: ClosedCurve, fr: CurveFrame | None = None) -> tuple[float, float]:
    """Interval [0, (1/2pi) int kappa^2 + 2pi/L] for closed-curve forcing."""
    fr = fr if fr is not None else frame(curve)
    return 0.0, curvature_energy(curve, fr) / TWO_PI + TWO_PI / fr.length
