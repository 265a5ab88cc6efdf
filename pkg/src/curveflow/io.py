"""File formats and run configuration."""

from __future__ import annotations

import configparser
import csv
import inspect
import json
import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .flow import SERIES_COLUMNS, Event, StepConfig, Trajectory
from .forcing import ForcingError, ForcingSpec
from .geometry import ClosedCurve, Curve, CurveError, OpenCurve
from .scenarios import SCENARIOS, ScenarioError, ScenarioSpec

OUTPUT_ENV = "CURVEFLOW_OUTPUT_DIR"
EVENTS_SCHEMA = 1


class ConfigError(ValueError):
    pass


# --- numbers and JSON --------------------------------------------------------------


def fmt(x) -> str:
    """Shortest decimal that round-trips a float64."""
    return repr(float(x))


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dump_json(obj, path: Path | None = None) -> str:
    """JSON with NaN and infinities written as null."""
    text = json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


# --- curve snapshots -----------------------------------------------------------------


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def write_curve(path, curve: Curve) -> None:
    path = Path(path)
    lines = ["x,y"] + [f"{fmt(x)},{fmt(y)}" for x, y in curve.vertices]
    path.write_text("\n".join(lines) + "\n")
    if not curve.closed:
        meta = {"alpha": curve.alpha, "axis": list(curve.axis), "asymptotic": curve.asymptotic}
        dump_json(meta, sidecar_path(path))


def _read_xy(path) -> np.ndarray:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise CurveError(f"cannot read {path}: {exc.strerror}") from None
    rows = list(csv.reader(text.splitlines()))
    if not rows or [c.strip() for c in rows[0]] != ["x", "y"]:
        raise CurveError(f"{path}: expected header 'x,y'")
    pts = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 2:
            raise CurveError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
        try:
            pts.append((float(row[0]), float(row[1])))
        except ValueError:
            raise CurveError(f"{path}:{lineno}: non-numeric value") from None
    return np.array(pts, dtype=float).reshape(-1, 2)


def read_curve(path) -> Curve:
    """Closed curve from ``x,y`` CSV, or an open one when a JSON sidecar exists."""
    pts = _read_xy(path)
    side = sidecar_path(path)
    if side.exists():
        meta = json.loads(side.read_text())
        return OpenCurve(pts, tuple(meta["axis"]), meta["alpha"], meta.get("asymptotic", True))
    return ClosedCurve(pts)


def read_table(path) -> tuple[np.ndarray, np.ndarray]:
    """Two-column CSV ``t,g`` for prescribed rates."""
    path = Path(path)
    try:
        rows = list(csv.reader(path.read_text().splitlines()))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    if not rows or [c.strip() for c in rows[0]] != ["t", "g"]:
        raise ConfigError(f"{path}: expected header 't,g'")
    data = np.array([[float(a), float(b)] for a, b in (r for r in rows[1:] if r)])
    return data[:, 0], data[:, 1]


# --- trajectory export ------------------------------------------------------------------


def series_header(closed: bool) -> list[str]:
    ratio = "min_d_over_psi" if closed else "min_d_over_l"
    return [ratio if c == "ratio_min" else c for c in SERIES_COLUMNS]


def write_series(path, traj: Trajectory) -> None:
    cols = [traj.series[c] for c in SERIES_COLUMNS]
    lines = [",".join(series_header(traj.closed))]
    lines += [",".join(fmt(x) for x in row) for row in zip(*cols)]
    Path(path).write_text("\n".join(lines) + "\n")


def snapshot_name(k: int) -> str:
    return f"snap_{k:05d}.csv"


def write_trajectory(out: Path, traj: Trajectory, snapshots: bool = True) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_series(out / "series.csv", traj)
    if snapshots:
        snap_dir = out / "snapshots"
        snap_dir.mkdir(exist_ok=True)
        for k in range(len(traj.snapshots)):
            write_curve(snap_dir / snapshot_name(k), traj.curve_at(k))
    dump_json({
        "schema": EVENTS_SCHEMA,
        "stop_reason": traj.stop_reason,
        "events": [e.to_dict() for e in traj.events],
    }, out / "events.json")


def load_trajectory(run_dir) -> Trajectory:
    """Rebuild a trajectory from ``series.csv``, snapshots and ``events.json``."""
    run_dir = Path(run_dir)
    summary = json.loads((run_dir / "summary.json").read_text())
    closed = summary["closed"]
    rows = list(csv.reader((run_dir / "series.csv").read_text().splitlines()))
    header = rows[0]
    if header != series_header(closed):
        raise CurveError(f"{run_dir}/series.csv has unexpected columns")
    traj = Trajectory(closed, ForcingSpec.csf(), StepConfig())
    for row in rows[1:]:
        for c, v in zip(SERIES_COLUMNS, row):
            traj.series[c].append(float(v))
    snap_dir = run_dir / "snapshots"
    n = len(rows) - 1
    for k in range(n):
        curve = read_curve(snap_dir / snapshot_name(k))
        if not closed and traj.axis is None:
            traj.axis, traj.alpha = curve.axis, curve.alpha
        traj.snapshots.append(curve.vertices)
    traj.steps = list(range(n))
    ev = json.loads((run_dir / "events.json").read_text())
    for e in ev["events"]:
        e = dict(e)
        traj.events.append(Event(e.pop("kind"), e.pop("t"), e.pop("step"), e))
    traj.stop_reason = ev["stop_reason"]
    return traj


# --- run configuration --------------------------------------------------------------------


_FORCING_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$")


@dataclass
class RunConfig:
    scenario: ScenarioSpec | None
    input_path: Path | None
    forcing_text: str
    step: StepConfig
    output_dir: Path
    snapshots: bool = True
    rescale_k: int = 10
    curve: Curve | None = field(default=None, repr=False)
    forcing: ForcingSpec | None = field(default=None, repr=False)


_STEP_KEYS = {
    "scheme": str, "cfl": float, "dt": float, "resample_every": int, "resample_method": str,
    "resample_tol": float, "N": int, "t_max": float, "convergence_tol": float,
    "kappa_amplification": float, "dense_kappa": float, "halt_on_intersection": bool,
    "max_steps": int,
}
_OUTPUT_KEYS = {"dir": str, "record_every": int, "record_dt": float, "monitors": str,
                "snapshots": bool, "rescale_k": int}
_SECTIONS = ("scenario", "forcing", "stepping", "output")


def _line_of(text: str, section: str, key: str | None) -> int | None:
    current = None
    for n, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        m = re.match(r"^\[(.+)\]$", s)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return n
            continue
        if current == section and key is not None:
            k = re.split(r"[=:]", s, maxsplit=1)[0].strip()
            if k.lower() == key.lower():
                return n
    return None


def _err(text, section, key, msg) -> ConfigError:
    line = _line_of(text, section, key)
    where = f"line {line}: " if line else ""
    what = f"[{section}] {key}" if key else f"[{section}]"
    return ConfigError(f"{where}{what}: {msg}")


def _convert(text, section, key, raw: str, kind):
    raw = raw.strip()
    if kind is float and raw.lower() in ("none", "off"):
        return None
    try:
        if kind is bool:
            low = raw.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw
    except ValueError:
        raise _err(text, section, key, f"expected {kind.__name__}, got {raw!r}") from None


def _literal(raw: str):
    raw = raw.strip()
    for kind in (int, float):
        try:
            return kind(raw)
        except ValueError:
            pass
    low = raw.lower()
    if low in ("true", "false"):
        return low == "true"
    return raw


def parse_forcing(expr: str, curve: Curve, base: Path | None = None) -> ForcingSpec:
    m = _FORCING_RE.match(expr)
    if not m:
        raise ForcingError(f"cannot parse forcing {expr!r}")
    name, args = m.group(1), m.group(2)
    kwargs = {}
    if args:
        for part in args.split(","):
            part = part.strip()
            if not part:
                continue
            if "=" not in part:
                kwargs[part] = True
                continue
            k, v = part.split("=", 1)
            kwargs[k.strip()] = v.strip()

    def only(*allowed):
        extra = set(kwargs) - set(allowed)
        if extra:
            raise ForcingError(f"forcing {name!r} does not take {', '.join(sorted(extra))}")

    def table():
        if "file" not in kwargs:
            raise ForcingError(f"forcing {name!r} needs file=...")
        p = Path(kwargs["file"])
        if base is not None and not p.is_absolute():
            p = base / p
        if not p.exists():
            raise ForcingError(f"rate table {p} does not exist")
        return read_table(p)

    if name == "csf":
        only()
        spec = ForcingSpec.csf()
    elif name == "apcsf":
        only("discrete_exact")
        spec = ForcingSpec.area_preserving(discrete_exact=bool(kwargs.get("discrete_exact", False)))
    elif name == "lpcf":
        only()
        spec = ForcingSpec.length_preserving()
    elif name == "interp":
        only("delta")
        if "delta" not in kwargs:
            raise ForcingError("interp needs delta=...")
        if not curve.closed:
            raise ForcingError("interp needs a closed curve")
        spec = ForcingSpec.interpolated(float(kwargs["delta"]), curve)
    elif name in ("area_rate", "length_rate", "schedule"):
        only("file")
        t, g = table()
        spec = getattr(ForcingSpec, name)(t, g)
    else:
        raise ForcingError(f"unknown forcing {name!r}")
    spec.check_initial(curve)
    return spec


def parse_config(text: str, base_dir: Path | None = None) -> RunConfig:
    """Validate a run configuration (INI syntax, four sections).

    Unknown sections and keys, missing required keys and malformed values all
    raise ``ConfigError`` naming the line and key.  The initial curve and
    forcing are built here so that inadmissible combinations fail early.
    """
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"line {exc.lineno}: duplicate key {exc.option!r}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    for sec in cp.sections():
        if sec not in _SECTIONS:
            raise _err(text, sec, None, f"unknown section (expected one of {', '.join(_SECTIONS)})")
    for sec in ("scenario", "forcing"):
        if not cp.has_section(sec):
            raise ConfigError(f"missing required section [{sec}]")

    # scenario
    sc = dict(cp["scenario"])
    scenario = None
    input_path = None
    if "file" in sc:
        if "name" in sc:
            raise _err(text, "scenario", "file", "give either name or file, not both")
        extra = set(sc) - {"file"}
        if extra:
            raise _err(text, "scenario", sorted(extra)[0], "unknown key (file input takes no parameters)")
        input_path = Path(sc["file"])
        if base_dir is not None and not input_path.is_absolute():
            input_path = base_dir / input_path
        if not input_path.exists():
            raise _err(text, "scenario", "file", f"file {input_path} does not exist")
        curve = read_curve(input_path)
    else:
        if "name" not in sc:
            raise ConfigError("[scenario]: missing required key 'name' (or 'file')")
        name = sc.pop("name")
        if name not in SCENARIOS:
            raise _err(text, "scenario", "name", f"unknown scenario {name!r}; known: {', '.join(SCENARIOS)}")
        allowed = inspect.signature(SCENARIOS[name]).parameters
        params = {}
        n = None
        for k, v in sc.items():
            if k not in allowed:
                raise _err(text, "scenario", k, f"unknown key for scenario {name!r}")
            if k == "N":
                n = _convert(text, "scenario", k, v, int)
            elif k == "center":
                params[k] = tuple(float(x) for x in v.split(","))
            else:
                params[k] = _literal(v)
                if isinstance(params[k], str):
                    raise _err(text, "scenario", k, f"expected a number, got {v!r}")
        scenario = ScenarioSpec(name, params, n)
        try:
            curve = scenario.build()
        except (ScenarioError, CurveError, TypeError) as exc:
            raise _err(text, "scenario", "name", str(exc)) from None

    # forcing
    fc = dict(cp["forcing"])
    for k in fc:
        if k != "forcing":
            raise _err(text, "forcing", k, "unknown key (expected 'forcing')")
    if "forcing" not in fc:
        raise ConfigError("[forcing]: missing required key 'forcing'")
    try:
        forcing = parse_forcing(fc["forcing"], curve, base_dir)
    except ForcingError as exc:
        raise _err(text, "forcing", "forcing", str(exc)) from None

    # stepping and output
    kw = {}
    if cp.has_section("stepping"):
        for k, v in cp["stepping"].items():
            if k not in _STEP_KEYS:
                raise _err(text, "stepping", k, "unknown key")
            kw[k] = _convert(text, "stepping", k, v, _STEP_KEYS[k])
    out = {}
    if cp.has_section("output"):
        for k, v in cp["output"].items():
            if k not in _OUTPUT_KEYS:
                raise _err(text, "output", k, "unknown key")
            out[k] = _convert(text, "output", k, v, _OUTPUT_KEYS[k])
    for k in ("record_every", "record_dt", "monitors"):
        if k in out:
            kw[k] = out.pop(k)
    try:
        step = StepConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[stepping]: {exc}") from None
    if step.t_max <= 0:
        raise _err(text, "stepping", "t_max", "must be positive")
    out_dir = os.environ.get(OUTPUT_ENV) or out.get("dir") or "curveflow_out"
    out_dir = Path(out_dir)
    if base_dir is not None and not out_dir.is_absolute() and not os.environ.get(OUTPUT_ENV):
        out_dir = base_dir / out_dir
    return RunConfig(
        scenario=scenario,
        input_path=input_path,
        forcing_text=fc["forcing"],
        step=step,
        output_dir=out_dir,
        snapshots=out.get("snapshots", True),
        rescale_k=out.get("rescale_k", 10),
        curve=curve,
        forcing=forcing,
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, base_dir=path.parent)
