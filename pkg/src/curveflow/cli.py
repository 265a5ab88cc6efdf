"""Command line interface: run, certify, rescale, scenario, sweep."""

from __future__ import annotations

import argparse
import itertools
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .flow import BLOWUP, run
from .forcing import ForcingError
from .geometry import CurveError, find_crossing
from .io import (
    ConfigError,
    dump_json,
    fmt,
    load_config,
    load_trajectory,
    parse_config,
    read_curve,
    write_curve,
    write_trajectory,
)
from .monitors import certificate_report, convergence_report
from .scenarios import SCENARIOS, ScenarioError, ScenarioSpec
from .singularity import SingularityError, classify, estimate_T, parabolic_rescale

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_NOT_SIMPLE = 3


def _drift(x: np.ndarray) -> float | None:
    x = x[np.isfinite(x)]
    if x.size == 0 or x[0] == 0:
        return None
    return float(np.max(np.abs(x - x[0])) / abs(x[0]))


def summarize(traj, cfg) -> dict:
    L = traj.column("L")
    A = traj.column("A")
    ratio = traj.column("ratio_min")
    theta = traj.column("theta_min")
    out = {
        "closed": traj.closed,
        "forcing": traj.forcing.describe(),
        "gamma": traj.forcing.gamma,
        "stop_reason": traj.stop_reason,
        "t_final": float(traj.column("t")[-1]),
        "records": len(traj.snapshots),
        "final": {"L": float(L[-1]), "A": float(A[-1]), "h": float(traj.column("h")[-1])},
        "drift": {
            "A": _drift(A),
            "L": _drift(L),
            "conserved_interp": _drift(traj.column("conserved_interp")),
        },
        "certificates": {
            "min_ratio": float(np.nanmin(ratio)) if np.isfinite(ratio).any() else None,
            "initial_ratio": float(ratio[0]),
            "min_theta_min": float(np.min(theta)),
            "initial_theta_min": float(theta[0]),
        },
        "events": [e.to_dict() for e in traj.events],
    }
    if traj.closed:
        out["R_hat"] = float(L[-1] / (2 * math.pi))
        if traj.forcing.variant != "csf" and traj.stop_reason in ("t_max", "convergence"):
            rep = convergence_report(traj)
            out["convergence"] = rep.final
            out["implied_beta"] = rep.implied_beta
    return out


def execute(cfg) -> dict:
    """Run one configuration and write its artifacts; returns the summary."""
    traj = run(cfg.curve, cfg.forcing, cfg.step)
    out = cfg.output_dir
    write_trajectory(out, traj, snapshots=cfg.snapshots)
    summary = summarize(traj, cfg)
    if traj.stop_reason == BLOWUP:
        rec = estimate_T(traj)
        classify(rec)
        blow = {"record": rec.to_dict()}
        if cfg.rescale_k and np.isfinite(rec.T_hat):
            try:
                blow["rescale"] = parabolic_rescale(traj, cfg.rescale_k, rec.T_hat).to_dict()
            except SingularityError as exc:
                blow["rescale_error"] = str(exc)
        dump_json(blow, out / "blowup.json")
        summary["blowup"] = {"T_hat": rec.T_hat, "classification": rec.classification, "C0": rec.C0}
    dump_json(summary, out / "summary.json")
    return summary


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.out:
        cfg.output_dir = Path(args.out)
    summary = execute(cfg)
    print(f"{summary['stop_reason']} at t={summary['t_final']:.6g}; artifacts in {cfg.output_dir}")
    return EXIT_OK


def cmd_certify(args) -> int:
    curve = read_curve(args.curve)
    crossing = find_crossing(curve)
    if crossing is not None:
        report = {
            "simple": False,
            "error": f"curve is not simple: edges {crossing.edge_i} and {crossing.edge_j} cross",
            "crossing": {"edges": [crossing.edge_i, crossing.edge_j], "point": list(crossing.point)},
        }
        _emit(report, args.out)
        print(report["error"], file=sys.stderr)
        return EXIT_NOT_SIMPLE
    rep = certificate_report(curve, gamma=args.gamma)
    _emit({"simple": True, **rep.to_dict()}, args.out)
    return EXIT_OK


def _emit(obj, out):
    text = dump_json(obj)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_rescale(args) -> int:
    traj = load_trajectory(args.run_dir)
    rec = estimate_T(traj)
    classify(rec)
    frame_ = parabolic_rescale(traj, args.k, rec.T_hat)
    out = Path(args.out) if args.out else Path(args.run_dir) / f"rescale_k{args.k}"
    out.mkdir(parents=True, exist_ok=True)
    for i, v in enumerate(frame_.snapshots):
        lines = ["x,y"] + [f"{fmt(x)},{fmt(y)}" for x, y in v]
        (out / f"rescaled_{i:05d}.csv").write_text("\n".join(lines) + "\n")
    dump_json({"record": rec.to_dict(), "rescale": frame_.to_dict()}, out / "blowup.json")
    print(f"{rec.classification}, T_hat={rec.T_hat:.6g}, lambda_k={frame_.lambda_k:.6g}; wrote {out}")
    return EXIT_OK


def _parse_params(items) -> dict:
    params = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"parameter {item!r} is not key=value")
        k, v = item.split("=", 1)
        try:
            params[k] = int(v)
        except ValueError:
            params[k] = float(v)
    return params


def cmd_scenario(args) -> int:
    if args.action == "list":
        import inspect

        for name, fn in SCENARIOS.items():
            sig = ", ".join(
                f"{p.name}={p.default!r}" for p in inspect.signature(fn).parameters.values()
                if p.default is not inspect.Parameter.empty
            )
            print(f"{name}: {sig}")
        return EXIT_OK
    if not args.name or not args.out:
        raise ConfigError("scenario emit needs NAME and --out")
    curve = ScenarioSpec(args.name, _parse_params(args.param), args.N).build()
    write_curve(args.out, curve)
    print(f"wrote {len(curve)} vertices to {args.out}")
    return EXIT_OK


def _sweep_one(job):
    text, base, out = job
    cfg = parse_config(text, base_dir=Path(base))
    cfg.output_dir = Path(out)
    s = execute(cfg)
    return out, s["stop_reason"], s["t_final"]


def _vary(text: str, assignments: dict) -> str:
    """Set or replace ``key`` in ``[section]`` of an INI text."""
    lines = text.splitlines()
    for dotted, value in assignments.items():
        section, key = dotted.split(".", 1)
        current, inserted = None, False
        for i, line in enumerate(lines):
            s = line.strip()
            if s.startswith("[") and s.endswith("]"):
                if current == section and not inserted:
                    lines.insert(i, f"{key} = {value}")
                    inserted = True
                    break
                current = s[1:-1].strip()
                continue
            if current == section and s.split("=", 1)[0].strip() == key:
                lines[i] = f"{key} = {value}"
                inserted = True
                break
        if not inserted:
            if current != section:
                lines.append(f"[{section}]")
            lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def cmd_sweep(args) -> int:
    jobs = []
    root = Path(args.out)
    axes = []
    for spec in args.vary or []:
        if "=" not in spec or "." not in spec.split("=", 1)[0]:
            raise ConfigError(f"--vary expects section.key=v1,v2,..., got {spec!r}")
        k, vs = spec.split("=", 1)
        axes.append([(k, v) for v in vs.split(",")])
    for path in args.configs:
        path = Path(path)
        text = path.read_text()
        for combo in itertools.product(*axes) if axes else [()]:
            varied = _vary(text, dict(combo)) if combo else text
            tag = "_".join(f"{k.split('.', 1)[1]}-{v}" for k, v in combo)
            name = path.stem + (f"_{tag}" if tag else "")
            parse_config(varied, base_dir=path.parent)  # fail fast before forking
            jobs.append((varied, str(path.parent), str(root / name)))
    with ProcessPoolExecutor(max_workers=args.jobs) as pool:
        for out, reason, t in pool.map(_sweep_one, jobs):
            print(f"{out}: {reason} at t={t:.6g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="curveflow", description=__doc__)
    p.add_argument("--version", action="version", version=f"curveflow {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one configuration")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (overrides the config)")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("certify", help="certificates of a curve CSV as JSON")
    c.add_argument("curve")
    c.add_argument("--gamma", type=float, default=0.0, help="weight for the conserved interpolant")
    c.add_argument("--out")
    c.set_defaults(func=cmd_certify)

    s = sub.add_parser("rescale", help="parabolic rescaling of a blow-up run directory")
    s.add_argument("run_dir")
    s.add_argument("--k", type=int, default=10)
    s.add_argument("--out")
    s.set_defaults(func=cmd_rescale)

    sc = sub.add_parser("scenario", help="list scenarios or write one as CSV")
    sc.add_argument("action", choices=["list", "emit"])
    sc.add_argument("name", nargs="?")
    sc.add_argument("--N", type=int)
    sc.add_argument("--param", action="append", help="generator parameter key=value")
    sc.add_argument("--out")
    sc.set_defaults(func=cmd_scenario)

    w = sub.add_parser("sweep", help="run several configurations in parallel")
    w.add_argument("configs", nargs="+")
    w.add_argument("--vary", action="append", help="section.key=v1,v2,... (cartesian product)")
    w.add_argument("--out", default="sweep_out")
    w.add_argument("--jobs", type=int, default=None)
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ForcingError, ScenarioError, CurveError, SingularityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc.filename or ''}: {exc.strerror}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
