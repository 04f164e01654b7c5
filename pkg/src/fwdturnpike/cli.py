"""Command-line interface.

Every command reads a JSON configuration (``--config``), writes plot-ready
CSV/JSON files and prints a short result on stdout. Exit codes: 0 on
success, 2 on invalid input, 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import classify, scan_spatial, scan_temporal
from .classical import ClassicalSpec, classical_limits
from .config import EXAMPLES, RunConfig, example_config, load_config
from .errors import NumericalError, ValidationError
from .expansions import dirac_expansion, lebesgue_expansion
from .harmonic import h_eval, h_inverse
from .market import martingale_check, simulate_optimal
from .measure import DiracMixture, LebesgueSegment
from .performance import criterion_point, risk_tolerance

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3


def _plain(obj):
    """Convert to JSON-safe builtins; non-finite floats become null."""
    if is_dataclass(obj):
        return _plain(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps(obj) -> str:
    """Deterministic JSON text with a trailing newline."""
    return json.dumps(_plain(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _out_dir(args, cfg: RunConfig | None) -> Path:
    if args.out is not None:
        return Path(args.out)
    if cfg is not None and cfg.out is not None:
        return cfg.out
    return Path(".")


def _emit(args, cfg, name: str, payload) -> None:
    text = dumps(payload)
    if args.out is not None or (cfg is not None and cfg.out is not None):
        _write(_out_dir(args, cfg) / name, text)
    sys.stdout.write(text)


def _config(args) -> RunConfig:
    if args.config is None:
        raise ValidationError("this command needs --config PATH", "config")
    cfg = load_config(args.config)
    if args.rtol is not None:
        if not args.rtol > 0:
            raise ValidationError("must be positive", "rtol")
        cfg.rtol = float(args.rtol)
    if args.seed is not None:
        if args.seed < 0:
            raise ValidationError("must be non-negative", "seed")
        cfg.simulation["seed"] = int(args.seed)
    return cfg


def cmd_eval(args) -> int:
    cfg = _config(args)
    he = h_eval(cfg.measure, args.z, args.t)
    cp = criterion_point(cfg.measure, he.h, args.t)
    _emit(args, cfg, "eval.json", {"harmonic": he, "h_t": he.h_t, "criterion": cp})
    return EXIT_OK


def cmd_invert(args) -> int:
    cfg = _config(args)
    inv = h_inverse(cfg.measure, args.x, args.t, rtol=cfg.rtol)
    h = h_eval(cfg.measure, inv.z, args.t).h
    _emit(args, cfg, "invert.json", {"inverse": inv, "h": h, "relative_residual": abs(h - args.x) / args.x})
    return EXIT_OK


def cmd_expand(args) -> int:
    cfg = _config(args)
    m = cfg.measure
    if isinstance(m, DiracMixture):
        exp = dirac_expansion(m, args.x, args.t)
    elif isinstance(m, LebesgueSegment):
        exp = lebesgue_expansion(m, args.x, args.t)
    else:
        raise ValidationError("expansions exist for dirac and lebesgue measures only", "measure.type")
    inv = h_inverse(m, args.x, args.t, rtol=cfg.rtol)
    numeric = {"h_inv": inv.z, "r": risk_tolerance(m, args.x, args.t)}
    _emit(args, cfg, "expand.json", {"x": args.x, "t": args.t, "expansion": exp, "numeric": numeric})
    return EXIT_OK


def _fmt_limit(v: float) -> str:
    return f"{v:g}"


def turnpike_summary(series, cls) -> str:
    """One-line summary of a scan against the predicted limit."""
    achieved = float(series.ratio[-1])
    if series.axis == "spatial" and series.limit is None:
        g = series.growth_ratio[-1] if series.growth_ratio is not None else float("nan")
        return (f"spatial turnpike fails; growth-law ratio reported: r/(x log log x) = {g:.6f} "
                f"at x={series.grid[-1]:g} (growth limit {_fmt_limit(series.growth_limit)})")
    pred = cls.temporal_limit if series.axis == "temporal" else cls.spatial_limit
    return f"predicted {_fmt_limit(pred)}, achieved {achieved:.10f}"


def cmd_turnpike(args) -> int:
    cfg = _config(args)
    m = cfg.measure
    cls = classify(m)
    fixed = 1.0 if args.fixed is None else float(args.fixed)
    if args.axis == "temporal":
        if not fixed > 0:
            raise ValidationError("x0 must be positive", "fixed")
        series = scan_temporal(m, fixed, cfg.grids["temporal"])
    else:
        if not fixed >= 0:
            raise ValidationError("t0 must be non-negative", "fixed")
        series = scan_spatial(m, fixed, cfg.grids["spatial"])
    out = _out_dir(args, cfg)
    _write(out / f"turnpike_{args.axis}.csv", series.to_csv())
    summary = turnpike_summary(series, cls)
    last, rate = series.convergence()
    meta = {"axis": args.axis, "fixed": fixed, "classification": cls, "summary": summary,
            "achieved": float(series.ratio[-1]), "limit": series.limit,
            "growth_limit": series.growth_limit,
            "last_growth_ratio": None if series.growth_ratio is None else float(series.growth_ratio[-1]),
            "last_residual": last, "residual_ratio": rate,
            "checks_pass": None if series.checks is None else bool(np.all(series.checks))}
    _write(out / f"turnpike_{args.axis}.json", dumps(meta))
    sys.stdout.write(summary + "\n")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _config(args)
    if cfg.market is None:
        raise ValidationError("missing block (needed by simulate)", "market")
    sim = cfg.simulation
    m = cfg.measure
    paths = simulate_optimal(m, cfg.market, sim["x"], sim["horizon"], sim["steps"], sim["paths"], sim["seed"])
    out = _out_dir(args, cfg)
    _write(out / "paths.csv", paths.to_csv())

    checks = []
    opt = martingale_check(m, cfg.market, sim["x"], sim["horizon"], sim["check_paths"], sim["seed"])
    checks.append({**asdict(opt), "kind": "martingale", "pass": opt.is_martingale()})
    for frac in sim["fractions"]:
        r = martingale_check(m, cfg.market, sim["x"], sim["horizon"], sim["check_paths"], sim["seed"],
                             fraction=frac)
        checks.append({**asdict(r), "kind": "supermartingale", "pass": r.is_supermartingale()})
    _write(out / "martingale.json", dumps({"seed": sim["seed"], "checks": checks}))
    for c in checks:
        status = "pass" if c["pass"] else "FAIL"
        sys.stdout.write(f"{c['kind']} {c['strategy']}: estimate {c['estimate']:.6e}, reference "
                         f"{c['reference']:.6e}, se {c['std_error']:.3e} -> {status}\n")
    return EXIT_OK


def cmd_classical(args) -> int:
    cfg = _config(args)
    spec = cfg.classical or ClassicalSpec()
    fixed = cfg.classical_fixed or {"x0": 1.0, "tau0": 1.0}
    lim = classical_limits(spec, cfg.grids["spatial"], cfg.grids["temporal"], fixed["x0"], fixed["tau0"])
    fwd = spec.forward_measure()
    fs = scan_spatial(fwd, 1.0, cfg.grids["spatial"])
    ft = scan_temporal(fwd, 1.0, cfg.grids["temporal"])
    out = _out_dir(args, cfg)
    _write(out / "classical_spatial.csv", lim.spatial.to_csv())
    _write(out / "classical_temporal.csv", lim.temporal.to_csv())
    summary = {
        "theta": spec.theta, "lambda": spec.lam, "alpha": spec.alpha, "beta": spec.beta,
        "classical": {"spatial": float(lim.spatial.ratio[-1]), "temporal": float(lim.temporal.ratio[-1]),
                      "limit": lim.limit, "gap": lim.coincidence_gap},
        "forward": {"predicted": list(lim.forward_pair), "spatial": float(fs.ratio[-1]),
                    "temporal": float(ft.ratio[-1]), "gap": lim.forward_gap},
    }
    _write(out / "classical.json", dumps(summary))
    sys.stdout.write(
        f"classical: spatial {lim.spatial.ratio[-1]:.6f}, temporal {lim.temporal.ratio[-1]:.6f} "
        f"(limit {_fmt_limit(lim.limit)}, gap {lim.coincidence_gap:.2e})\n"
        f"forward: pair ({_fmt_limit(lim.forward_pair[0])}, {_fmt_limit(lim.forward_pair[1])}), "
        f"achieved ({fs.ratio[-1]:.6f}, {ft.ratio[-1]:.6f}), non-coincidence gap {_fmt_limit(lim.forward_gap)}\n")
    return EXIT_OK


def cmd_example(args) -> int:
    raw = example_config(args.name)
    out = _out_dir(args, None)
    path = out / f"{args.name}.json"
    _write(path, dumps(raw))
    sys.stdout.write(f"{path}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="override simulation.seed")
    common.add_argument("--rtol", type=float, help="inversion tolerance")

    p = argparse.ArgumentParser(prog="fwdturnpike", parents=[common],
                                description="Time-monotone forward performance criteria from their measure.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("eval", parents=[common], help="h and the criterion at (z, t)")
    s.add_argument("--z", type=float, required=True)
    s.add_argument("--t", type=float, required=True)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("invert", parents=[common], help="solve h(z, t) = x")
    s.add_argument("--x", type=float, required=True)
    s.add_argument("--t", type=float, required=True)
    s.set_defaults(func=cmd_invert)

    s = sub.add_parser("turnpike", parents=[common], help="temporal or spatial ratio scan")
    s.add_argument("--axis", choices=["temporal", "spatial"], required=True)
    s.add_argument("--fixed", type=float, help="x0 (temporal) or t0 (spatial); default 1")
    s.set_defaults(func=cmd_turnpike)

    s = sub.add_parser("expand", parents=[common], help="closed-form expansions at (x, t)")
    s.add_argument("--x", type=float, required=True)
    s.add_argument("--t", type=float, required=True)
    s.set_defaults(func=cmd_expand)

    s = sub.add_parser("simulate", parents=[common], help="optimal paths and martingale checks")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("classical", parents=[common], help="classical Merton comparison")
    s.set_defaults(func=cmd_classical)

    s = sub.add_parser("example", parents=[common], help="write a bundled configuration")
    s.add_argument("name", help=", ".join(sorted(EXAMPLES)))
    s.set_defaults(func=cmd_example)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION
    except NumericalError as exc:
        sys.stderr.write(f"numerical error ({type(exc).__name__}): {exc}\n")
        return EXIT_NUMERICAL
    except FloatingPointError as exc:
        sys.stderr.write(f"numerical error: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
