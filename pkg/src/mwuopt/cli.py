"""Command line entry point: ``mwuopt <command> [options]``.

Every command writes JSON by default (sorted keys, fixed float formatting) so
that repeated runs with the same options and seed are byte-identical.
Exit status is 0 on success, 2 for bad input or configuration and 3 when a
computation fails numerically.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import experiments
from .dynamics import Method, run, safe_stepsize
from .errors import ConfigError, InputError, MWUError, NotFixedPointError, NumericalError
from .objective import load_objective
from .simplex import StrategyProfile, random_profiles, validate
from .spectral import diffeomorphism_probe, stability_verdict
from .stationarity import Tolerances, classify_report

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 2, 3

# per-command fallbacks for options left unset on the command line and in --config
DEFAULTS = {
    "optimize": {"objective": None, "method": "mwu", "eps": "auto", "starts": 1, "seed": 0,
                 "tol": 1e-10, "max_iter": 10_000, "format": "json"},
    "classify": {"objective": None, "point": None, "eps": "auto", "format": "json"},
    "counterexample": {"grid": 10_000, "format": "json"},
    "vector-field": {"grid": 50, "eps": "0.05", "format": "csv"},
    "basin": {"objective": "trig-demo", "eps": "auto", "starts": 500, "seed": 0, "tol": 1e-10,
              "max_iter": 100_000, "cluster_radius": 1e-4, "format": "json"},
    "probe": {"objective": None, "samples": 200, "seed": 0, "format": "json"},
}


@dataclass
class RunConfig:
    """Options of one command after merging the command line with ``--config``."""

    command: str
    objective: str | None = None
    method: str = "mwu"
    eps: str = "auto"
    starts: int = 1
    seed: int = 0
    tol: float = 1e-10
    max_iter: int = 10_000
    grid: int = 50
    samples: int = 200
    cluster_radius: float = 1e-4
    support_tol: float = 1e-9
    point: str | None = None
    out: str | None = None
    format: str = "json"

    def check(self) -> None:
        if self.starts < 1:
            raise ConfigError("starts must be at least 1")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be at least 1")
        if self.samples < 1:
            raise ConfigError("samples must be at least 1")
        if not self.cluster_radius > 0:
            raise ConfigError("cluster_radius must be positive")
        if self.command in ("optimize", "classify", "probe") and not self.objective:
            raise ConfigError(f"{self.command} needs --objective")
        if self.command == "classify" and not self.point:
            raise ConfigError("classify needs --point")
        if self.format not in ("json", "csv", "text"):
            raise ConfigError(f"unknown format {self.format!r}")


def parse_eps(text, num_players: int | None = None):
    """``auto`` (returned as None), one value, or a comma-separated list."""
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, list):
        vals = text
    elif str(text).strip().lower() == "auto":
        return None
    else:
        vals = str(text).split(",")
    try:
        out = [float(v) for v in vals]
    except ValueError:
        raise ConfigError(f"cannot parse step sizes {text!r}") from None
    if any(not math.isfinite(v) or v < 0 for v in out):
        raise ConfigError(f"step sizes must be finite and nonnegative: {text!r}")
    if num_players is not None and len(out) not in (1, num_players):
        raise ConfigError(f"need 1 or {num_players} step sizes, got {len(out)}")
    return out


def _step_sizes(text, obj):
    vals = parse_eps(text, obj.shape.n)
    if vals is None:
        return safe_stepsize(obj).per_player
    return np.array(vals * obj.shape.n if len(vals) == 1 else vals)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(payload) -> str:
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _emit(text: str, out: str | None, stdout) -> None:
    if out is None:
        stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _numbered(out: str, k: int) -> str:
    p = Path(out)
    return str(p.with_name(f"{p.stem}_{k}{p.suffix}"))


# -- commands ---------------------------------------------------------------------


def cmd_optimize(cfg: RunConfig, stdout) -> None:
    obj = load_objective(cfg.objective)
    method = Method(cfg.method)
    eps = _step_sizes(cfg.eps, obj) if method is Method.MWU else None
    tols = Tolerances(support_tol=cfg.support_tol)
    runs = []
    for k, x0 in enumerate(random_profiles(obj.shape, cfg.starts, cfg.seed)):
        traj = run(x0, obj, eps, method, cfg.tol, cfg.max_iter)
        report = classify_report(traj.final, obj, tols)
        runs.append((traj, report))
    if cfg.format == "csv":
        for k, (traj, _) in enumerate(runs):
            target = cfg.out if cfg.out is None or cfg.starts == 1 else _numbered(cfg.out, k)
            _emit(traj.to_csv(), target, stdout)
        return
    payload = {
        "command": "optimize",
        "objective": cfg.objective,
        "method": method.value,
        "eps": None if eps is None else eps,
        "seed": cfg.seed,
        "runs": [{"start": k, "trajectory": t.to_dict(), "report": r.to_dict()} for k, (t, r) in enumerate(runs)],
    }
    if cfg.format == "text":
        lines = [f"{'start':>5}  {'status':<15} {'iters':>7}  {'value':>14}  verdict"]
        for k, (t, r) in enumerate(runs):
            lines.append(f"{k:>5}  {t.status.value:<15} {t.iterations:>7}  {t.objective_values[-1]:>14.8g}  "
                         f"{r.verdict.value}")
        _emit("\n".join(lines) + "\n", cfg.out, stdout)
        return
    _emit(dumps(payload), cfg.out, stdout)


def _read_point(path: str, obj) -> StrategyProfile:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read point file {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"point file {path!r} is not valid JSON: {exc}") from None
    if isinstance(data, dict):
        data = data.get("values", data)
    if isinstance(data, dict) or not isinstance(data, list):
        raise InputError("point file must hold a nested list or an object with 'values'")
    return validate(data, obj.shape, tol=1e-9)


def classify_point(obj, x: StrategyProfile, eps, tols: Tolerances) -> dict:
    """KKT report plus the stability section, which is ``"n/a"`` away from fixed points."""
    report = classify_report(x, obj, tols)
    try:
        stab = stability_verdict(x, obj, eps, tols)
        stability = {"verdict": stab.verdict.value, "spectral_radius": stab.spectral_radius,
                     "spectrum": [[z.real, z.imag] for z in stab.bundle.spectrum],
                     "removed_indices": [[i + 1, j + 1] for i, j in stab.bundle.removed_indices]}
    except NotFixedPointError as exc:
        stability = {"verdict": "n/a", "reason": str(exc)}
    except MWUError as exc:
        stability = {"verdict": "n/a", "reason": f"{type(exc).__name__}: {exc}"}
    return {"report": report.to_dict(), "stability": stability, "eps": list(np.atleast_1d(eps))}


def _classify_text(result: dict) -> str:
    r, s = result["report"], result["stability"]
    rows = [
        ("verdict", r["verdict"]),
        ("first order", r["first_order"]),
        ("strict", r["strict"]),
        ("second order", r["second_order"]),
        ("worst violation", f"{r['worst_violation']:.3e}"),
        ("tangent dimension", r["tangent_dimension"]),
        ("max tangent eigenvalue", r["max_tangent_eigenvalue"]),
        ("stability", s["verdict"]),
        ("spectral radius", s.get("spectral_radius", "n/a")),
    ]
    width = max(len(k) for k, _ in rows)
    return "".join(f"{k:<{width}}  {v}\n" for k, v in rows)


def cmd_classify(cfg: RunConfig, stdout) -> None:
    obj = load_objective(cfg.objective)
    x = _read_point(cfg.point, obj)
    eps = _step_sizes(cfg.eps, obj)
    result = classify_point(obj, x, eps, Tolerances(support_tol=cfg.support_tol))
    if cfg.format == "text":
        _emit(_classify_text(result), cfg.out, stdout)
    else:
        _emit(dumps({"command": "classify", "objective": cfg.objective, **result}), cfg.out, stdout)


def cmd_counterexample(cfg: RunConfig, stdout) -> None:
    res = experiments.counterexample(cfg.grid)
    if cfg.format == "csv":
        _emit(res.to_csv(), cfg.out, stdout)
    else:
        _emit(dumps({"command": "counterexample", **res.to_dict()}), cfg.out, stdout)


def cmd_vector_field(cfg: RunConfig, stdout) -> None:
    eps = parse_eps(cfg.eps)
    if eps is None or len(eps) != 1:
        raise ConfigError("vector-field needs a single explicit --eps")
    rows = experiments.vector_field(cfg.grid, eps[0])
    if cfg.format == "csv":
        _emit(experiments.field_to_csv(rows), cfg.out, stdout)
    else:
        _emit(dumps({"command": "vector-field", "grid": cfg.grid, "eps": eps[0],
                     "columns": ["x", "y", "dx", "dy"], "rows": rows}), cfg.out, stdout)


def cmd_basin(cfg: RunConfig, stdout) -> None:
    eps = parse_eps(cfg.eps)
    summary = experiments.basin(cfg.objective, eps, cfg.starts, cfg.seed, cfg.tol, cfg.max_iter,
                                cfg.cluster_radius)
    payload = {"command": "basin", "objective": cfg.objective, "seed": cfg.seed, **summary.to_dict()}
    if cfg.format == "csv":
        lines = ["center,count,verdict"]
        for c, n, v in zip(summary.cluster_centers, summary.cluster_counts, summary.cluster_verdicts):
            lines.append(f"\"{json.dumps(c.values.tolist())}\",{n},{v.value}")
        _emit("\n".join(lines) + "\n", cfg.out, stdout)
    else:
        _emit(dumps(payload), cfg.out, stdout)


def cmd_probe(cfg: RunConfig, stdout) -> None:
    obj = load_objective(cfg.objective)
    res = diffeomorphism_probe(obj, sample_points=cfg.samples, seed=cfg.seed)
    if cfg.format == "csv":
        _emit(res.to_csv(), cfg.out, stdout)
    else:
        _emit(dumps({"command": "probe", "objective": cfg.objective, **res.to_dict()}), cfg.out, stdout)


COMMANDS = {
    "optimize": cmd_optimize,
    "classify": cmd_classify,
    "counterexample": cmd_counterexample,
    "vector-field": cmd_vector_field,
    "basin": cmd_basin,
    "probe": cmd_probe,
}


# -- argument handling ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with option values (command-line flags win)")
    common.add_argument("--out", help="output file (default: standard output)")
    common.add_argument("--format", choices=["json", "csv", "text"], default=None)

    parser = argparse.ArgumentParser(
        prog="mwuopt",
        description="MWU and Baum-Eagon dynamics on products of simplices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", parents=[common], help="run the dynamics from random starts")
    p.add_argument("--objective", help="objective file or builtin id")
    p.add_argument("--method", choices=[m.value for m in Method])
    p.add_argument("--eps", help="'auto', one step size, or one per player (comma separated)")
    p.add_argument("--starts", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--support-tol", dest="support_tol", type=float)

    p = sub.add_parser("classify", parents=[common], help="KKT and stability report for one point")
    p.add_argument("--objective")
    p.add_argument("--point", help="JSON file: nested list or {'n', 'm', 'values'}")
    p.add_argument("--eps")
    p.add_argument("--support-tol", dest="support_tol", type=float)

    p = sub.add_parser("counterexample", parents=[common], help="non-injective Baum-Eagon map example")
    p.add_argument("--grid", type=int)

    p = sub.add_parser("vector-field", parents=[common], help="displacements of the cos(8x) sin(6y) demo map")
    p.add_argument("--grid", type=int)
    p.add_argument("--eps")

    p = sub.add_parser("basin", parents=[common], help="where random starts converge, and what they are")
    p.add_argument("--objective")
    p.add_argument("--eps")
    p.add_argument("--starts", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--cluster-radius", dest="cluster_radius", type=float)

    p = sub.add_parser("probe", parents=[common], help="minimum Jacobian determinant per step size")
    p.add_argument("--objective")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    return parser


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def make_config(args: argparse.Namespace) -> RunConfig:
    values = dict(DEFAULTS[args.command])
    if args.config:
        values.update(_load_config(args.config))
    values.update({k: v for k, v in vars(args).items() if v is not None and k != "config"})
    known = set(RunConfig.__dataclass_fields__)
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    try:
        cfg = RunConfig(**values)
        for name in ("starts", "seed", "max_iter", "grid", "samples"):
            setattr(cfg, name, int(getattr(cfg, name)))
        for name in ("tol", "cluster_radius", "support_tol"):
            setattr(cfg, name, float(getattr(cfg, name)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from None
    cfg.check()
    return cfg


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    args = build_parser().parse_args(argv)
    try:
        cfg = make_config(args)
        COMMANDS[cfg.command](cfg, stdout)
    except InputError as exc:
        print(f"mwuopt: error: {exc}", file=stderr)
        return EXIT_INPUT
    except (NumericalError, MWUError) as exc:
        print(f"mwuopt: numerical failure: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"mwuopt: error: {exc}", file=stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
