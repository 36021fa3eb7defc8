"""Command-line interface.

    qhjquant eigen  --potential '{"kind":"quartic","k":1,"lambda":1}' --n 0..2 --compare numerov
    qhjquant table1 --format json --out table1.json
    qhjquant wavefn --potential '{"kind":"quartic","k":1,"lambda":1}' --n 2 --series psi,action_real

Exit codes: 0 success, 2 configuration error, 3 solver failure. Failures
print a JSON error record on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .allowed import find_b_star
from .assembly import SELECTORS, assemble, export_series
from .eigensolver import EigenResult, SolverOptions, shoot, solve
from .errors import QHJError
from .forbidden import log_derivative_at_tp
from .potential import DEFAULT_DECAY_BUDGET, PhysicalConstants, PotentialSpec
from .published import TABLE1, inconsistent
from .reference import classical_action, numerov_solve, wkb_energy

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3
CSV_CONFIG_PREFIX = "# config: "


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------- parsing helpers


def parse_n(text: str) -> list[int]:
    """'3' -> [3]; '0..2' -> [0, 1, 2]; '0,2,5' -> [0, 2, 5]."""
    text = str(text).strip()
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            out = list(range(int(a), int(b) + 1))
        else:
            out = [int(t) for t in text.split(",")]
    except ValueError:
        raise ConfigError(f"cannot parse --n {text!r}") from None
    if not out or any(v < 0 for v in out):
        raise ConfigError(f"--n must name nonnegative levels, got {text!r}")
    return out


def parse_b(text: str):
    if text in ("auto", "bstar"):
        return text
    try:
        b = float(text)
    except ValueError:
        raise ConfigError(f"--b must be a positive number, 'auto' or 'bstar', got {text!r}") from None
    if not b > 0:
        raise ConfigError(f"--b must be positive, got {b}")
    return b


def _positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise ConfigError(f"{name} must be positive, got {value}")
    return value


def build_config(args) -> dict:
    """Canonical, JSON-serialisable run configuration echoed into every output."""
    cfg = {"command": args.command}
    if hasattr(args, "potential"):
        try:
            spec = PotentialSpec.from_json(args.potential)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad --potential: {exc}") from None
        cfg["potential"] = spec.to_json()
    if hasattr(args, "n"):
        cfg["n"] = parse_n(args.n)
    cfg["hbar"] = _positive("--hbar", args.hbar)
    cfg["mass"] = _positive("--mass", args.mass)
    cfg["tol_e"] = _positive("--tol-e", args.tol_e)
    cfg["ode_tol"] = _positive("--ode-tol", args.ode_tol)
    if cfg["ode_tol"] > 1e-2:
        raise ConfigError("--ode-tol must be at most 1e-2")
    cfg["decay_budget"] = _positive("--decay-budget", args.decay_budget)
    cfg["format"] = args.format
    if hasattr(args, "compare"):
        cfg["compare"] = args.compare
    if hasattr(args, "b"):
        cfg["b"] = parse_b(args.b)
        series = [s.strip() for s in args.series.split(",") if s.strip()]
        bad = [s for s in series if s not in SELECTORS]
        if bad or not series:
            raise ConfigError(f"unknown --series {bad}; choose from {', '.join(SELECTORS)}")
        cfg["series"] = series
        cfg["energy"] = args.energy
        cfg["points"] = int(args.points)
        if cfg["points"] < 3:
            raise ConfigError("--points must be at least 3")
    return cfg


def _consts(cfg) -> PhysicalConstants:
    return PhysicalConstants(hbar=cfg["hbar"], mass=cfg["mass"])


def _options(cfg) -> SolverOptions:
    return SolverOptions(rel_tol=cfg["ode_tol"], abs_tol=cfg["ode_tol"] * 1e-2, decay_budget=cfg["decay_budget"])


# --------------------------------------------------------------------------- output


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return ""
    return str(v)


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def render_csv(config: dict, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(CSV_CONFIG_PREFIX + json.dumps(config, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def render_json(payload: dict) -> str:
    return json.dumps(_jsonable(payload), indent=2, sort_keys=False) + "\n"


def _emit(text: str, out: str | None, suffix: str | None = None):
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    if suffix:
        path = path.with_name(f"{path.stem}_{suffix}{path.suffix or '.csv'}")
    path.write_text(text)


# --------------------------------------------------------------------------- commands


def cmd_eigen(cfg: dict, out: str | None):
    spec = PotentialSpec.from_json(cfg["potential"])
    consts = _consts(cfg)
    opts = _options(cfg)
    compare = cfg.get("compare")
    records = []
    for n in cfg["n"]:
        r = solve(n, spec, consts, cfg["tol_e"], opts)
        rec = r.as_record()
        if compare in ("numerov", "both"):
            ref = numerov_solve(spec, consts, n, decay_budget=cfg["decay_budget"])
            rec["E_numerov"] = ref.E
            rec["abs_dE_numerov"] = abs(r.E - ref.E)
        if compare in ("wkb", "both"):
            e_wkb = wkb_energy(spec, consts, n)
            rec["E_wkb"] = e_wkb
            rec["abs_dE_wkb"] = abs(r.E - e_wkb)
        records.append(rec)
    _write_records(cfg, records, out)
    return records


def cmd_table1(cfg: dict, out: str | None):
    consts = _consts(cfg)
    opts = _options(cfg)
    records = []
    for level in TABLE1:
        spec = PotentialSpec.quartic(1.0, level.lam)
        r = solve(level.n, spec, consts, cfg["tol_e"], opts)
        ref = numerov_solve(spec, consts, level.n, decay_budget=cfg["decay_budget"])
        records.append(
            {
                "lambda": level.lam,
                "n": level.n,
                "E": r.E,
                "E_numerov": ref.E,
                "published_qhj": level.qhj,
                "published_se": level.se,
                "dev_published_se": r.E - level.se,
                "dev_numerov": r.E - ref.E,
                "published_pair_inconsistent": inconsistent(level),
                "mismatch_residual": r.mismatch_residual,
                "iterations": r.iterations,
            }
        )
    _write_records(cfg, records, out)
    return records


def _write_records(cfg, records, out):
    if cfg["format"] == "json":
        _emit(render_json({"config": cfg, "records": records}), out)
    else:
        columns = list(records[0]) if records else []
        _emit(render_csv(cfg, columns, [[rec.get(c) for c in columns] for rec in records]), out)


def _eigen_at_energy(E, spec, consts, opts) -> EigenResult:
    s = shoot(E, spec, consts, None, opts)
    return EigenResult(
        n=s.nodes, E=E, tp=s.tp, mismatch_residual=abs(s.w), b_used=s.b, iterations=0, function_evaluations=1, cutoffs=s.cutoffs
    )


def cmd_wavefn(cfg: dict, out: str | None):
    spec = PotentialSpec.from_json(cfg["potential"])
    consts = _consts(cfg)
    opts = _options(cfg)
    if cfg.get("energy") is not None:
        eigen = _eigen_at_energy(float(cfg["energy"]), spec, consts, opts)
    else:
        if len(cfg["n"]) != 1:
            raise ConfigError("wavefn takes a single level: --n <int>")
        eigen = solve(cfg["n"][0], spec, consts, cfg["tol_e"], opts)

    b_policy = cfg["b"]
    need_bstar = b_policy == "bstar" or any(s != "psi" for s in cfg["series"])
    bstar = None
    if need_bstar:
        base = shoot(eigen.E, spec, consts, None, opts)
        left = (1.0, log_derivative_at_tp(base.region_I, consts))
        bstar = find_b_star(eigen.E, eigen.n, spec, consts, base.tp, left)
    if b_policy == "auto":
        b = None
    elif b_policy == "bstar":
        b = bstar.b_star
    else:
        b = b_policy
    wf = assemble(eigen, b, spec, consts, opts)
    classical = classical_action(spec, consts, eigen.E, tp=wf.tp) if need_bstar else None

    all_series = [export_series(wf, eigen, bstar, classical, s, cfg["points"]) for s in cfg["series"]]
    if cfg["format"] == "json":
        payload = {
            "config": cfg,
            "eigen": eigen.as_record(),
            "series": {
                s.selector: {"meta": s.meta, "columns": list(s.columns), "data": {c: s.data[c] for c in s.columns}}
                for s in all_series
            },
        }
        _emit(render_json(payload), out)
    else:
        many = len(all_series) > 1
        for s in all_series:
            _emit(render_csv(cfg, s.columns, s.rows()), out, s.selector if many else None)
    return all_series


COMMANDS = {"eigen": cmd_eigen, "table1": cmd_table1, "wavefn": cmd_wavefn}


# --------------------------------------------------------------------------- parser


def _common(p):
    p.add_argument("--hbar", type=float, default=1.0)
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--tol-e", type=float, default=1e-8, help="absolute eigenvalue tolerance")
    p.add_argument("--ode-tol", type=float, default=1e-10, help="relative ODE tolerance (absolute is 1%% of it)")
    p.add_argument("--decay-budget", type=float, default=DEFAULT_DECAY_BUDGET)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--config", default=None, help="JSON file with a run config, or an output holding one")


def make_parser() -> argparse.ArgumentParser:
    return _build_parsers()[0]


def _build_parsers() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="qhjquant", description="Quantum Hamilton-Jacobi quantization of 1D wells")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    subs = {}
    p = subs["eigen"] = sub.add_parser("eigen", help="energy levels of a potential")
    p.add_argument("--potential", default='{"kind":"quartic","k":1,"lambda":1}')
    p.add_argument("--n", default="0")
    p.add_argument("--compare", choices=("numerov", "wkb", "both"), default=None)
    _common(p)

    p = subs["table1"] = sub.add_parser("table1", help="quartic levels for lambda in {0.002, 0.01, 0.1, 1}, n = 0..2")
    _common(p)

    p = subs["wavefn"] = sub.add_parser("wavefn", help="wavefunction and reduced-action series")
    p.add_argument("--potential", default='{"kind":"quartic","k":1,"lambda":1}')
    p.add_argument("--n", default="0")
    p.add_argument("--energy", type=float, default=None, help="use this energy instead of solving for level n")
    p.add_argument("--b", default="auto", help="X'(x1): a positive number, 'auto' (mid-well momentum) or 'bstar'")
    p.add_argument("--series", default="psi", help=f"comma-separated subset of {','.join(SELECTORS)}")
    p.add_argument("--points", type=int, default=2001)
    _common(p)
    return parser, subs


_CONFIG_TO_FLAG = {"n": lambda v: ",".join(str(i) for i in v), "potential": json.dumps, "b": str, "series": ",".join}


def _load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
        if text.startswith(CSV_CONFIG_PREFIX):
            text = text.splitlines()[0][len(CSV_CONFIG_PREFIX) :]
        data = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return data.get("config", data)


def parse_args(argv=None):
    parser, subs = _build_parsers()
    args = parser.parse_args(argv)
    if args.config:
        cfg = _load_config(args.config)
        if cfg.get("command", args.command) != args.command:
            raise ConfigError(f"config is for {cfg['command']!r}, not {args.command!r}")
        defaults = {}
        for key, val in cfg.items():
            if key == "command" or val is None:
                continue
            defaults[key] = _CONFIG_TO_FLAG.get(key, lambda v: v)(val)
        subs[args.command].set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        cfg = build_config(args)
    except ConfigError as exc:
        sys.stderr.write(json.dumps({"error": "config_error", "message": str(exc)}) + "\n")
        return EXIT_CONFIG
    try:
        COMMANDS[args.command](cfg, args.out)
    except ConfigError as exc:
        sys.stderr.write(json.dumps({"error": "config_error", "message": str(exc)}) + "\n")
        return EXIT_CONFIG
    except QHJError as exc:
        sys.stderr.write(json.dumps(_jsonable(exc.to_record())) + "\n")
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
