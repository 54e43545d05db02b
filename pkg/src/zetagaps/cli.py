"""Command line front end.

    zetagaps eval --c 2.69 --r 3.1 --mode large --coeffs 1,10,39
    zetagaps optimize --c 2.69 --mode large --degree 2
    zetagaps critical-c --mode small --degree 2
    zetagaps oracle --T 1e4,1e5,1e6 --r 1 --c 1 --mode large --coeffs 1
    zetagaps scan --c-list 2.5,2.69,3 --r-list 2.5,3.1 --modes large -o grid.csv
    zetagaps reproduce

Options may also come from ``--config FILE`` holding ``key = value`` lines
(keys are the long option names); command-line flags win on conflict.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

from . import checkpoints as cps
from .arith import DEFAULT_SIEVE_CAP, MAX_SIEVE_LIMIT, build_sieve
from .errors import (
    AccuracyError,
    ConditioningError,
    ParameterError,
    SearchFailureError,
)
from .functional import (
    SERIES_PI_C_CAP,
    FunctionalParams,
    Mode,
    PolynomialF,
    QuadratureSpec,
    eval_h_quadrature_detail,
    eval_h_r1,
    eval_h_series_detail,
    parse_floats,
)
from .optimizer import find_critical_c, grid_scan, optimize_r
from .oracle import OracleParams, convergence_study, height_to_length
from .records import ResultRecord, RunConfig, flatten, to_csv

log = logging.getLogger("zetagaps")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_ACCURACY = 3
EXIT_IO = 4
EXIT_REPRODUCTION = 5

COMMANDS = ("eval", "optimize", "critical-c", "oracle", "scan", "reproduce")

DEFAULTS = {
    "coeffs": "1",
    "mode": "large",
    "degree": 2,
    "r_min": 1.0,
    "r_max": 6.0,
    "engine": "both",
    "outer_nodes": 64,
    "inner_nodes": 64,
    "tolerance": 1e-9,
    "T": "1e4,1e5,1e6",
    "sieve_cap": DEFAULT_SIEVE_CAP,
    "modes": "large,small",
    "step": 0.05,
    "resolution": 1e-4,
}


class ReproductionFailure(Exception):
    pass


def _positive_int(text):
    value = int(float(text))
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


# option name -> (type, help); all default to None so config files can fill gaps
_OPTIONS = {
    "c": (float, "gap length in units of the mean spacing"),
    "r": (float, "divisor power r (fixes r for optimize / critical-c)"),
    "mode": (str, "large | small"),
    "coeffs": (str, "comma-separated polynomial coefficients a0,a1,..."),
    "degree": (int, "polynomial degree for optimization (<= 6)"),
    "r_min": (float, "lower end of the r search interval"),
    "r_max": (float, "upper end of the r search interval"),
    "engine": (str, "quadrature | series | both"),
    "outer_nodes": (int, "Gauss-Jacobi node count"),
    "inner_nodes": (int, "Gauss-Legendre node count"),
    "tolerance": (float, "quadrature refinement tolerance"),
    "T": (str, "comma-separated heights T for the oracle"),
    "sieve_cap": (float, "largest sieve the oracle may allocate"),
    "c_list": (str, "comma-separated c grid for scan"),
    "r_list": (str, "comma-separated r grid for scan"),
    "modes": (str, "comma-separated modes for scan"),
    "c_min": (float, "lower end of the critical-c scan"),
    "c_max": (float, "upper end of the critical-c scan"),
    "step": (float, "critical-c scan step"),
    "resolution": (float, "critical-c bisection resolution"),
}

_COMMAND_OPTIONS = {
    "eval": ("c", "r", "mode", "coeffs", "engine", "outer_nodes", "inner_nodes", "tolerance"),
    "optimize": ("c", "r", "mode", "degree", "r_min", "r_max"),
    "critical-c": ("r", "mode", "degree", "r_min", "r_max", "c_min", "c_max", "step", "resolution"),
    "oracle": ("T", "r", "c", "mode", "coeffs", "sieve_cap"),
    "scan": ("c_list", "r_list", "modes", "degree"),
    "reproduce": ("engine",),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file with option defaults")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("-o", "--output", help="write the result here instead of stdout")
    common.add_argument("--threads", type=_positive_int, default=None,
                        help="worker cap for grid evaluations (default: logical cores)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="zetagaps", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        for opt in _COMMAND_OPTIONS[name]:
            typ, help_text = _OPTIONS[opt]
            flag = "--" + opt.replace("_", "-")
            p.add_argument(flag, dest=opt, type=typ, default=None, help=help_text)
        if name == "reproduce":
            p.add_argument("--perturb", action="append", default=[], metavar="NAME=COEFFS",
                           help="replace a checkpoint's coefficients (diagnostics)")
    return parser


def _read_config(path: str) -> dict:
    text = Path(path).read_text()
    cfg = configparser.ConfigParser()
    cfg.optionxform = str
    cfg.read_string("[run]\n" + text)
    return {k.replace("-", "_"): v.strip() for k, v in cfg["run"].items()}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    params = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    if args.config:
        for key, raw in _read_config(args.config).items():
            if key not in params:
                raise ParameterError(f"config key {key!r} is not an option of '{args.command}'")
            if params[key] is None:
                typ = _OPTIONS[key][0] if key in _OPTIONS else (
                    _positive_int if key == "threads" else str)
                try:
                    params[key] = typ(raw)
                except (TypeError, ValueError) as exc:
                    raise ParameterError(f"config key {key!r}: {exc}") from None
    for key, value in DEFAULTS.items():
        if key in params and params[key] is None:
            params[key] = value
    if params.get("format") is None:
        params["format"] = "csv" if args.command == "scan" else "json"
    if params.get("threads") is None:
        params["threads"] = os.cpu_count() or 1
    return RunConfig(args.command, params)


def _require(p: dict, *names):
    for name in names:
        if p.get(name) is None:
            raise ParameterError(f"missing required parameter --{name.replace('_', '-')}")


def _finite(name: str, value: float) -> float:
    if not math.isfinite(value):
        raise ParameterError(f"{name} must be finite, got {value}")
    return value


def cmd_eval(cfg: RunConfig) -> ResultRecord:
    p = cfg.parameters
    _require(p, "c", "r")
    params = FunctionalParams(_finite("c", p["c"]), _finite("r", p["r"]), Mode.parse(p["mode"]))
    f = PolynomialF.parse(p["coeffs"])
    quad = QuadratureSpec(p["outer_nodes"], p["inner_nodes"], p["tolerance"])
    engine = p["engine"]
    if engine not in cps.ENGINES:
        raise ParameterError(f"engine must be one of {cps.ENGINES}, got {engine!r}")
    outputs: dict = {}
    diag: dict = {}
    if engine in ("quadrature", "both"):
        q = eval_h_quadrature_detail(params, f, quad)
        outputs["h_quadrature"] = q.value
        diag.update(quadrature_nodes=list(q.nodes), quadrature_refinement_residual=q.residual)
    if engine in ("series", "both"):
        if math.pi * params.c <= SERIES_PI_C_CAP:
            s = eval_h_series_detail(params, f)
            outputs["h_series"] = s.value
            diag.update(series_terms=s.max_terms, series_error_bound=s.error_bound)
        elif engine == "series":
            eval_h_series_detail(params, f)  # raises the out-of-branch error
        else:
            diag["series_skipped"] = f"pi*c > {SERIES_PI_C_CAP:g}"
    if params.r == 1.0:
        outputs["h_symmetric"] = eval_h_r1(params.c, f, params.mode, quad)
    values = list(outputs.values())
    if len(values) > 1:
        residual = max(values) - min(values)
        diag["engine_residual"] = residual
        if residual > cps.AGREEMENT_TOL:
            raise AccuracyError(f"engines disagree by {residual:.3e}")
    h = outputs.get("h_quadrature", values[0])
    outputs["h"] = h
    outputs["side"] = "h<1" if h < 1 else ("h>1" if h > 1 else "h=1")
    inputs = {"c": params.c, "r": params.r, "mode": params.mode.value, "coeffs": list(f.coeffs),
              "engine": engine}
    return ResultRecord("eval", inputs, outputs, diag)


def _r_bounds(p: dict) -> tuple[float, float]:
    if p.get("r") is not None:
        return (p["r"], p["r"])
    return (p["r_min"], p["r_max"])


def cmd_optimize(cfg: RunConfig) -> ResultRecord:
    p = cfg.parameters
    _require(p, "c")
    mode = Mode.parse(p["mode"])
    bounds = _r_bounds(p)
    result = optimize_r(_finite("c", p["c"]), p["degree"], mode, bounds)
    inputs = {"c": p["c"], "mode": mode.value, "degree": p["degree"], "r_bounds": list(bounds)}
    return ResultRecord("optimize", inputs, result.to_dict(),
                        {"engine_agreement": result.engine_agreement})


def cmd_critical_c(cfg: RunConfig) -> ResultRecord:
    p = cfg.parameters
    mode = Mode.parse(p["mode"])
    bounds = _r_bounds(p)
    c_range = None
    if p.get("c_min") is not None or p.get("c_max") is not None:
        _require(p, "c_min", "c_max")
        c_range = (p["c_min"], p["c_max"])
    res = find_critical_c(p["degree"], mode, bounds, c_range, p["step"], p["resolution"],
                          threads=p["threads"])
    inputs = {"mode": mode.value, "degree": p["degree"], "r_bounds": list(bounds),
              "c_range": list(c_range) if c_range else None, "step": p["step"],
              "resolution": p["resolution"]}
    outputs = {"c_star": res.c_star, "witness": res.witness.to_dict(), "bracket": list(res.bracket)}
    diag = {"scan": [{"c": c, "h_opt": h} for c, h in res.scan]}
    return ResultRecord("critical-c", inputs, outputs, diag)


def cmd_oracle(cfg: RunConfig) -> ResultRecord:
    p = cfg.parameters
    _require(p, "r", "c")
    T_list = parse_floats(p["T"])
    f = PolynomialF.parse(p["coeffs"])
    mode = Mode.parse(p["mode"])
    for T in T_list:
        OracleParams(T, p["r"], mode, p["c"])
    cap = min(int(p["sieve_cap"]), MAX_SIEVE_LIMIT)
    need = max(height_to_length(T) for T in T_list)
    if need > cap:
        raise ParameterError(
            f"T={max(T_list):g} needs a sieve up to K={need}, above the cap {cap} "
            f"(~{4 * need / 1e9:.1f} GB); refusing")
    tables = build_sieve(max(need, 2))
    rows = convergence_study(T_list, p["r"], mode, p["c"], f, tables)
    inputs = {"T": T_list, "r": p["r"], "c": p["c"], "mode": mode.value, "coeffs": list(f.coeffs)}
    return ResultRecord("oracle", inputs, {"table": [row.to_dict() for row in rows]},
                        {"sieve_limit": tables.limit})


def _scan_rows(cfg: RunConfig):
    p = cfg.parameters
    _require(p, "c_list", "r_list")
    modes = [m for m in p["modes"].split(",") if m.strip()]
    return grid_scan(parse_floats(p["c_list"]), parse_floats(p["r_list"]), modes, p["degree"],
                     p["threads"])


def scan_csv(cfg: RunConfig) -> str:
    degree = cfg.parameters["degree"]
    header = ["c", "r", "mode", "degree", "h_opt"] + [f"a{i}" for i in range(degree + 1)]
    body = []
    for row in _scan_rows(cfg):
        coeffs = list(row.coeffs) + [None] * (degree + 1 - len(row.coeffs))
        body.append([row.c, row.r, row.mode.value, row.degree, row.h_opt] + coeffs)
    return to_csv(header, body)


def cmd_scan(cfg: RunConfig) -> ResultRecord:
    p = cfg.parameters
    table = [{"c": r.c, "r": r.r, "mode": r.mode.value, "degree": r.degree, "h_opt": r.h_opt,
              "coeffs": list(r.coeffs)} for r in _scan_rows(cfg)]
    return ResultRecord("scan", {k: p[k] for k in ("c_list", "r_list", "modes", "degree")},
                        {"rows": table})


def cmd_reproduce(cfg: RunConfig) -> list[ResultRecord]:
    p = cfg.parameters
    overrides = {}
    for item in p.get("perturb") or []:
        name, _, coeffs = item.partition("=")
        cps.checkpoint_by_name(name.strip())
        overrides[name.strip()] = PolynomialF.parse(coeffs)
    records = []
    for cp in cps.CHECKPOINTS:
        if cp.name in overrides:
            cp = cps.with_coeffs(cp, overrides[cp.name])
        t0 = time.perf_counter()
        outcome = cps.run_checkpoint(cp, p["engine"])
        inputs = {"checkpoint": cp.name, "c": cp.c, "r": cp.r, "mode": cp.mode.value,
                  "coeffs": list(cp.f.coeffs), "relation": f"h {cp.relation} 1"}
        outputs = {"values": outcome.values, "passed": outcome.passed, "line": outcome.line()}
        diag = {"engine_residual": outcome.residual}
        records.append(ResultRecord("reproduce", inputs, outputs, diag, time.perf_counter() - t0))
    return records


def _emit(text: str, output: str | None):
    if output:
        try:
            Path(output).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {output}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _render(record: ResultRecord, fmt: str) -> str:
    if fmt == "json":
        return record.to_json() + "\n"
    tables = [v for v in record.outputs.values()
              if isinstance(v, list) and v and isinstance(v[0], dict)]
    if tables:
        header = list(tables[0][0])
        rows = [[row[k] if not isinstance(row[k], list) else ";".join(map(repr, row[k]))
                 for k in header] for row in tables[0]]
        return to_csv(header, rows)
    flat = flatten({"inputs": record.inputs, "outputs": record.outputs})
    return to_csv(list(flat), [list(flat.values())])


def run(cfg: RunConfig) -> int:
    p = cfg.parameters
    fmt, output = p["format"], p.get("output")
    t0 = time.perf_counter()
    if cfg.command == "reproduce":
        records = cmd_reproduce(cfg)
        for rec in records:
            print(rec.outputs["line"])
        passed = sum(rec.outputs["passed"] for rec in records)
        print(f"{passed}/{len(records)} PASS")
        if output:
            if fmt == "json":
                text = json.dumps([r.to_dict() for r in records], indent=2) + "\n"
            else:
                text = to_csv(["checkpoint", "relation", "passed", "h"],
                              [[r.inputs["checkpoint"], r.inputs["relation"], r.outputs["passed"],
                                next(iter(r.outputs["values"].values()))] for r in records])
            _emit(text, output)
        if passed != len(records):
            raise ReproductionFailure(f"{len(records) - passed} checkpoint(s) failed")
        return EXIT_OK
    if cfg.command == "scan" and fmt == "csv":
        _emit(scan_csv(cfg), output)
        return EXIT_OK
    handler = {"eval": cmd_eval, "optimize": cmd_optimize, "critical-c": cmd_critical_c,
               "oracle": cmd_oracle, "scan": cmd_scan}[cfg.command]
    record = handler(cfg)
    record.wall_time = time.perf_counter() - t0
    _emit(_render(record, fmt), output)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(resolve_config(args))
    except ParameterError as exc:
        print(f"zetagaps: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (AccuracyError, ConditioningError) as exc:
        print(f"zetagaps: accuracy error: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except SearchFailureError as exc:
        print(f"zetagaps: search failed: {exc}", file=sys.stderr)
        for c, h in exc.scan:
            print(f"  c={c:.4f}  h_opt={h:.10f}", file=sys.stderr)
        return EXIT_ACCURACY
    except ReproductionFailure as exc:
        print(f"zetagaps: {exc}", file=sys.stderr)
        return EXIT_REPRODUCTION
    except OSError as exc:
        print(f"zetagaps: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
