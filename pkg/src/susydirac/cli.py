"""Batch command-line front end: JSON config in, JSON/CSV results out.

Exit codes:
  0  success
  1  other runtime error
  2  configuration or schema error
  3  SUSY condition violated (V not zero or S not constant)
  4  box too small for a requested level, or too short to classify SUSY
  5  spectral parameter too close to an eigenvalue
  6  quantization rule does not match the SUSY phase
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from . import __version__
from .core import DEFAULT_ORDER, Grid, PhysicalConstants, PotentialSpec, default_grid
from .dirac import check_susy_condition, dirac_eigenspinors
from .errors import BoxTooSmall, Indeterminate, NearPole, RegimeMismatch, SusyDiracError
from .quasiclassical import (cbc_level, eij_level, relativistic_cbc_level, relativistic_eij_level)
from .resolvent import GridDiracResolvent, dirac_resolvent, gaussian_probes
from .witten import SusyPhase, classify_susy, witten_levels

EXIT_OK, EXIT_ERROR, EXIT_SCHEMA, EXIT_SUSY, EXIT_BOX, EXIT_POLE, EXIT_REGIME = 0, 1, 2, 3, 4, 5, 6
ENV_CONSTANTS = {"m": "SUSYDIRAC_M", "c": "SUSYDIRAC_C", "hbar": "SUSYDIRAC_HBAR"}

_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_COEFFS = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_COMPLEX = {"oneOf": [{"type": "number"},
                      {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}]}

CONFIG_SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["potential", "task"],
    "properties": {
        "constants": {
            "type": "object", "additionalProperties": False,
            "properties": {"m": _POSITIVE, "c": _POSITIVE, "hbar": _POSITIVE},
        },
        "potential": {
            "type": "object",
            "required": ["family"],
            "oneOf": [
                {"additionalProperties": False,
                 "required": ["omega"],
                 "properties": {"family": {"const": "oscillator"}, "omega": _POSITIVE,
                                "S": _COEFFS, "V": _COEFFS}},
                {"additionalProperties": False,
                 "required": ["d"],
                 "properties": {"family": {"const": "power"}, "d": {"type": "number", "minimum": 1},
                                "signed": {"type": "boolean"}, "strength": {"type": "number"},
                                "offset": {"type": "number"}, "S": _COEFFS, "V": _COEFFS}},
                {"additionalProperties": False,
                 "required": ["file"],
                 "properties": {"family": {"const": "tabulated"}, "file": {"type": "string"},
                                "quantity": {"enum": ["phi", "W"]}, "S": _COEFFS, "V": _COEFFS}},
            ],
        },
        "grid": {
            "type": "object", "additionalProperties": False,
            "properties": {"x_min": {"type": "number"}, "x_max": {"type": "number"},
                           "n_points": {"type": "integer", "minimum": 16},
                           "order": {"enum": [2, 4, 6, 8]}},
        },
        "task": {
            "type": "object",
            "required": ["type"],
            "oneOf": [
                {"additionalProperties": False,
                 "required": ["k"],
                 "properties": {"type": {"const": "spectrum"}, "k": {"type": "integer", "minimum": 1},
                                "spinors": {"type": "boolean"},
                                "regime": {"enum": ["unbroken", "broken"]}}},
                {"additionalProperties": False,
                 "required": ["z", "points"],
                 "properties": {"type": {"const": "greens"},
                                "z": {"type": "array", "items": _COMPLEX, "minItems": 1},
                                "points": {"type": "array", "minItems": 1,
                                           "items": {"type": "array", "items": {"type": "number"},
                                                     "minItems": 2, "maxItems": 2}},
                                "method": {"enum": ["grid_inverse", "spectral_truncated",
                                                    "closed_form_oscillator"]},
                                "truncation": {"type": "integer", "minimum": 2},
                                "probe_width": _POSITIVE}},
                {"additionalProperties": False,
                 "properties": {"type": {"const": "quasiclassical"},
                                "n_min": {"type": "integer", "minimum": 0},
                                "n_max": {"type": "integer", "minimum": 0},
                                "rule": {"enum": ["auto", "cbc", "eij"]},
                                "regime": {"enum": ["unbroken", "broken"]},
                                "compare": {"type": "boolean"}}},
                {"additionalProperties": False,
                 "properties": {"type": {"const": "validate"}}},
            ],
        },
        "tolerance": _POSITIVE,
    },
}


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# output formatting


def fmt(v) -> str:
    """Fixed 17-significant-digit rendering used in every output file."""
    if v is None:
        return ""
    v = float(v)
    if not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return format(v, ".17g")


def dumps_json(obj, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return fmt(v) if math.isfinite(v) else "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{dumps_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path: Path, payload: dict, meta: dict) -> None:
    path.write_text(dumps_json({**meta, **payload}) + "\n", encoding="utf-8")


def write_csv(path: Path, header: list[str], rows: list[list], meta: dict) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=",", lineterminator="\n")
    w.writerow(header + ["config_hash", "version"])
    for r in rows:
        w.writerow([c if isinstance(c, str) else fmt(c) for c in r] + [meta["config_hash"], meta["version"]])
    path.write_text(buf.getvalue(), encoding="utf-8")


# ---------------------------------------------------------------------------
# configuration


def load_config(path: Path) -> dict:
    try:
        cfg = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"schema error at {where}: {exc.message}") from exc
    return cfg


def resolve_constants(cfg: dict, environ=os.environ) -> PhysicalConstants:
    vals = {"m": 1.0, "c": 1.0, "hbar": 1.0}
    vals.update(cfg.get("constants", {}))
    for key, var in ENV_CONSTANTS.items():
        if var in environ:
            try:
                vals[key] = float(environ[var])
            except ValueError as exc:
                raise ConfigError(f"{var} is not a number") from exc
    try:
        return PhysicalConstants(**vals)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _load_table(path: Path) -> np.ndarray:
    try:
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read tabulated potential {path}: {exc}") from exc
    if data.shape[1] != 2:
        raise ConfigError("tabulated potential file needs two columns: x, value")
    return data


def build_spec(cfg: dict, base: Path) -> tuple[PotentialSpec, dict]:
    """PotentialSpec plus the resolved potential block used for hashing."""
    p = dict(cfg["potential"])
    sv = {k: p[k] for k in ("S", "V") if k in p}
    resolved = dict(p)
    try:
        if p["family"] == "oscillator":
            spec = PotentialSpec.oscillator(p["omega"], **sv)
        elif p["family"] == "power":
            spec = PotentialSpec.power(p["d"], p.get("signed", False), p.get("strength", 1.0),
                                       p.get("offset", 0.0), **sv)
        else:
            path = Path(p["file"])
            path = path if path.is_absolute() else base / path
            data = _load_table(path)
            resolved["file_sha256"] = hashlib.sha256(path.read_bytes()).hexdigest()
            spec = PotentialSpec.tabulated(data[:, 0], data[:, 1], p.get("quantity", "phi"), **sv)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return spec, resolved


def build_grid(cfg: dict, spec: PotentialSpec, consts: PhysicalConstants) -> tuple[Grid, int]:
    g = cfg.get("grid", {})
    order = g.get("order", DEFAULT_ORDER)
    base = default_grid(spec, consts, g.get("n_points", 4001))
    try:
        grid = Grid(g.get("x_min", base.x_min), g.get("x_max", base.x_max), g.get("n_points", base.n_points))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return grid, order


def config_hash(effective: dict) -> str:
    blob = json.dumps(effective, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class Run:
    """Everything a task needs, resolved once."""

    def __init__(self, cfg: dict, base: Path, threads: int, tolerance: float | None):
        self.cfg = cfg
        self.task = cfg["task"]
        self.consts = resolve_constants(cfg)
        self.spec, pot = build_spec(cfg, base)
        self.grid, self.order = build_grid(cfg, self.spec, self.consts)
        self.threads = max(1, threads)
        self.tolerance = tolerance if tolerance is not None else cfg.get("tolerance")
        effective = {
            "constants": {"m": self.consts.m, "c": self.consts.c, "hbar": self.consts.hbar},
            "potential": pot,
            "grid": {"x_min": self.grid.x_min, "x_max": self.grid.x_max,
                     "n_points": self.grid.n_points, "order": self.order},
            "task": self.task,
            "tolerance": self.tolerance,
        }
        self.meta = {"tool": "susydirac", "version": __version__, "config_hash": config_hash(effective)}

    def susy_report(self):
        tol = self.tolerance if self.tolerance is not None else 1e-10
        return check_susy_condition(self.spec, self.consts, self.grid, tol)

    def plain_spec(self) -> PotentialSpec:
        """The potential with S and V removed once the SUSY condition is known to hold."""
        return replace(self.spec, S=None, V=None)

    def pool_map(self, fn, items):
        if self.threads == 1:
            return [fn(i) for i in items]
        with ThreadPoolExecutor(max_workers=self.threads) as ex:
            return list(ex.map(fn, items))


class SusyConditionFailed(Exception):
    pass


def _require_susy(run: Run, allow_constant_s: bool = False):
    rep = run.susy_report()
    if not rep.passed:
        raise SusyConditionFailed("; ".join(rep.messages))
    if not allow_constant_s and abs(rep.S_mean) > rep.tolerance:
        raise ConfigError("a constant scalar potential is only supported by the spectrum and validate tasks")
    return rep


def _phase(run: Run, override: str | None) -> SusyPhase:
    spec = run.plain_spec()
    if override == "broken":
        return SusyPhase.BROKEN
    phase = classify_susy(spec, run.consts, run.grid)
    if override == "unbroken" and not phase.unbroken:
        raise RegimeMismatch("regime override 'unbroken' but no normalizable zero mode exists")
    return phase


# ---------------------------------------------------------------------------
# tasks


def cmd_validate(run: Run, out: Path) -> int:
    rep = run.susy_report()
    report: dict[str, Any] = {"susy_condition": "pass" if rep.passed else "fail"}
    try:
        phase = classify_susy(run.plain_spec(), run.consts, run.grid)
        report["susy"] = "unbroken" if phase.unbroken else "broken"
        report["phase"] = phase.value
    except Indeterminate as exc:
        warnings.warn(f"SUSY phase is indeterminate: {exc}", stacklevel=2)
        report["susy"] = "indeterminate"
        report["phase"] = None
    report["max_abs_V"] = rep.max_abs_V
    report["S_spread"] = rep.S_spread
    report["effective_rest_energy"] = rep.effective_rest_energy if rep.passed else None
    report["effective_mass"] = rep.effective_rest_energy / run.consts.c**2 if rep.passed else None
    report["messages"] = list(rep.messages)
    write_json(out / "validate.json", report, run.meta)
    return EXIT_OK if rep.passed else EXIT_SUSY


def cmd_spectrum(run: Run, out: Path) -> int:
    rep = _require_susy(run, allow_constant_s=True)
    spec = run.plain_spec()
    consts = run.consts
    phase = _phase(run, run.task.get("regime"))
    k = run.task["k"]
    n_max = k - 1 if phase.unbroken else k
    levels = witten_levels(spec, consts, run.grid, n_max, run.order, phase)
    # a constant S only shifts the rest energy: E² = (mc² + S)² + 2mc²ε
    rest = rep.effective_rest_energy
    entries = []
    for lv in levels.levels:
        if lv.n == 0:
            entries.append({"n": 0, "epsilon": 0.0, "epsilon_grid": lv.eps, "E_plus": None, "E_minus": -rest})
            continue
        e = math.sqrt(rest * rest + 2 * consts.mc2 * lv.eps)
        entries.append({"n": lv.n, "epsilon": lv.eps, "E_plus": e, "E_minus": -e})
    payload = {"susy": "unbroken" if levels.unbroken else "broken", "phase": levels.phase.value,
               "rest_energy": rest, "levels": entries}
    write_json(out / "spectrum.json", payload, run.meta)
    if run.task.get("spinors", False):
        pairs = dirac_eigenspinors(levels, consts)
        header = ["x"]
        cols = []
        for p in pairs:
            tag = f"n{p.n}{'p' if p.branch == '+' else 'm'}"
            header += [f"{tag}_upper_re", f"{tag}_upper_im", f"{tag}_lower_re", f"{tag}_lower_im"]
            cols += [p.upper.real, p.upper.imag, p.lower.real, p.lower.imag]
        data = np.column_stack([run.grid.x] + cols)
        write_csv(out / "spinors.csv", header, data.tolist(), run.meta)
    return EXIT_OK


def _as_complex(v) -> complex:
    return complex(v) if not isinstance(v, list) else complex(v[0], v[1])


def cmd_greens(run: Run, out: Path) -> int:
    _require_susy(run)
    spec = run.plain_spec()
    consts = run.consts
    method = run.task.get("method", "grid_inverse")
    truncation = run.task.get("truncation", 400)
    points = np.asarray(run.task["points"], dtype=float)
    zs = [_as_complex(v) for v in run.task["z"]]
    with_cf = spec.family == "oscillator" and method != "closed_form_oscillator"
    width = run.task.get("probe_width", 0.25 * spec.natural_length(consts))

    def one(z):
        kern = dirac_resolvent(z, spec, consts, points, method, run.grid, run.order, truncation)
        cf = None
        if with_cf:
            cf = dirac_resolvent(z, spec, consts, np.column_stack([kern.x2, kern.x1]),
                                 "closed_form_oscillator").entries
        resid = None
        if method == "grid_inverse":
            solver = GridDiracResolvent(spec, consts, run.grid, z, run.order)
            resid = {}
            for x1 in np.unique(kern.x1):
                resid[float(x1)] = solver.identity_residual(gaussian_probes(run.grid, [x1], width))
        return kern, cf, resid

    results = run.pool_map(one, zs)
    labels = ["G11", "G12", "G21", "G22"]
    header = ["z_re", "z_im", "x2", "x1"]
    header += [f"{l}_{part}" for l in labels for part in ("re", "im")]
    header += ["method"]
    if with_cf:
        header += [f"cf_{l}_{part}" for l in labels for part in ("re", "im")]
    header += ["residual", "tail_estimate"]
    rows = []
    for z, (kern, cf, resid) in zip(zs, results):
        for i in range(len(kern.x2)):
            g = kern.entries[i].ravel()
            row = [z.real, z.imag, kern.x2[i], kern.x1[i]]
            row += [v for c in g for v in (c.real, c.imag)]
            row += [kern.method]
            if with_cf:
                row += [v for c in cf[i].ravel() for v in (c.real, c.imag)]
            row += [resid[float(kern.x1[i])] if resid is not None else None, kern.tail_estimate]
            rows.append(row)
    write_csv(out / "greens.csv", header, rows, run.meta)
    return EXIT_OK


def cmd_quasiclassical(run: Run, out: Path) -> int:
    _require_susy(run)
    spec = run.plain_spec()
    consts = run.consts
    override = run.task.get("regime")
    phase = _phase(run, override)
    regime = "unbroken" if phase.unbroken else "broken"
    rule = run.task.get("rule", "auto")
    if rule == "auto":
        rule = "cbc" if regime == "unbroken" else "eij"
    if (rule == "cbc") != (regime == "unbroken"):
        raise RegimeMismatch(f"rule {rule} requested but SUSY is {regime}")
    first = 0 if rule == "cbc" else 1
    n_min = run.task.get("n_min", first)
    n_max = run.task.get("n_max", n_min + 5)
    if n_min < first or n_max < n_min:
        raise ConfigError(f"level range [{n_min}, {n_max}] invalid for the {rule} rule (starts at {first})")
    tol = run.tolerance if run.tolerance is not None else 1e-9
    nonrel = cbc_level if rule == "cbc" else eij_level
    rel = relativistic_cbc_level if rule == "cbc" else relativistic_eij_level
    qc_spec = spec.flipped() if phase is SusyPhase.UNBROKEN_PLUS_AFTER_FLIP else spec
    ns = list(range(n_min, n_max + 1))

    def one(n):
        return nonrel(qc_spec, consts, n, regime, tol), rel(qc_spec, consts, n, regime, tol)

    results = run.pool_map(one, ns)
    grid_eps = None
    if run.task.get("compare", False):
        levels = witten_levels(spec, consts, run.grid, n_max, run.order, phase)
        grid_eps = {lv.n: lv.eps for lv in levels.levels}
    rows = []
    for n, (a, b) in zip(ns, results):
        e_plus, e_minus = b.energies
        row = {"n": n, "epsilon_qc": a.value, "E_plus_qc": e_plus, "E_minus_qc": e_minus,
               "x_L": a.turning_points[0] if n > 0 or rule == "eij" else None,
               "x_R": a.turning_points[1] if n > 0 or rule == "eij" else None,
               "quadrature_error": max(a.quadrature_error, b.quadrature_error)}
        if grid_eps is not None:
            ge = grid_eps.get(n)
            row["epsilon_grid"] = ge
            row["relative_deviation"] = (abs(a.value - ge) / abs(ge) if ge not in (None, 0.0)
                                         else abs(a.value - (ge or 0.0)))
        rows.append(row)
    write_json(out / "qc.json", {"rule": rule, "susy": regime, "levels": rows}, run.meta)
    return EXIT_OK


TASKS = {"validate": cmd_validate, "spectrum": cmd_spectrum, "greens": cmd_greens,
         "quasiclassical": cmd_quasiclassical}


def build_parser() -> argparse.ArgumentParser:
    epilog = ("exit codes: 0 ok, 1 runtime error, 2 config/schema error, 3 SUSY condition "
              "failure, 4 box too small or SUSY phase undecidable on it, 5 z near an eigenvalue, 6 regime mismatch. "
              "Environment variables " + ", ".join(ENV_CONSTANTS.values()) +
              " override the constants block.")
    p = argparse.ArgumentParser(prog="susydirac", description="SUSY Dirac solver (batch mode)",
                                epilog=epilog)
    p.add_argument("--config", required=True, type=Path, help="JSON run configuration")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory (created if missing)")
    p.add_argument("--threads", type=int, default=1, help="worker threads across z values or levels")
    p.add_argument("--tolerance", type=float, default=None,
                   help="SUSY-condition tolerance and quasi-classical quadrature tolerance")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if args.tolerance is not None and not args.tolerance > 0:
            raise ConfigError("--tolerance must be positive")
        cfg = load_config(args.config)
        run = Run(cfg, args.config.resolve().parent, args.threads, args.tolerance)
        args.out.mkdir(parents=True, exist_ok=True)
        return TASKS[cfg["task"]["type"]](run, args.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except SusyConditionFailed as exc:
        print(f"error: SUSY condition violated: {exc}", file=sys.stderr)
        return EXIT_SUSY
    except (BoxTooSmall, Indeterminate) as exc:
        # an undecided SUSY phase also means the grid does not reach far enough
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BOX
    except NearPole as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_POLE
    except RegimeMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except (SusyDiracError, ValueError, ArithmeticError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
