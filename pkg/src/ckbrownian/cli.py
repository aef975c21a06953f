"""Command-line entry point: ``simulate``, ``ensemble`` and ``verify``.

Config files are flat ``key = value`` text; ``#`` starts a comment.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import GaussianPacket, PhysicalParams, SpatialGrid, TimeGrid, ValidationError, validate
from .ensemble import decompose_uncertainty, default_probe_times, run_ensemble
from .kernels import compute_path_integrals, gaussian_width
from .noise import make_constant_force, make_white_noise
from . import acceptance, tdse


class ConfigError(ValueError):
    pass


# key -> (type, default); a default of None marks a mandatory key
_SCHEMA = {
    "m": (float, None),
    "eta": (float, None),
    "D": (float, 0.0),
    "sigma0": (float, 1.0),
    "x0": (float, 0.0),
    "t_end": (float, 10.0),
    "n_steps": (int, 4096),
    "x_min": (float, -32.0),
    "x_max": (float, 32.0),
    "n_points": (int, 1024),
    "n_paths": (int, 2000),
    "seed": (int, 0),
    "engine": (str, "analytic"),
    "force": (str, "white"),
    "F0": (float, 0.0),
    "probe_times": (list, ()),
}

ENGINE_CHOICES = ("analytic", "solver", "both")
FORCE_CHOICES = ("white", "constant", "zero")

SIMULATE_COLUMNS = ("t", "tau", "norm", "mean_x", "var_x", "sigma_analytic", "f1", "I", "f2")
ENSEMBLE_COLUMNS = ("t", "tau", "center_mean", "center_var", "dx_qu", "dx_cl_sample",
                    "dx_cl_analytic", "dx_total")


@dataclass
class RunConfig:
    values: dict
    source: str = "<defaults>"
    lines: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    @property
    def params(self) -> PhysicalParams:
        return PhysicalParams(self["m"], self["eta"], self["D"])

    @property
    def packet(self) -> GaussianPacket:
        return GaussianPacket(self["sigma0"], self["x0"])

    @property
    def tgrid(self) -> TimeGrid:
        return TimeGrid(self["t_end"], self["n_steps"])

    @property
    def xgrid(self) -> SpatialGrid:
        return SpatialGrid(self["x_min"], self["x_max"], self["n_points"])


def _convert(key, kind, raw, lineno, source):
    try:
        if kind is float:
            return float(raw)
        if kind is int:
            return int(raw)
        if kind is list:
            return tuple(float(v) for v in raw.split(",") if v.strip())
        return raw
    except ValueError:
        raise ConfigError(f"{source}:{lineno}: cannot parse {key} = {raw!r}") from None


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    values, lines = {}, {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} "
                              f"(first set on line {lines[key]})")
        values[key] = _convert(key, _SCHEMA[key][0], raw, lineno, source)
        lines[key] = lineno
    for key, (_, default) in _SCHEMA.items():
        if key not in values:
            if default is None:
                raise ConfigError(f"{source}: missing mandatory key {key!r}")
            values[key] = default
    if values["engine"] not in ENGINE_CHOICES:
        raise ConfigError(f"{source}:{lines.get('engine', 0)}: engine must be one of "
                          f"{', '.join(ENGINE_CHOICES)}")
    if values["force"] not in FORCE_CHOICES:
        raise ConfigError(f"{source}:{lines.get('force', 0)}: force must be one of "
                          f"{', '.join(FORCE_CHOICES)}")
    return RunConfig(values, source, lines)


def load_config(path) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(), str(path))


def fmt(value) -> str:
    """Shortest round-trip decimal form."""
    return repr(float(value))


def write_csv(path: Path, columns, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return None if not math.isfinite(obj) else float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path: Path, payload: dict):
    payload = dict(payload, created=_dt.datetime.now(_dt.timezone.utc).isoformat())
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def _validated(cfg: RunConfig):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        validate(cfg.params, cfg.tgrid, cfg.xgrid, cfg.packet)
    return [str(w.message) for w in caught]


def _config_record(cfg: RunConfig) -> dict:
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in cfg.values.items()}


def _force_path(cfg: RunConfig, seed: int):
    tgrid = cfg.tgrid
    if cfg["force"] == "white":
        return make_white_noise(cfg.params, tgrid, seed)
    if cfg["force"] == "constant":
        return make_constant_force(cfg["F0"], tgrid)
    return make_constant_force(0.0, tgrid)


def cmd_simulate(cfg: RunConfig, out: Path, seed: int, engine: str) -> dict:
    """One force path; writes ``simulate_<engine>.csv`` and ``manifest.json``."""
    out.mkdir(parents=True, exist_ok=True)
    notes = _validated(cfg)
    params, packet = cfg.params, cfg.packet
    path = _force_path(cfg, seed)
    integrals = compute_path_integrals(path, params)
    sigma = np.asarray(gaussian_width(packet.sigma0, params.m, integrals.tau))
    times = integrals.times
    engines = ("analytic", "solver") if engine == "both" else (engine,)
    series = {}
    if "analytic" in engines:
        series["analytic"] = (np.ones_like(times), packet.x0 + integrals.f1, sigma**2)
    if "solver" in engines:
        res = tdse.run(packet, path, params, tdse.SolverConfig(cfg.xgrid, cfg.tgrid))
        series["solver"] = (res.norm, res.mean_x, res.var_x)

    files = []
    for name, (norm, mean_x, var_x) in series.items():
        target = out / f"simulate_{name}.csv"
        rows = zip(times, integrals.tau, norm, mean_x, var_x, sigma, integrals.f1,
                   integrals.I, integrals.f2)
        write_csv(target, SIMULATE_COLUMNS, rows)
        files.append(target.name)

    manifest = {
        "command": "simulate",
        "config": _config_record(cfg),
        "seed": path.meta.seed,
        "force_kind": path.meta.kind,
        "engine": engine,
        "files": files,
        "warnings": notes,
    }
    if len(series) == 2:
        gap = float(np.max(np.abs(series["solver"][1] - series["analytic"][1])))
        manifest["max_center_gap_solver_vs_analytic"] = gap
    write_json(out / "manifest.json", manifest)
    return manifest


def cmd_ensemble(cfg: RunConfig, out: Path, seed: int, engine: str) -> dict:
    """Noise ensemble; writes ``ensemble_<engine>.csv`` and ``report.json``."""
    out.mkdir(parents=True, exist_ok=True)
    notes = _validated(cfg)
    params, packet, tgrid = cfg.params, cfg.packet, cfg.tgrid
    n_paths = cfg["n_paths"]
    probes = list(cfg["probe_times"]) or default_probe_times(params, tgrid.t_end)
    tol = 3 * math.sqrt(2 / (n_paths - 1)) if n_paths > 1 else math.inf
    engines = ("analytic", "solver") if engine == "both" else (engine,)
    report_json = {
        "command": "ensemble",
        "config": _config_record(cfg),
        "base_seed": seed,
        "engine": engine,
        "tolerances": {"variance_rel": tol},
        "warnings": notes,
        "files": [],
        "runs": {},
    }
    for name in engines:
        config = tdse.SolverConfig(cfg.xgrid, tgrid) if name == "solver" else None
        rep = run_ensemble(params, packet, tgrid, n_paths, seed, engine=name,
                           solver_config=config)
        rows = []
        for j, t in enumerate(rep.times):
            qu, cl, cl_an, total = decompose_uncertainty(rep, j)
            rows.append((t, rep.tau[j], rep.center_mean[j], rep.center_var[j], qu, cl,
                         cl_an, total))
        target = out / f"ensemble_{name}.csv"
        write_csv(target, ENSEMBLE_COLUMNS, rows)
        report_json["files"].append(target.name)
        checks = []
        for t in probes:
            j = tgrid.index_of(t)
            law = rep.dx_cl_analytic[j] ** 2
            rel = abs(rep.center_var[j] / law - 1) if law > 0 else math.nan
            checks.append({"t": float(rep.times[j]), "center_var": rep.center_var[j],
                           "law": law, "rel_error": rel,
                           "pass": bool(rel <= tol) if math.isfinite(rel) else None})
        report_json["runs"][name] = {"seeds": list(rep.seeds), "probes": checks}
    write_json(out / "report.json", report_json)
    return report_json


def cmd_verify(out: Path | None = None, echo=print) -> bool:
    results = acceptance.run_all(echo)
    passed = all(r.passed for r in results)
    echo(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "verify.json", {
            "command": "verify",
            "passed": passed,
            "checks": [{"criterion": r.criterion, "name": r.name, "pass": r.passed,
                        "measured": r.measured, "tolerance": r.tolerance,
                        "detail": r.detail} for r in results],
        })
    return passed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ckbrownian", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("simulate", "ensemble"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="key = value config file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, help="overrides the config seed")
        p.add_argument("--engine", choices=ENGINE_CHOICES, help="overrides the config engine")
    p = sub.add_parser("verify")
    p.add_argument("--out", help="also write verify.json here")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return 0 if cmd_verify(Path(args.out) if args.out else None) else 1
        cfg = load_config(args.config)
        seed = args.seed if args.seed is not None else cfg["seed"]
        engine = args.engine or cfg["engine"]
        handler = cmd_simulate if args.command == "simulate" else cmd_ensemble
        result = handler(cfg, Path(args.out), seed, engine)
    except (ConfigError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except tdse.SolverError as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return 3
    for note in result.get("warnings", []):
        print(f"warning: {note}", file=sys.stderr)
    print(f"wrote {', '.join(result['files'])} to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
