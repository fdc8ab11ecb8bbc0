"""Command line runner: ``steady``, ``evolve``, ``verify``, ``sweep`` and ``compare``.

Configurations are JSON files validated against ``data/config.schema.json``;
a file with a ``scenarios`` list is a suite and ``--scenario`` picks one
entry.  Without ``--config`` the bundled ``paper-suite.json`` is used.
Numeric series go to CSV with 17 significant digits, summaries to JSON.

Exit codes: 0 success, 2 numerical failure, 3 configuration error.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import os
import sys
import tempfile
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import evolve as ev
from . import relenergy as rel
from . import steady as st
from .eos import EosSpec
from .errors import BarostabError, ConfigError

EXIT_OK = 0
EXIT_NUMERICAL = 2
EXIT_CONFIG = 3
OUT_ENV = "BAROSTAB_OUT"
DEFAULT_OUT = "barostab-out"
SUITE_NAME = "paper-suite.json"
SWEEP_PARAMETERS = ("u_B_plus_minus_gap", "u_B", "amplitude")


# ---------------------------------------------------------------------------
# loading

def _data_text(name: str) -> str:
    return resources.files("barostab.data").joinpath(name).read_text()


def schema(name: str) -> dict:
    """One of the bundled JSON schemas: ``config``, ``suite`` or ``report``."""
    return json.loads(_data_text(f"{name}.schema.json"))


def _validate(doc, name: str, what: str):
    try:
        jsonschema.Draft202012Validator(schema(name)).validate(doc)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{what}: {where}: {exc.message}") from None


def _read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None


def load_scenario(path: str | None, name: str | None = None) -> tuple[str, dict, dict]:
    """``(name, config, expectations)`` from a config or suite file.

    ``path=None`` reads the bundled suite.
    """
    if path is None:
        doc = json.loads(_data_text(SUITE_NAME))
        label = SUITE_NAME
    else:
        doc = _read_json(path)
        label = str(path)
    if not isinstance(doc, dict):
        raise ConfigError(f"{label}: top level must be an object")
    if "scenarios" in doc:
        _validate(doc, "suite", label)
        names = [s["name"] for s in doc["scenarios"]]
        if len(set(names)) != len(names):
            raise ConfigError(f"{label}: scenario names must be unique")
        if name is None:
            if len(names) != 1:
                raise ConfigError(f"{label}: choose a scenario with --scenario ({', '.join(names)})")
            name = names[0]
        if name not in names:
            raise ConfigError(f"{label}: no scenario {name!r}")
        entry = doc["scenarios"][names.index(name)]
        config = entry["config"]
        _validate(config, "config", f"{label}:{name}")
        expect = dict(config.get("expectations", {}))
        expect.update(entry.get("expectations", {}))
        _validate({"expectations": expect}, "config", f"{label}:{name}")
        return name, config, expect
    _validate(doc, "config", label)
    if name is not None and doc.get("name", name) != name:
        raise ConfigError(f"{label} holds scenario {doc.get('name')!r}, not {name!r}")
    default = Path(path).stem if path is not None else "scenario"
    return doc.get("name", default), doc, dict(doc.get("expectations", {}))


def scenario_names(path: str | None = None) -> list[str]:
    doc = json.loads(_data_text(SUITE_NAME)) if path is None else _read_json(path)
    return [s["name"] for s in doc.get("scenarios", [])]


# ---------------------------------------------------------------------------
# output

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, header, rows):
    """Atomic CSV write; floats with 17 significant digits."""
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    _atomic_write(Path(path), "\n".join(lines) + "\n")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x) if math.isfinite(x) else None
    return x


def write_report(path: Path, report: dict) -> dict:
    """Validate against ``report.schema.json`` and write atomically."""
    report = _jsonable(report)
    jsonschema.Draft202012Validator(schema("report")).validate(report)
    _atomic_write(Path(path), json.dumps(report, indent=2, sort_keys=True) + "\n")
    return report


def out_dir(arg: str | None) -> Path:
    """``$BAROSTAB_OUT`` wins over ``--out``, which wins over the default."""
    return Path(os.environ.get(OUT_ENV) or arg or DEFAULT_OUT)


# ---------------------------------------------------------------------------
# expectations

def _check_expectations(expect: dict, report: dict) -> dict:
    out = {}
    decay = report.get("decay", {})
    if "monotone" in expect:
        out["monotone"] = decay.get("monotone") == expect["monotone"]
    if "decay_ratio" in expect:
        ratio = decay.get("final_over_post_transient")
        out["decay_ratio"] = ratio is not None and ratio <= expect["decay_ratio"]
    if "final_ratio" in expect:
        ratio = decay.get("final_over_initial")
        out["final_ratio"] = ratio is not None and ratio <= expect["final_ratio"]
    if "no_clamps" in expect:
        out["no_clamps"] = (report.get("clamp_events", 0) == 0) == expect["no_clamps"]
    if "residual_cap" in expect:
        res = max(report.get("residual_continuity", math.inf),
                  report.get("residual_momentum", math.inf))
        out["residual_cap"] = res <= expect["residual_cap"]
    if "exponents" in expect:
        spec = dict(expect["exponents"])
        tol = spec.pop("tol", 0.2)
        got = report.get("decay_exponents", {})
        out["exponents"] = all(k in got and abs(got[k] - v) <= tol for k, v in spec.items())
    if "distances_decreasing" in expect:
        out["distances_decreasing"] = (report.get("strictly_decreasing")
                                       == expect["distances_decreasing"])
    return out


def _finish(report: dict, expect: dict) -> dict:
    checks = _check_expectations(expect, report)
    report["expectations"] = checks
    report["expectations_met"] = all(checks.values())
    return report


# ---------------------------------------------------------------------------
# steady

def _model(config: dict):
    eos = EosSpec.from_dict(config.get("eos", {}))
    geometry = dict(config.get("geometry", {"kind": "strip"}))
    solver = config.get("solver", {})
    if geometry.get("kind") == st.EXTERIOR and "r_trunc" in solver:
        geometry.setdefault("r_trunc", solver["r_trunc"])
    bdata = st.BoundaryData.from_dict(config.get("boundary", {}))
    bdata.validate_for(eos)
    return eos, st.Geometry.from_dict(geometry), bdata


PROFILE_COLUMNS = ("r", "rho_tilde", "u_tilde", "du_tilde", "div_u", "residual_c", "residual_m")


def cmd_steady(name: str, config: dict, expect: dict, out: Path) -> dict:
    """Solve, cross-check and write ``<name>/profile.csv`` and ``steady.json``."""
    eos, geometry, bdata = _model(config)
    solver = config.get("solver", {})
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", st.TruncationWarning)
        profile = st.solve_steady(eos, bdata, geometry, tol=solver.get("tol"),
                                  n_cells=int(solver.get("n_cells", st.DEFAULT_CELLS)))
    rc, rm = st.steady_residual(profile, eos)
    pc, pm = st.steady_residual(profile, eos, pointwise=True)
    target = out / name
    write_csv(target / "profile.csv", PROFILE_COLUMNS,
              zip(profile.grid, profile.rho_tilde, profile.u_tilde, profile.du_tilde,
                  profile.div_u, pc, pm))
    report = {"command": "steady", "status": "ok", "name": name,
              "geometry": geometry.to_dict(), "n_cells": profile.n_cells,
              "Lambda": profile.Lambda, "mass_flux": profile.mass_flux,
              "residual_continuity": rc, "residual_momentum": rm,
              "properties": st.check_properties(profile),
              "flags": {k: v for k, v in profile.flags.items()},
              "warnings": [str(w.message) for w in caught]}
    if geometry.kind == st.EXTERIOR:
        report["decay_exponents"] = st.decay_exponents(profile)
    return write_report(target / "steady.json", _finish(report, expect))


# ---------------------------------------------------------------------------
# evolve

def _run_options(config: dict, rc: ev.RunConfig) -> dict:
    run = config.get("run", {})
    return {"transient": float(run.get("transient", 2.0 * rc.flow_through_time)),
            "stop_ratio": run.get("stop_ratio"),
            "reference": run.get("reference", "discrete"),
            "snapshots": sorted(float(t) for t in run.get("snapshots", []))}


def _stop_rule(transient: float, ratio: float | None):
    if ratio is None:
        return None
    base = {}

    def stop(samples):
        s = samples[-1]
        if s.t < transient - 1e-12 * max(1.0, transient):
            return False
        base.setdefault("E", s.E)
        return len(samples) >= 10 and s.E <= ratio * base["E"]

    return stop


def _positivity(samples) -> dict:
    """Sign checks of the ledger terms, tolerance 1e-12 of each series' scale."""
    out = {}
    for key in ("E", "D", "B_out", "B_in"):
        y = np.array([getattr(s, key) for s in samples])
        scale = float(np.max(np.abs(y))) if y.size else 0.0
        out[key] = bool(np.all(y >= -1e-12 * scale))
    return out


def evolve_scenario(config: dict, seed: int | None = None, profile=None):
    """Run one evolution with the ledger attached.

    Returns ``(run_config, options, samples, result, snapshots)``.
    """
    rc = ev.RunConfig.from_dict(config)
    if seed is not None:
        rc = replace(rc, seed=int(seed))
    opts = _run_options(config, rc)
    if profile is None:
        profile = st.solve_steady(rc.eos, rc.boundary, rc.geometry, n_cells=rc.steady_cells)
    ref = ev.discrete_steady_state(rc, profile) if opts["reference"] == "discrete" else profile
    recorder = rel.LedgerRecorder(ref, rc.eos, rc.boundary)
    pending = list(opts["snapshots"])
    snaps = []

    def callback(state):
        sample = recorder(state)
        while pending and state.t >= pending[0] - 0.5 * rc.sample_dt:
            pending.pop(0)
            snaps.append((state.t, state.r.copy(), state.rho.copy(), state.u.copy()))
        return sample

    result = ev.run(rc, callback, profile=profile,
                    stop=_stop_rule(opts["transient"], opts["stop_ratio"]))
    return rc, opts, result.samples, result, snaps


def evolve_report(name: str, rc, opts, samples, result) -> dict:
    decay = rel.decay_report(samples, transient=opts["transient"])
    ft = rc.flow_through_time
    after = [s.lhs_minus_rhs for s in samples if s.t >= ft - 1e-12 * ft]
    report = {"command": "evolve", "status": "ok", "name": name,
              "geometry": rc.geometry.to_dict(), "n_cells": rc.n_cells, "order": rc.order,
              "flow_through_time": ft, "transient": opts["transient"],
              "t_final": samples[-1].t, "steps": result.steps,
              "clamp_events": result.state.clamp_events,
              "seed": rc.seed, "reference": opts["reference"],
              "positivity": _positivity(samples),
              "min_lhs_minus_rhs_after_flow_through": min(after) if after else None,
              "decay": decay}
    if rc.geometry.kind == st.EXTERIOR:
        cum = rel.cumulative(samples, "W_dens7")
        t = np.array([s.t for s in samples])
        half = int(np.argmax(t >= 0.5 * t[-1]))
        total = float(cum[-1])
        report["W_dens7_cumulative"] = total
        report["W_dens7_final_half_share"] = (float((cum[-1] - cum[half]) / total)
                                              if total > 0 else 0.0)
    return report


def _trajectory_rows(samples, exterior: bool):
    header = list(rel.CSV_COLUMNS)
    if exterior:
        header += ["W_press7", "W_dens7", "W_dens7_cumulative"]
        cum = rel.cumulative(samples, "W_dens7")
    rows = []
    for k, s in enumerate(samples):
        d = s.as_dict()
        row = [d[c] for c in rel.CSV_COLUMNS]
        if exterior:
            row += [s.W_press7, s.W_dens7, cum[k]]
        rows.append(row)
    return header, rows


def cmd_evolve(name: str, config: dict, expect: dict, out: Path,
               seed: int | None = None) -> dict:
    """Trajectory CSV, optional snapshots and the decay report."""
    rc, opts, samples, result, snaps = evolve_scenario(config, seed)
    target = out / name
    header, rows = _trajectory_rows(samples, rc.geometry.kind == st.EXTERIOR)
    write_csv(target / "trajectory.csv", header, rows)
    for t, r, rho, u in snaps:
        write_csv(target / f"snapshot_t{t:.6g}.csv", ("r", "rho", "u"), zip(r, rho, u))
    report = evolve_report(name, rc, opts, samples, result)
    report["wall_time"] = result.wall_time
    return write_report(target / "report.json", _finish(report, expect))


# ---------------------------------------------------------------------------
# verify

def read_trajectory(path) -> list[dict]:
    if not Path(path).exists():
        raise ConfigError(f"trajectory not found: {path}")
    data = np.genfromtxt(path, delimiter=",", names=True)
    data = np.atleast_1d(data)
    if data.dtype.names is None or not {"t", "E", "D"} <= set(data.dtype.names):
        raise ConfigError(f"{path}: needs columns t, E and D")
    return [{k: float(row[k]) for k in data.dtype.names} for row in data]


def cmd_verify(trajectory, transient: float, out: Path, name: str = "verify") -> dict:
    samples = read_trajectory(trajectory)
    report = {"command": "verify", "status": "ok", "name": name,
              "trajectory": str(trajectory), "transient": transient,
              "decay": rel.decay_report(samples, transient=transient)}
    return write_report(out / name / "verify.json", report)


# ---------------------------------------------------------------------------
# sweep

def sweep_config(base: dict, parameter: str, value: float) -> dict:
    """Copy of ``base`` with one swept parameter set."""
    cfg = copy.deepcopy(base)
    cfg.pop("sweep", None)
    cfg.pop("expectations", None)
    bd = cfg.setdefault("boundary", {})
    if parameter == "u_B_plus_minus_gap":
        bd["u_B_plus"] = bd.get("u_B_minus", 0.1) + value
    elif parameter == "u_B":
        bd["u_B"] = value
    elif parameter == "amplitude":
        init = cfg.setdefault("initial", {"kind": "perturbed"})
        init["kind"] = "perturbed"
        init["amplitude"] = value
    else:
        raise ConfigError(f"unknown sweep parameter {parameter!r}")
    return cfg


SWEEP_COLUMNS = ("value", "verdict", "monotone", "max_uptick", "final_over_post_transient",
                 "decay_rate", "clamp_events", "steps", "status")


def _sweep_row(k: int, value: float, cfg: dict, seed, rows_dir: Path) -> dict:
    try:
        rc, opts, samples, result, _ = evolve_scenario(cfg, seed)
        rep = evolve_report(f"row{k}", rc, opts, samples, result)
        d = rep["decay"]
        row = {"value": value, "verdict": d["verdict"], "monotone": d["monotone"],
               "max_uptick": d["max_uptick"],
               "final_over_post_transient": d["final_over_post_transient"],
               "decay_rate": d["decay_rate"], "clamp_events": rep["clamp_events"],
               "steps": rep["steps"], "status": "ok"}
    except (BarostabError, FloatingPointError, ArithmeticError) as exc:
        row = {"value": value, "verdict": "FAIL", "monotone": False, "max_uptick": math.nan,
               "final_over_post_transient": math.nan, "decay_rate": math.nan,
               "clamp_events": 0, "steps": 0, "status": f"{type(exc).__name__}: {exc}"}
    _atomic_write(rows_dir / f"row_{k:03d}.json",
                  json.dumps(_jsonable(row), indent=2, sort_keys=True) + "\n")
    return row


def cmd_sweep(name: str, config: dict, expect: dict, out: Path, threads: int = 1,
              seed: int | None = None) -> dict:
    """Run every sweep value (concurrently with ``threads`` workers)."""
    spec = config.get("sweep")
    if not spec:
        raise ConfigError("sweep needs a 'sweep' block with parameter and values")
    parameter, values = spec["parameter"], [float(v) for v in spec["values"]]
    target = out / name
    rows_dir = target / "rows"
    cfgs = [sweep_config(config, parameter, v) for v in values]
    for cfg in cfgs:
        ev.RunConfig.from_dict(cfg)  # configuration errors abort before any run
    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        futures = [pool.submit(_sweep_row, k, v, c, seed, rows_dir)
                   for k, (v, c) in enumerate(zip(values, cfgs))]
        rows = [f.result() for f in futures]
    write_csv(target / "sweep.csv", SWEEP_COLUMNS, ([r[c] for c in SWEEP_COLUMNS] for r in rows))
    passed = [r["value"] for r in rows if r["verdict"] == "PASS"]
    prefix = None
    for r in rows:
        if r["verdict"] != "PASS":
            break
        prefix = r["value"]
    report = {"command": "sweep", "status": "ok", "name": name, "parameter": parameter,
              "rows": rows, "largest_pass": max(passed) if passed else None,
              "pass_prefix_end": prefix,
              "failed_rows": sum(r["status"] != "ok" for r in rows)}
    return write_report(target / "sweep.json", _finish(report, expect))


# ---------------------------------------------------------------------------
# compare

COMPARE_COLUMNS = ("r", "du", "ddu", "drho", "c1")


def cmd_compare(name: str, config: dict, expect: dict, out: Path) -> dict:
    """Strip against annulus on ``[r, r + 1]`` for each ``r`` in ``compare.r_list``."""
    eos = EosSpec.from_dict(config.get("eos", {}))
    bdata = st.BoundaryData.from_dict(config.get("boundary", {}))
    bdata.validate_for(eos)
    spec = config.get("compare", {})
    r_list = [float(r) for r in spec.get("r_list", [2, 4, 8, 16, 32])]
    rows = st.flat_curved_comparison(eos, bdata, r_list,
                                     n_cells=int(spec.get("n_cells", st.DEFAULT_CELLS)))
    c1 = [row["du"] + row["ddu"] for row in rows]
    target = out / name
    write_csv(target / "compare.csv", COMPARE_COLUMNS,
              ([row["r"], row["du"], row["ddu"], row["drho"], c] for row, c in zip(rows, c1)))
    report = {"command": "compare", "status": "ok", "name": name,
              "rows": [dict(row, c1=c) for row, c in zip(rows, c1)],
              "strictly_decreasing": bool(all(b < a for a, b in zip(c1, c1[1:]))),
              "final_over_initial": c1[-1] / c1[0] if c1[0] > 0 else math.nan}
    if all(c > 0 for c in c1):
        report["decay_order"] = st.decay_order(rows)
    return write_report(target / "compare.json", _finish(report, expect))


# ---------------------------------------------------------------------------
# entry point

class _Parser(argparse.ArgumentParser):
    """Usage errors are configuration errors (exit 3), not argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="config or suite JSON (default: bundled scenario suite)")
    common.add_argument("--scenario", help="scenario name inside a suite file")
    common.add_argument("--out", help=f"output directory (${OUT_ENV} overrides)")
    common.add_argument("--threads", type=int, default=1, help="concurrent sweep rows")
    common.add_argument("--seed", type=int, help="perturbation phase seed")

    ap = _Parser(prog="barostab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("steady", parents=[common], help="solve and cross-check a steady profile")
    sub.add_parser("evolve", parents=[common], help="evolve and record the energy ledger")
    v = sub.add_parser("verify", parents=[common], help="decay report of a trajectory CSV")
    v.add_argument("--trajectory", required=True)
    v.add_argument("--transient", type=float,
                   help="transient window (default: two flow-through times of --config, else 0)")
    sub.add_parser("sweep", parents=[common], help="PASS/FAIL table over one parameter")
    sub.add_parser("compare", parents=[common], help="flat/curved distance table")
    sub.add_parser("list", parents=[common], help="scenario names of a suite")
    return ap


def _summary(report: dict) -> str:
    cmd = report["command"]
    if cmd == "steady":
        return (f"residuals {report['residual_continuity']:.3e} "
                f"{report['residual_momentum']:.3e}")
    if cmd in ("evolve", "verify"):
        d = report["decay"]
        return f"decay {d['verdict']} max uptick {d['max_uptick']:.3e}"
    if cmd == "sweep":
        return f"largest PASS {report['largest_pass']}"
    return f"strictly decreasing {report['strictly_decreasing']}"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = out_dir(args.out)
    try:
        if args.command == "list":
            print("\n".join(scenario_names(args.config)))
            return EXIT_OK
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        if args.command == "verify":
            transient = args.transient
            name = "verify"
            if transient is None and (args.config or args.scenario):
                name, config, _ = load_scenario(args.config, args.scenario)
                rc = ev.RunConfig.from_dict(config)
                transient = _run_options(config, rc)["transient"]
            report = cmd_verify(args.trajectory, transient or 0.0, out, name)
        else:
            name, config, expect = load_scenario(args.config, args.scenario)
            if args.command == "steady":
                report = cmd_steady(name, config, expect, out)
            elif args.command == "evolve":
                report = cmd_evolve(name, config, expect, out, args.seed)
            elif args.command == "sweep":
                report = cmd_sweep(name, config, expect, out, args.threads, args.seed)
            else:
                report = cmd_compare(name, config, expect, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BarostabError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"{args.command} {report.get('name', '')}: {_summary(report)}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
