"""Configuration parsing, experiment dispatch, and deterministic output.

Config files are INI-style key-value documents with sections
[run], [grid], [dispersion], [nonlinearity], [solver], [experiment].
Every run writes trace.csv, report.json, and manifest.json into the
output directory; identical config and seed produce byte-identical
trace.csv.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import io
import json
import sys
import time as _time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import BlowUpError, ConfigurationError, DislabError
from .evolve import EvolutionTrace, SolverConfig, run
from .experiments import (FitReport, WavePacketSpec, blowup_time_experiment,
                          envelope_tracking_test, loglog_slope,
                          modified_scattering_fit, wave_packet_experiment)
from .grid import ComplexField, GridSpec, make_grid
from .linear import bilinear_scaling_probe, decay_metric
from .lp import LPScheme
from .solitons import (SolitonProblem, SolitonSolution, embed_soliton,
                       petviashvili_solve, rescaled_nonlinearity)
from .symbols import (DISPERSION_LIBRARY, TRILINEAR_LIBRARY, make_dispersion,
                      make_trilinear)
from .diagnostics import morawetz_rate

EXPERIMENTS = ("linear_decay", "bilinear_probe", "evolve", "wave_packet",
               "blowup", "modified_scattering", "soliton", "morawetz",
               "envelope")

CSV_COLUMNS = ("time", "mass", "momentum", "l6_accum", "linfty",
               "envelope_ratio", "morawetz_I", "morawetz_rate",
               "bilinear_accum")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_BLOWUP = 3
EXIT_IO = 4


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    grid: GridSpec
    dispersion: object
    nonlinearity: object
    solver: SolverConfig
    extra: dict
    output_dir: str = "out"
    seed: int = 0
    sections: dict = field(default_factory=dict, compare=True)


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def serialize_config(cfg: RunConfig) -> str:
    """Canonical INI text; parse(serialize(parse(text))) == parse(text)."""
    parser = configparser.ConfigParser()
    for name in sorted(cfg.sections):
        parser[name] = {k: _fmt(v) for k, v in sorted(cfg.sections[name].items())}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


class _Section:
    """Typed accessors over one config section with error accumulation."""

    def __init__(self, data: dict, name: str, errors: list):
        self.data = dict(data)
        self.name = name
        self.errors = errors
        self.used: dict = {}

    def _get(self, key, default, cast, check=None, describe=""):
        raw = self.data.get(key)
        if raw is None:
            val = default
        else:
            try:
                val = cast(raw)
            except (TypeError, ValueError):
                self.errors.append(f"[{self.name}] {key}: cannot parse {raw!r}")
                return default
        if check is not None and val is not None and not check(val):
            self.errors.append(f"[{self.name}] {key}: {val!r} {describe}")
            return default
        if val is not None:
            self.used[key] = val
        return val

    def get_float(self, key, default=None, check=None, describe="out of range"):
        return self._get(key, default, float, check, describe)

    def get_int(self, key, default=None, check=None, describe="out of range"):
        return self._get(key, default, int, check, describe)

    def get_str(self, key, default=None, choices=None):
        check = (lambda v: v in choices) if choices else None
        return self._get(key, default, str, check,
                         f"must be one of {choices}")

    def get_floats(self, key, default=()):
        raw = self.data.get(key)
        if raw is None:
            return list(default)
        try:
            vals = [float(p) for p in str(raw).replace(",", " ").split()]
        except ValueError:
            self.errors.append(f"[{self.name}] {key}: cannot parse {raw!r}")
            return list(default)
        self.used[key] = vals
        return vals

    def get_ints(self, key, default=()):
        vals = self.get_floats(key, default)
        return [int(v) for v in vals]


def parse_config(text: str) -> RunConfig:
    """Parse and validate; all validation errors are reported together."""
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config: {exc}") from exc
    errors: list = []
    raw = {name: dict(parser[name]) for name in parser.sections()}

    s_run = _Section(raw.get("run", {}), "run", errors)
    experiment = s_run.get_str("experiment", None, choices=EXPERIMENTS)
    if experiment is None and "experiment" not in raw.get("run", {}):
        errors.append("[run] experiment: required key missing")
    output_dir = s_run.get_str("output_dir", "out")
    seed = s_run.get_int("seed", 0)

    s_grid = _Section(raw.get("grid", {}), "grid", errors)
    n_points = s_grid.get_int("n_points", 256)
    length = s_grid.get_float("length", 100.0)
    grid = None
    try:
        grid = make_grid(n_points, length)
    except ConfigurationError as exc:
        errors.extend(f"[grid] {m}" for m in exc.messages)

    s_disp = _Section(raw.get("dispersion", {}), "dispersion", errors)
    disp_name = s_disp.get_str("name", "schrodinger",
                               choices=tuple(DISPERSION_LIBRARY))
    disp_params = {}
    if disp_name == "quartic":
        disp_params["beta"] = s_disp.get_float(
            "beta", 0.1, lambda v: v > 0, "must be positive")
    dispersion = None
    if disp_name is not None:
        try:
            dispersion = make_dispersion(disp_name, **disp_params)
        except DislabError as exc:
            errors.append(f"[dispersion] {exc}")

    s_nl = _Section(raw.get("nonlinearity", {}), "nonlinearity", errors)
    nl_name = s_nl.get_str("name", "const", choices=tuple(TRILINEAR_LIBRARY))
    nl_params = {}
    if nl_name is not None:
        nl_params["gamma"] = complex(s_nl.get_float("gamma_re", 2.0),
                                     s_nl.get_float("gamma_im", 0.0))
        if nl_name == "smoothed":
            nl_params["sigma"] = s_nl.get_float(
                "sigma", 0.5, lambda v: v > 0, "must be positive")
    nonlinearity = None
    if nl_name is not None:
        try:
            nonlinearity = make_trilinear(nl_name, **nl_params)
        except DislabError as exc:
            errors.append(f"[nonlinearity] {exc}")

    s_solver = _Section(raw.get("solver", {}), "solver", errors)
    solver_kwargs = {
        "dt": s_solver.get_float("dt", 0.01),
        "t_end": s_solver.get_float("t_end", 1.0),
        "dealias": s_solver.get_str("dealias", "pad2x"),
        "output_stride": s_solver.get_int("output_stride", 1),
        "scheme": s_solver.get_str("scheme", "ifrk4"),
        "blowup_threshold": s_solver.get_float("blowup_threshold", 1e8),
    }
    solver = None
    try:
        solver = SolverConfig(**solver_kwargs)
    except ConfigurationError as exc:
        errors.extend(f"[solver] {m}" for m in exc.messages)

    extra = dict(raw.get("experiment", {}))

    if errors:
        raise ConfigurationError(errors)

    sections = {
        "run": {"experiment": experiment, "output_dir": output_dir,
                "seed": seed},
        "grid": {"n_points": n_points, "length": length},
        "dispersion": {"name": disp_name, **disp_params},
        "nonlinearity": {"name": nl_name,
                         "gamma_re": nl_params.get("gamma", 0j).real,
                         "gamma_im": nl_params.get("gamma", 0j).imag,
                         **({"sigma": nl_params["sigma"]}
                            if "sigma" in nl_params else {})},
        "solver": dict(solver_kwargs),
        "experiment": dict(extra),
    }
    return RunConfig(experiment=experiment, grid=grid, dispersion=dispersion,
                     nonlinearity=nonlinearity, solver=solver, extra=extra,
                     output_dir=output_dir, seed=seed, sections=sections)


def _gaussian_field(grid: GridSpec, amplitude: float, sigma: float,
                    center: float, carrier: float) -> ComplexField:
    x = grid.x
    vals = amplitude * np.exp(-((x - center) ** 2) / (2.0 * sigma**2))
    return ComplexField(grid=grid,
                        values=vals * np.exp(1j * carrier * x))


def _initial_field(cfg: RunConfig, section: _Section) -> ComplexField:
    amplitude = section.get_float("amplitude", 1.0)
    sigma = section.get_float("sigma", 2.0, lambda v: v > 0,
                              "must be positive")
    center = section.get_float("center", 0.0)
    carrier = section.get_float("carrier", 0.0)
    return _gaussian_field(cfg.grid, amplitude, sigma, center, carrier)


def _packet_spec(section: _Section) -> WavePacketSpec:
    xi0 = section.get_float("xi0", 1.0)
    big_n = section.get_float("n_scale", 1.0 / 16.0,
                              lambda v: 0 < v < 1, "must lie in (0, 1)")
    x0 = section.get_float("x0", 0.0)
    amplitude = section.get_float("amplitude", 1.0)
    return WavePacketSpec(xi0=xi0, N=big_n, x0=x0, amplitude=amplitude)


def _report_from_fit(name: str, fit: FitReport, tolerance: float) -> dict:
    passed = bool(np.isfinite(fit.relative_error)
                  and fit.relative_error <= tolerance)
    return {
        "experiment": name,
        "fitted_params": fit.fitted_params,
        "predicted_params": fit.predicted_params,
        "relative_error": fit.relative_error,
        "tolerance": tolerance,
        "passed": passed,
        "window": list(fit.window),
        "details": _jsonable(fit.details),
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def _rows_from_trace(trace: EvolutionTrace) -> list:
    rows = []
    for diag in trace.diagnostics:
        rows.append({k: diag[k] for k in
                     ("time", "mass", "momentum", "l6_accum", "linfty")})
    return rows


def _run_linear_decay(cfg: RunConfig, section: _Section):
    u0 = _initial_field(cfg, section)
    times = section.get_floats("times", [10.0, 20.0, 40.0, 80.0])
    pairs = decay_metric(u0, cfg.dispersion, times)
    ts = [p[0] for p in pairs]
    sups = [p[1] / np.sqrt(p[0]) for p in pairs]
    exponent = loglog_slope(ts, sups)
    tol = section.get_float("tolerance", 0.1)
    report = {
        "experiment": "linear_decay",
        "fitted_params": {"decay_exponent": exponent,
                          "normalized_sup": [p[1] for p in pairs]},
        "predicted_params": {"decay_exponent": -0.5},
        "relative_error": abs(exponent + 0.5) / 0.5,
        "tolerance": tol,
        "passed": bool(abs(exponent + 0.5) / 0.5 <= tol),
        "window": [ts[0], ts[-1]],
        "details": {"times": ts},
    }
    rows = [{"time": t, "linfty": p[1] / np.sqrt(t)}
            for t, p in zip(ts, pairs)]
    return report, rows


def _run_bilinear_probe(cfg: RunConfig, section: _Section):
    k_low = section.get_int("k_low", 0)
    j_list = section.get_ints("j_list", [4, 5, 6, 7])
    horizon = section.get_float("horizon", 1.0, lambda v: v > 0,
                                "must be positive")
    norms = []
    for j in j_list:
        norms.append(bilinear_scaling_probe(
            cfg.dispersion, j, k_low, horizon, cfg.grid))
    scales = [max(j, k_low) for j in j_list]
    slope = loglog_slope([2.0**s for s in scales], norms)
    tol = section.get_float("tolerance", 0.15)
    rel = abs(slope + 0.5) / 0.5
    report = {
        "experiment": "bilinear_probe",
        "fitted_params": {"scaling_exponent": slope,
                          "norms": norms},
        "predicted_params": {"scaling_exponent": -0.5},
        "relative_error": rel,
        "tolerance": tol,
        "passed": bool(rel <= tol),
        "window": [0.0, horizon],
        "details": {"j_list": j_list, "k_low": k_low,
                    "log2_scales": scales},
    }
    rows = [{"time": float(s), "bilinear_accum": n}
            for s, n in zip(scales, norms)]
    return report, rows


def _run_evolve(cfg: RunConfig, section: _Section):
    u0 = _initial_field(cfg, section)
    trace = run(u0, cfg.dispersion, cfg.nonlinearity, cfg.solver)
    mass0 = trace.column("mass")[0]
    drift = float(np.max(np.abs(trace.column("mass") - mass0)) / mass0)
    report = {
        "experiment": "evolve",
        "fitted_params": {"mass_drift": drift},
        "predicted_params": {"mass_drift": 0.0},
        "relative_error": drift,
        "tolerance": section.get_float("tolerance", 1e-8),
        "passed": bool(drift <= section.get_float("tolerance", 1e-8)),
        "window": [float(trace.times[0]), float(trace.times[-1])],
        "details": {"blowup_time": trace.blowup_time},
    }
    return report, _rows_from_trace(trace), trace


def _run_wave_packet(cfg: RunConfig, section: _Section):
    w = _packet_spec(section)
    fit = wave_packet_experiment(w, cfg.dispersion, cfg.nonlinearity,
                                 cfg.solver, cfg.grid)
    return _report_from_fit("wave_packet", fit,
                            section.get_float("tolerance", 0.1)), []


def _run_blowup(cfg: RunConfig, section: _Section):
    w = _packet_spec(section)
    fit = blowup_time_experiment(w, cfg.dispersion, cfg.nonlinearity,
                                 cfg.solver, cfg.grid)
    return _report_from_fit("blowup", fit,
                            section.get_float("tolerance", 0.25)), []


def _run_modified_scattering(cfg: RunConfig, section: _Section):
    u0 = _initial_field(cfg, section)
    t1 = section.get_float("t_fit_start", 20.0)
    t2 = section.get_float("t_fit_end", 200.0)
    fit = modified_scattering_fit(u0, cfg.dispersion, cfg.nonlinearity,
                                  cfg.solver, (t1, t2))
    return _report_from_fit("modified_scattering", fit,
                            section.get_float("tolerance", 0.15)), []


def _run_soliton(cfg: RunConfig, section: _Section):
    omega = section.get_float("omega", 4.0, lambda v: v > 0,
                              "must be positive")
    problem = SolitonProblem(
        dispersion=cfg.dispersion, omega=omega,
        nonlinearity=rescaled_nonlinearity(cfg.nonlinearity), grid=cfg.grid)
    seed = ComplexField(grid=cfg.grid,
                        values=np.exp(-cfg.grid.x**2).astype(np.complex128))
    sol = petviashvili_solve(problem, seed,
                             tol=section.get_float("fixed_point_tol", 1e-12),
                             max_iter=section.get_int("max_iter", 500))
    exact = 2.0 / np.cosh(2.0 * cfg.grid.x)
    sup_dist = float(np.max(np.abs(sol.profile.values - exact)))
    report = {
        "experiment": "soliton",
        "fitted_params": {"residual": sol.residual,
                          "sup_distance_to_2sech2x": sup_dist,
                          "iterations": sol.iterations},
        "predicted_params": {"residual": 0.0},
        "relative_error": sol.residual,
        "tolerance": section.get_float("tolerance", 1e-8),
        "passed": bool(sol.converged
                       and sol.residual <= section.get_float("tolerance", 1e-8)),
        "window": [0.0, 0.0],
        "details": {"converged": sol.converged, "omega": omega},
    }
    rows = [{"time": 0.0, "linfty": float(np.max(np.abs(sol.profile.values))),
             "mass": sol.profile.norm_l2() ** 2}]
    return report, rows, sol


def _run_morawetz(cfg: RunConfig, section: _Section):
    u0 = _initial_field(cfg, section)
    trace = run(u0, cfg.dispersion, cfg.nonlinearity, cfg.solver)
    reports = morawetz_rate(trace)
    rows = _rows_from_trace(trace)
    by_time = {round(r.time, 12): r for r in reports}
    for row in rows:
        r = by_time.get(round(row["time"], 12))
        if r is not None:
            row["morawetz_I"] = r.value
            row["morawetz_rate"] = r.rate
    rates = np.array([r.rate for r in reports])
    residuals = np.array([r.residual for r in reports])
    rel = float(np.max(np.abs(residuals)) / max(np.max(np.abs(rates)), 1e-300))
    tol = section.get_float("tolerance", 0.05)
    report = {
        "experiment": "morawetz",
        "fitted_params": {"max_rate": float(np.max(rates)),
                          "min_rate": float(np.min(rates)),
                          "max_residual": float(np.max(np.abs(residuals)))},
        "predicted_params": {"rate_lower_bound": 0.0},
        "relative_error": rel,
        "tolerance": tol,
        "passed": bool(np.all(rates > 0) and rel <= tol),
        "window": [float(trace.times[0]), float(trace.times[-1])],
        "details": {"n_interior": len(reports)},
    }
    return report, rows, trace


def _run_envelope(cfg: RunConfig, section: _Section):
    u0 = _initial_field(cfg, section)
    trace = run(u0, cfg.dispersion, cfg.nonlinearity, cfg.solver)
    scheme = LPScheme(
        kind=section.get_str("lp_kind", "dyadic",
                             choices=("dyadic", "lattice")),
        delta=section.get_float("delta", 0.5),
        unit=section.get_float("unit", 1.0))
    epsilon = section.get_float("epsilon", 0.1)
    target = section.get_float("c_target", 2.0)
    fit = envelope_tracking_test(trace, scheme, epsilon, target)
    rows = _rows_from_trace(trace)
    for row in rows:
        row["envelope_ratio"] = fit.fitted_params["max_ratio"]
    return _report_from_fit("envelope", fit, 1.0), rows, trace


_DISPATCH = {
    "linear_decay": _run_linear_decay,
    "bilinear_probe": _run_bilinear_probe,
    "evolve": _run_evolve,
    "wave_packet": _run_wave_packet,
    "blowup": _run_blowup,
    "modified_scattering": _run_modified_scattering,
    "soliton": _run_soliton,
    "morawetz": _run_morawetz,
    "envelope": _run_envelope,
}


def write_trace_csv(path, rows):
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        cells = []
        for col in CSV_COLUMNS:
            v = row.get(col)
            cells.append("" if v is None else format(float(v), ".17g"))
        lines.append(",".join(cells))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_profile_csv(path, profile: ComplexField):
    lines = ["x,re,im"]
    for x, v in zip(profile.grid.x, profile.values):
        lines.append(",".join(format(float(q), ".17g")
                              for q in (x, v.real, v.imag)))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def run_command(cfg: RunConfig, quiet: bool = False) -> int:
    """Dispatch one experiment; returns a process exit status."""
    import os

    t0 = _time.perf_counter()
    status = EXIT_OK
    section = _Section(cfg.extra, "experiment", [])
    try:
        os.makedirs(cfg.output_dir, exist_ok=True)
        result = _DISPATCH[cfg.experiment](cfg, section)
    except BlowUpError as exc:
        report = {"experiment": cfg.experiment, "error": "blow-up",
                  "blowup_time": exc.time, "passed": False}
        result = (report, [])
        status = EXIT_BLOWUP
    except ConfigurationError as exc:
        if not quiet:
            for msg in exc.messages:
                print(f"error: {msg}", file=sys.stderr)
        return EXIT_VALIDATION
    except DislabError as exc:
        if not quiet:
            print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        if not quiet:
            print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO

    report, rows = result[0], result[1]
    if section.errors:
        if not quiet:
            for msg in section.errors:
                print(f"error: {msg}", file=sys.stderr)
        return EXIT_VALIDATION
    if report.get("details", {}).get("blowup_time") is not None:
        status = EXIT_BLOWUP
    try:
        write_trace_csv(os.path.join(cfg.output_dir, "trace.csv"), rows)
        if len(result) > 2 and isinstance(result[2], SolitonSolution):
            write_profile_csv(os.path.join(cfg.output_dir, "profile.csv"),
                              result[2].profile)
        report_text = json.dumps(_jsonable(report), sort_keys=True, indent=2)
        with open(os.path.join(cfg.output_dir, "report.json"), "w") as fh:
            fh.write(report_text + "\n")
        manifest = {
            "config_sha256": hashlib.sha256(
                serialize_config(cfg).encode()).hexdigest(),
            "code_version": __version__,
            "seed": cfg.seed,
            "experiment": cfg.experiment,
            "wall_time_seconds": _time.perf_counter() - t0,
        }
        with open(os.path.join(cfg.output_dir, "manifest.json"), "w") as fh:
            fh.write(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    except OSError as exc:
        if not quiet:
            print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    if not quiet:
        print(f"{cfg.experiment}: passed={report.get('passed')} "
              f"-> {cfg.output_dir}")
    return status


def _load_config(path: str, output_dir=None, seed=None) -> RunConfig:
    with open(path) as fh:
        text = fh.read()
    cfg = parse_config(text)
    if output_dir is not None or seed is not None:
        sections = {k: dict(v) for k, v in cfg.sections.items()}
        if output_dir is not None:
            sections["run"]["output_dir"] = output_dir
        if seed is not None:
            sections["run"]["seed"] = seed
        cfg = RunConfig(
            experiment=cfg.experiment, grid=cfg.grid,
            dispersion=cfg.dispersion, nonlinearity=cfg.nonlinearity,
            solver=cfg.solver, extra=cfg.extra,
            output_dir=sections["run"]["output_dir"],
            seed=sections["run"]["seed"], sections=sections)
    return cfg


def main(argv=None) -> int:
    # global flags accepted before or after the subcommand
    flags = argparse.ArgumentParser(add_help=False)
    flags.add_argument("--output-dir", default=argparse.SUPPRESS)
    flags.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    flags.add_argument("--quiet", action="store_true",
                       default=argparse.SUPPRESS)
    parser = argparse.ArgumentParser(
        prog="displab",
        description="numerical laboratory for 1d cubic dispersive flows")
    parser.add_argument("--output-dir", default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--quiet", action="store_true", default=False)
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", parents=[flags],
                           help="run one experiment config")
    p_run.add_argument("config")
    p_val = sub.add_parser("validate", parents=[flags],
                           help="validate a config file")
    p_val.add_argument("config")
    sub.add_parser("list-symbols", parents=[flags],
                   help="list named symbol libraries")
    args = parser.parse_args(argv)

    if args.command == "list-symbols":
        if not args.quiet:
            for name in sorted(DISPERSION_LIBRARY):
                print(f"dispersion: {name}")
            for name in sorted(TRILINEAR_LIBRARY):
                print(f"nonlinearity: {name}")
        return EXIT_OK

    try:
        cfg = _load_config(args.config, args.output_dir, args.seed)
    except OSError as exc:
        if not args.quiet:
            print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigurationError as exc:
        if not args.quiet:
            for msg in exc.messages:
                print(f"error: {msg}", file=sys.stderr)
        return EXIT_VALIDATION

    if args.command == "validate":
        if not args.quiet:
            print("ok")
        return EXIT_OK
    return run_command(cfg, quiet=args.quiet)


if __name__ == "__main__":
    sys.exit(main())
