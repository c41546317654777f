"""Figure rendering from run artifacts.

Each figure is a pure function of its input files.  Every annotated
number is read from report.json and re-displayed verbatim; nothing is
recomputed from the raw trace.  The one computed element is cosmetic
line placement (intercepts), which carries no annotation.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FIGURE_KINDS = ("decay", "morawetz", "bilinear_scaling", "phase_fit",
                "soliton_overlay")


class SchemaError(Exception):
    """An input file does not conform to the trace/report schema."""


def fmt(v) -> str:
    """Display formatting shared by annotations and the re-display test."""
    return format(float(v), ".6g")


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple
    output: str

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(
                f"unknown figure kind {self.kind!r}; "
                f"expected one of {FIGURE_KINDS}"
            )
        object.__setattr__(self, "inputs", tuple(self.inputs))
        for path in self.inputs:
            if not os.path.isfile(path):
                raise SchemaError(f"input file not found: {path}")


def load_report(path: str) -> dict:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict) or "experiment" not in data:
        raise SchemaError(f"{path}: missing key 'experiment'")
    return data


def report_value(report: dict, path: str, source: str):
    """Fetch a dotted key path, raising a named schema error if absent."""
    node = report
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            raise SchemaError(f"{source}: missing key '{path}'")
        node = node[part]
    return node


def load_trace(path: str, columns) -> dict:
    """Read the named columns; blank cells become NaN."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in columns:
            if col not in header:
                raise SchemaError(f"{path}: missing column '{col}'")
        rows = list(reader)
    out = {}
    for col in columns:
        out[col] = np.array([float(r[col]) if r[col] not in ("", None)
                             else np.nan for r in rows])
    return out


def load_profile(path: str) -> dict:
    return load_trace(path, ("x", "re", "im"))


def _classify_inputs(spec: FigureSpec, roles) -> dict:
    """Assign input files to the roles a figure kind needs.

    report: a .json file; trace: a csv whose header starts with "time";
    profile: a csv whose header starts with "x".
    """
    found = {}
    for path in spec.inputs:
        if path.endswith(".json"):
            role = "report"
        else:
            with open(path) as fh:
                first = fh.readline().split(",")[0].strip()
            role = "profile" if first == "x" else "trace"
        if role in roles and role not in found:
            found[role] = path
    missing = [r for r in roles if r not in found]
    if missing:
        raise SchemaError(
            f"figure kind {spec.kind!r} needs inputs for {missing}; "
            f"got {list(spec.inputs)}"
        )
    return found


def _new_axes(n_panels: int = 1):
    fig, axes = plt.subplots(1, n_panels, figsize=(6.0 * n_panels, 4.0))
    return fig, (axes if n_panels > 1 else [axes])


def _annotate(ax, lines):
    ax.text(0.02, 0.98, "\n".join(lines), transform=ax.transAxes,
            va="top", ha="left", fontsize=9,
            bbox={"boxstyle": "round", "facecolor": "white", "alpha": 0.8})


def annotations_for(spec: FigureSpec) -> dict:
    """The exact annotation strings a render would draw, keyed by label.

    Every value is formatted straight from report.json; the re-display
    contract is checked against this mapping.
    """
    builder = _BUILDERS[spec.kind]
    return builder(spec)[1]


def render(spec: FigureSpec) -> str:
    """Draw the figure and write it to spec.output; returns the path."""
    draw, notes = _BUILDERS[spec.kind](spec)
    fig = draw()
    try:
        fig.savefig(spec.output, dpi=120)
    finally:
        plt.close(fig)
    return spec.output


def _build_decay(spec: FigureSpec):
    paths = _classify_inputs(spec, ("trace", "report"))
    report = load_report(paths["report"])
    exponent = report_value(report, "fitted_params.decay_exponent",
                            paths["report"])
    target = report_value(report, "predicted_params.decay_exponent",
                          paths["report"])
    trace = load_trace(paths["trace"], ("time", "linfty"))
    notes = {"fitted exponent": fmt(exponent), "target exponent": fmt(target)}

    def draw():
        fig, (ax,) = _new_axes()
        t = trace["time"]
        ax.plot(t, trace["linfty"] * np.sqrt(t), "o-", color="tab:blue")
        ax.set_xlabel("t")
        ax.set_ylabel(r"$\sup_x |u(t)| \cdot t^{1/2}$")
        ax.set_title("normalized dispersive decay")
        _annotate(ax, [f"{k} = {v}" for k, v in notes.items()])
        return fig

    return draw, notes


def _build_morawetz(spec: FigureSpec):
    paths = _classify_inputs(spec, ("trace", "report"))
    report = load_report(paths["report"])
    src = paths["report"]
    notes = {
        "max rate": fmt(report_value(report, "fitted_params.max_rate", src)),
        "min rate": fmt(report_value(report, "fitted_params.min_rate", src)),
        "max residual": fmt(report_value(
            report, "fitted_params.max_residual", src)),
    }
    trace = load_trace(paths["trace"],
                       ("time", "morawetz_I", "morawetz_rate"))

    def draw():
        fig, (ax1, ax2) = _new_axes(2)
        keep = ~np.isnan(trace["morawetz_I"])
        ax1.plot(trace["time"][keep], trace["morawetz_I"][keep], "o-",
                 color="tab:blue")
        ax1.set_xlabel("t")
        ax1.set_ylabel("I(t)")
        ax1.set_title("interaction functional")
        keep2 = ~np.isnan(trace["morawetz_rate"])
        ax2.plot(trace["time"][keep2], trace["morawetz_rate"][keep2], "o-",
                 color="tab:red")
        ax2.axhline(0.0, color="gray", lw=0.8)
        ax2.set_xlabel("t")
        ax2.set_ylabel("dI/dt")
        ax2.set_title("rate vs leading terms")
        _annotate(ax2, [f"{k} = {v}" for k, v in notes.items()])
        return fig

    return draw, notes


def _build_bilinear_scaling(spec: FigureSpec):
    paths = _classify_inputs(spec, ("trace", "report"))
    report = load_report(paths["report"])
    src = paths["report"]
    slope = report_value(report, "fitted_params.scaling_exponent", src)
    target = report_value(report, "predicted_params.scaling_exponent", src)
    trace = load_trace(paths["trace"], ("time", "bilinear_accum"))
    notes = {"fitted slope": fmt(slope), "target slope": fmt(target)}

    def draw():
        fig, (ax,) = _new_axes()
        scales = 2.0 ** trace["time"]
        norms = trace["bilinear_accum"]
        ax.loglog(scales, norms, "o", color="tab:blue", label="measured")
        # cosmetic guide line through the data centroid with the
        # reported slope; the slope value itself comes from report.json
        anchor = np.exp(np.mean(np.log(norms))
                        - float(slope) * np.mean(np.log(scales)))
        ax.loglog(scales, anchor * scales ** float(slope), "--",
                  color="tab:red", label="reported fit")
        ax.set_xlabel(r"$2^{\max(j,k)}$")
        ax.set_ylabel(r"$\|u_1 u_2\|_{L^2_{t,x}}$")
        ax.set_title("bilinear dyadic scaling")
        ax.legend(loc="lower left")
        _annotate(ax, [f"{k} = {v}" for k, v in notes.items()])
        return fig

    return draw, notes


def _build_phase_fit(spec: FigureSpec):
    paths = _classify_inputs(spec, ("report",))
    src = paths["report"]
    report = load_report(src)
    slopes = report_value(report, "fitted_params.phase_slopes", src)
    predicted = report_value(report, "predicted_params.phase_slopes", src)
    log_times = np.asarray(report_value(report, "details.log_times", src))
    phases = report_value(report, "details.phases", src)
    velocities = report_value(report, "details.velocities", src)
    if not (len(slopes) == len(predicted) == len(phases)
            == len(velocities)):
        raise SchemaError(f"{src}: phase-fit arrays have mismatched lengths")
    notes = {}
    for v, s, p in zip(velocities, slopes, predicted):
        notes[f"v = {fmt(v)}"] = f"slope {fmt(s)} (model {fmt(p)})"

    def draw():
        fig, (ax,) = _new_axes()
        cmap = plt.get_cmap("viridis")
        for i, (v, s) in enumerate(zip(velocities, slopes)):
            color = cmap(i / max(len(velocities) - 1, 1))
            ph = np.asarray(phases[i])
            ax.plot(log_times, ph, "o", ms=3, color=color)
            intercept = float(np.mean(ph) - s * np.mean(log_times))
            ax.plot(log_times, intercept + s * log_times, "-",
                    color=color, lw=1,
                    label=f"v = {fmt(v)}: slope {fmt(s)}")
        ax.set_xlabel(r"$\log t$")
        ax.set_ylabel(r"$\arg \gamma(t, v)$")
        ax.set_title("modified-scattering phase fits")
        ax.legend(fontsize=7, loc="best")
        return fig

    return draw, notes


def _build_soliton_overlay(spec: FigureSpec):
    paths = _classify_inputs(spec, ("profile", "report"))
    src = paths["report"]
    report = load_report(src)
    sup_dist = report_value(
        report, "fitted_params.sup_distance_to_2sech2x", src)
    residual = report_value(report, "fitted_params.residual", src)
    prof = load_profile(paths["profile"])
    notes = {"sup distance to 2 sech 2x": fmt(sup_dist),
             "profile residual": fmt(residual)}

    def draw():
        fig, (ax,) = _new_axes()
        x = prof["x"]
        mod = np.hypot(prof["re"], prof["im"])
        ax.plot(x, mod, "-", color="tab:blue", lw=2, label="|Q(x)|")
        ax.plot(x, 2.0 / np.cosh(2.0 * x), "--", color="tab:red",
                label=r"$2\,\mathrm{sech}\,2x$")
        ax.set_xlabel("x")
        ax.set_ylabel("amplitude")
        ax.set_title("soliton profile overlay")
        ax.legend(loc="upper right")
        _annotate(ax, [f"{k} = {v}" for k, v in notes.items()])
        return fig

    return draw, notes


_BUILDERS = {
    "decay": _build_decay,
    "morawetz": _build_morawetz,
    "bilinear_scaling": _build_bilinear_scaling,
    "phase_fit": _build_phase_fit,
    "soliton_overlay": _build_soliton_overlay,
}
