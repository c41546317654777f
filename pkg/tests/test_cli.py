import hashlib
import json
import os

import numpy as np
import pytest

from displab import ConfigurationError
from displab.cli import (CSV_COLUMNS, EXIT_BLOWUP, EXIT_IO, EXIT_OK,
                         EXIT_VALIDATION, main, parse_config, run_command,
                         serialize_config)

MINIMAL = """
[run]
experiment = linear_decay

[grid]
n_points = 1024
length = 400.0

[experiment]
times = 10, 20, 40
"""

EVOLVE = """
[run]
experiment = evolve

[grid]
n_points = 256
length = 50.0

[nonlinearity]
name = const
gamma_re = 2.0

[solver]
dt = 0.01
t_end = 0.5
output_stride = 10

[experiment]
amplitude = 0.5
"""


def test_parse_minimal_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.experiment == "linear_decay"
    assert cfg.solver.dt == 0.01
    assert cfg.solver.output_stride == 1
    assert cfg.dispersion.name == "schrodinger"
    assert cfg.seed == 0


def test_parse_error_accumulation():
    bad = """
[run]
experiment = nosuch

[grid]
n_points = 17

[dispersion]
name = airy3
"""
    with pytest.raises(ConfigurationError) as exc:
        parse_config(bad)
    text = "\n".join(exc.value.messages)
    assert "experiment" in text
    assert "n_points" in text
    assert "airy3" in text
    assert len(exc.value.messages) >= 3


def test_config_round_trip():
    cfg = parse_config(EVOLVE)
    again = parse_config(serialize_config(cfg))
    assert again.sections == cfg.sections
    assert serialize_config(again) == serialize_config(cfg)


def _with_outdir(text, outdir):
    return text.replace("[run]", f"[run]\noutput_dir = {outdir}")


def test_run_writes_artifacts_and_is_deterministic(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    for out in (out1, out2):
        cfg = parse_config(_with_outdir(EVOLVE, out))
        assert run_command(cfg, quiet=True) == EXIT_OK
    for name in ("trace.csv", "report.json", "manifest.json"):
        assert (out1 / name).exists()
    h1 = hashlib.sha256((out1 / "trace.csv").read_bytes()).hexdigest()
    h2 = hashlib.sha256((out2 / "trace.csv").read_bytes()).hexdigest()
    assert h1 == h2
    header = (out1 / "trace.csv").read_text().splitlines()[0]
    assert header == ",".join(CSV_COLUMNS)
    manifest = json.loads((out1 / "manifest.json").read_text())
    assert manifest["experiment"] == "evolve"
    assert "config_sha256" in manifest


def test_soliton_run_reports_distance(tmp_path):
    text = f"""
[run]
experiment = soliton
output_dir = {tmp_path / "sol"}

[grid]
n_points = 512
length = 30.0

[nonlinearity]
name = const
gamma_re = -2.0

[experiment]
omega = 4.0
"""
    cfg = parse_config(text)
    assert run_command(cfg, quiet=True) == EXIT_OK
    report = json.loads((tmp_path / "sol" / "report.json").read_text())
    assert report["fitted_params"]["sup_distance_to_2sech2x"] < 1e-8
    assert report["passed"]
    profile = (tmp_path / "sol" / "profile.csv").read_text().splitlines()
    assert profile[0] == "x,re,im"
    assert len(profile) == 513


def test_blowup_exit_status_with_partial_trace(tmp_path):
    text = f"""
[run]
experiment = evolve
output_dir = {tmp_path / "bu"}

[grid]
n_points = 256
length = 50.0

[nonlinearity]
name = const
gamma_im = 40.0

[solver]
dt = 0.01
t_end = 2.0
blowup_threshold = 1e4

[experiment]
amplitude = 2.0
"""
    cfg = parse_config(text)
    assert run_command(cfg, quiet=True) == EXIT_BLOWUP
    lines = (tmp_path / "bu" / "trace.csv").read_text().splitlines()
    assert len(lines) > 1


def test_io_failure_status():
    cfg = parse_config(_with_outdir(EVOLVE, "/dev/null/nope"))
    assert run_command(cfg, quiet=True) == EXIT_IO


def test_main_validate_and_list(tmp_path, capsys):
    path = tmp_path / "cfg.ini"
    path.write_text(EVOLVE)
    assert main(["validate", str(path)]) == EXIT_OK
    bad = tmp_path / "bad.ini"
    bad.write_text("[run]\nexperiment = nosuch\n")
    assert main(["validate", str(bad)]) == EXIT_VALIDATION
    assert main(["validate", str(tmp_path / "missing.ini")]) == EXIT_IO
    assert main(["list-symbols"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "schrodinger" in out and "const" in out


def test_main_run_flag_overrides(tmp_path):
    path = tmp_path / "cfg.ini"
    path.write_text(EVOLVE)
    out = tmp_path / "flagged"
    assert main(["run", str(path), "--output-dir", str(out),
                 "--quiet"]) == EXIT_OK
    assert (out / "trace.csv").exists()


def test_csv_float_format(tmp_path):
    out = tmp_path / "fmt"
    cfg = parse_config(_with_outdir(EVOLVE, out))
    run_command(cfg, quiet=True)
    rows = (out / "trace.csv").read_text().splitlines()[1:]
    first = rows[0].split(",")
    # full 17-significant-digit round-trip formatting, blank for missing
    assert float(first[1]) == pytest.approx(0.88622692545275816, rel=1e-15)
    assert first[5] == ""
