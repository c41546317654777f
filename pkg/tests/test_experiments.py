import numpy as np
import pytest

from displab import (ComplexField, ConfigurationError, LPScheme,
                     SolverConfig, WavePacketSpec, blowup_time_experiment,
                     envelope_tracking_test, make_grid, make_dispersion,
                     make_trilinear, run, wave_packet_experiment)
from displab.experiments import loglog_slope


@pytest.fixture
def d():
    return make_dispersion("schrodinger")


@pytest.fixture
def packet_grid():
    return make_grid(2048, 512.0)


def test_packet_spec_validation():
    with pytest.raises(ConfigurationError):
        WavePacketSpec(xi0=1.0, N=2.0)
    w = WavePacketSpec(xi0=1.0, N=1.0 / 8)
    small = make_grid(64, 100.0)
    with pytest.raises(ConfigurationError):
        w.data(small)


def test_packet_data_shape(packet_grid):
    w = WavePacketSpec(xi0=1.0, N=1.0 / 8, amplitude=0.5)
    u0 = w.data(packet_grid)
    assert u0.norm_sup() == pytest.approx(0.5 * np.sqrt(1.0 / 8), rel=1e-6)
    # L2 norm scales as amplitude * ||phi0|| independent of N
    assert u0.norm_l2() == pytest.approx(0.5 * (np.pi / 2) ** 0.25, rel=1e-6)


def test_loglog_slope():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    assert loglog_slope(x, 3.0 * x**-0.5) == pytest.approx(-0.5, abs=1e-12)


def test_wave_packet_phase_rotation(d, packet_grid):
    w = WavePacketSpec(xi0=1.0, N=1.0 / 8, amplitude=1.0)
    cfg = SolverConfig(dt=0.02, t_end=4.0, output_stride=25)
    c = make_trilinear("const", gamma=2.0)
    fit = wave_packet_experiment(w, d, c, cfg, packet_grid)
    assert fit.relative_error < 0.10
    assert fit.predicted_params["phase_coefficient"] == pytest.approx(-0.25)


def test_wave_packet_linear_limit(d, packet_grid):
    w = WavePacketSpec(xi0=1.0, N=1.0 / 8, amplitude=1.0)
    cfg = SolverConfig(dt=0.02, t_end=4.0, output_stride=25)
    c0 = make_trilinear("const", gamma=0.0)
    fit = wave_packet_experiment(w, d, c0, cfg, packet_grid)
    assert abs(fit.fitted_params["phase_coefficient"]) < 1e-3


def test_wave_packet_modulus_drift(d):
    # the drift bound needs the packet scale separation to be real:
    # residual envelope distortion shrinks like N^2 t
    g = make_grid(4096, 1024.0)
    w = WavePacketSpec(xi0=1.0, N=1.0 / 16, amplitude=0.7)
    cfg = SolverConfig(dt=0.02, t_end=8.0, output_stride=50)
    c = make_trilinear("const", gamma=2.0)
    fit = wave_packet_experiment(w, d, c, cfg, g)
    assert fit.details["modulus_drift"] < 0.05


def test_wave_packet_horizon_precondition(d, packet_grid):
    w = WavePacketSpec(xi0=1.0, N=1.0 / 8)
    cfg = SolverConfig(dt=0.02, t_end=40.0)
    c = make_trilinear("const", gamma=2.0)
    with pytest.raises(ConfigurationError):
        wave_packet_experiment(w, d, c, cfg, packet_grid)


def test_blowup_time_matches_ode(d, packet_grid):
    w = WavePacketSpec(xi0=1.0, N=1.0 / 8, amplitude=1.0)
    ci = make_trilinear("const", gamma=2j)
    cfg = SolverConfig(dt=0.005, t_end=3.0, output_stride=10)
    fit = blowup_time_experiment(w, d, ci, cfg, packet_grid)
    assert fit.predicted_params["t_star"] == pytest.approx(2.0)
    assert fit.relative_error < 0.25


def test_blowup_inconclusive_when_conservative(d, packet_grid):
    w = WavePacketSpec(xi0=1.0, N=1.0 / 8, amplitude=1.0)
    c = make_trilinear("const", gamma=2.0)
    cfg = SolverConfig(dt=0.01, t_end=1.0, output_stride=10)
    fit = blowup_time_experiment(w, d, c, cfg, packet_grid)
    assert fit.details.get("inconclusive")


def test_blowup_rejects_decay_sign(d, packet_grid):
    w = WavePacketSpec(xi0=1.0, N=1.0 / 8)
    c = make_trilinear("const", gamma=-2j)
    cfg = SolverConfig(dt=0.01, t_end=1.0)
    with pytest.raises(ConfigurationError):
        blowup_time_experiment(w, d, c, cfg, packet_grid)


def test_envelope_tracking_linear(d):
    g = make_grid(1024, 100.0)
    c0 = make_trilinear("const", gamma=0.0)
    u0 = ComplexField(grid=g,
                      values=(0.1 * np.exp(-g.x**2 / 4)
                              * np.exp(1j * g.x)).astype(complex))
    tr = run(u0, d, c0, SolverConfig(dt=0.01, t_end=5.0, output_stride=100))
    fit = envelope_tracking_test(tr, LPScheme(kind="dyadic"), 0.1, 2.0)
    assert fit.fitted_params["max_ratio"] <= 1.0 + 1e-9


def test_envelope_tracking_nonlinear_bounded(d):
    g = make_grid(1024, 100.0)
    c = make_trilinear("const", gamma=2.0)
    u0 = ComplexField(grid=g,
                      values=(0.1 * np.exp(-g.x**2 / 4)).astype(complex))
    tr = run(u0, d, c, SolverConfig(dt=0.01, t_end=20.0, output_stride=200))
    fit = envelope_tracking_test(tr, LPScheme(kind="dyadic"), 0.1, 2.0)
    assert fit.fitted_params["max_ratio"] <= 2.0
    assert fit.passed


def test_modified_scattering_window_validation(d):
    from displab.experiments import modified_scattering_fit

    g = make_grid(1024, 200.0)
    u0 = ComplexField(grid=g,
                      values=(0.2 * np.exp(-g.x**2 / 2)).astype(complex))
    c = make_trilinear("const", gamma=2.0)
    cfg = SolverConfig(dt=0.05, t_end=10.0, output_stride=20)
    with pytest.raises(ConfigurationError):
        modified_scattering_fit(u0, d, c, cfg, (5.0, 10.0))
    with pytest.raises(ConfigurationError):
        modified_scattering_fit(u0, d, c, cfg, (2.0, 40.0))


def test_modified_scattering_linear_slope_zero(d):
    from displab.experiments import modified_scattering_fit

    g = make_grid(2048, 400.0)
    u0 = ComplexField(grid=g,
                      values=(0.2 * np.exp(-g.x**2 / 2)).astype(complex))
    c0 = make_trilinear("const", gamma=0.0)
    cfg = SolverConfig(dt=0.05, t_end=40.0, output_stride=20)
    fit = modified_scattering_fit(u0, d, c0, cfg, (5.0, 40.0))
    assert all(abs(s) < 2e-2 for s in fit.fitted_params["phase_slopes"])
    assert all(abs(p) < 1e-12 for p in fit.predicted_params["phase_slopes"])


def test_fit_report_recomputable(d, packet_grid):
    w = WavePacketSpec(xi0=1.0, N=1.0 / 8, amplitude=1.0)
    cfg = SolverConfig(dt=0.02, t_end=4.0, output_stride=50)
    c = make_trilinear("const", gamma=2.0)
    fit = wave_packet_experiment(w, d, c, cfg, packet_grid)
    k_fit = fit.fitted_params["phase_coefficient"]
    k_pred = fit.predicted_params["phase_coefficient"]
    assert fit.relative_error == pytest.approx(
        abs(k_fit - k_pred) / abs(k_pred))
