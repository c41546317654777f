import numpy as np
import pytest

from displab import (ComplexField, ConfigurationError, LPScheme,
                     SolverConfig, densities, density_flux_residual,
                     interaction_morawetz, make_grid, make_dispersion,
                     make_trilinear, morawetz_rate, run, strichartz_norms)
from displab.diagnostics import bilinear_norm


@pytest.fixture
def d():
    return make_dispersion("schrodinger")


def random_field(grid, seed):
    rng = np.random.default_rng(seed)
    vals = rng.normal(size=grid.n_points) + 1j * rng.normal(size=grid.n_points)
    return ComplexField(grid=grid, values=vals)


def test_plane_wave_momentum_density():
    g = make_grid(128, 16.0 * np.pi)
    k = g.frequencies[g.n_points // 2 + 8]
    u = ComplexField(grid=g, values=0.7 * np.exp(1j * k * g.x))
    dens = densities(u)
    assert np.max(np.abs(dens.mass - 0.49)) < 1e-12
    assert np.max(np.abs(dens.momentum - 2.0 * k * 0.49)) < 1e-10
    assert np.max(np.abs(dens.energy - 4.0 * k**2 * 0.49)) < 1e-9


def test_morawetz_prefix_sum_matches_quadratic_oracle():
    g = make_grid(64, 20.0)
    uk = random_field(g, 0)
    uj = random_field(g, 1)
    dk, dj = densities(uk), densities(uj)
    acc = 0.0
    for a in range(64):
        for b in range(64):
            if g.x[a] < g.x[b]:
                acc += (dk.mass[a] * dj.momentum[b]
                        - dj.mass[b] * dk.momentum[a]) * g.dx * g.dx
    fast = interaction_morawetz(uk, uj)
    assert abs(fast - acc) < 1e-10


def test_morawetz_rate_linear_run(d):
    g = make_grid(1024, 100.0)
    c0 = make_trilinear("const", gamma=0.0)
    u0 = ComplexField(grid=g, values=np.exp(-g.x**2 / 4).astype(complex))
    tr = run(u0, d, c0, SolverConfig(dt=0.005, t_end=2.0, output_stride=20))
    reports = morawetz_rate(tr)
    rates = np.array([r.rate for r in reports])
    residuals = np.array([r.residual for r in reports])
    # linear rate is 4 ||d/dx |u|^2||^2 up to the finite-difference error
    assert np.max(np.abs(residuals)) < 0.02 * np.max(np.abs(rates))


def test_morawetz_rate_defocusing_positive(d):
    g = make_grid(1024, 100.0)
    c = make_trilinear("const", gamma=2.0)
    u0 = ComplexField(grid=g,
                      values=(0.5 * np.exp(-g.x**2 / 4)).astype(complex))
    tr = run(u0, d, c, SolverConfig(dt=0.005, t_end=2.0, output_stride=20))
    reports = morawetz_rate(tr)
    rates = np.array([r.rate for r in reports])
    assert np.all(rates > 0)
    residuals = np.array([r.residual for r in reports])
    assert np.max(np.abs(residuals)) < 0.02 * np.max(rates)


def test_morawetz_rate_lp_window(d):
    g = make_grid(1024, 100.0)
    c0 = make_trilinear("const", gamma=0.0)
    u0 = ComplexField(grid=g,
                      values=(np.exp(-g.x**2 / 4)
                              * np.exp(2j * g.x)).astype(complex))
    tr = run(u0, d, c0, SolverConfig(dt=0.005, t_end=1.0, output_stride=20))
    scheme = LPScheme(kind="dyadic")
    reports = morawetz_rate(tr, k=2, j=2, scheme=scheme)
    assert len(reports) > 0
    assert all(np.isfinite(r.rate) for r in reports)


def test_morawetz_rate_needs_snapshots(d):
    g = make_grid(64, 20.0)
    c = make_trilinear("const", gamma=0.0)
    u0 = ComplexField(grid=g, values=np.exp(-g.x**2).astype(complex))
    tr = run(u0, d, c, SolverConfig(dt=0.01, t_end=0.02))
    with pytest.raises(ConfigurationError):
        morawetz_rate(run(u0, d, c, SolverConfig(dt=0.01, t_end=0.01)))


def test_density_flux_second_order(d):
    g = make_grid(1024, 100.0)
    c0 = make_trilinear("const", gamma=0.0)
    u0 = ComplexField(grid=g, values=np.exp(-g.x**2 / 4).astype(complex))
    res = []
    for stride in (40, 20, 10):
        tr = run(u0, d, c0, SolverConfig(dt=0.005, t_end=2.0,
                                         output_stride=stride))
        fr = density_flux_residual(tr, d)
        assert fr.applicable
        res.append(fr)
    order_m = np.log2(res[0].res_m / res[1].res_m)
    order_p = np.log2(res[1].res_p / res[2].res_p)
    assert order_m > 1.8
    assert order_p > 1.8


def test_density_flux_flags_other_dispersion():
    g = make_grid(512, 100.0)
    quartic = make_dispersion("quartic", beta=0.1)
    c0 = make_trilinear("const", gamma=0.0)
    u0 = ComplexField(grid=g, values=np.exp(-g.x**2 / 4).astype(complex))
    tr = run(u0, quartic, c0, SolverConfig(dt=0.002, t_end=0.2,
                                           output_stride=10))
    fr = density_flux_residual(tr, quartic)
    assert not fr.applicable


def test_strichartz_norms_steady_modulus(d):
    # soliton evolution has steady |u|, so all three norms have closed forms
    g = make_grid(256, 30.0)
    c = make_trilinear("const", gamma=-2.0)
    q = (2.0 / np.cosh(2.0 * g.x)).astype(complex)
    u0 = ComplexField(grid=g, values=q)
    tr = run(u0, d, c, SolverConfig(dt=0.01, t_end=2.0, output_stride=10))
    l6, linf_l2, l4_linf = strichartz_norms(tr)
    t_span = tr.times[-1] - tr.times[0]
    want_l6 = (np.sum(np.abs(q) ** 6) * g.dx * t_span) ** (1 / 6)
    assert l6 == pytest.approx(want_l6, rel=1e-3)
    assert linf_l2 == pytest.approx(u0.norm_l2(), rel=1e-6)
    assert l4_linf == pytest.approx((t_span * 2.0**4) ** 0.25, rel=1e-3)


def test_bilinear_norm_zero_shift_weighting(d):
    g = make_grid(256, 30.0)
    c = make_trilinear("const", gamma=0.0)
    u0 = ComplexField(grid=g, values=np.exp(-g.x**2).astype(complex))
    tr = run(u0, d, c, SolverConfig(dt=0.01, t_end=0.5, output_stride=10))
    plain = bilinear_norm(tr)
    weighted = bilinear_norm(tr, weight="sobolev_minus_half")
    assert 0 < weighted < plain
    with pytest.raises(ConfigurationError):
        bilinear_norm(tr, weight="sobolev_plus_half")
