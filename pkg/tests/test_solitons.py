import numpy as np
import pytest

from displab import (ComplexField, ConfigurationError, NoSolitonError,
                     SolitonProblem, embed_soliton, make_grid,
                     make_dispersion, make_trilinear, petviashvili_solve,
                     soliton_residual)
from displab.grid import spectrum_at
from displab.solitons import rescaled_nonlinearity


@pytest.fixture
def grid():
    return make_grid(512, 30.0)


@pytest.fixture
def d():
    return make_dispersion("schrodinger")


def gaussian_seed(grid):
    return ComplexField(grid=grid, values=np.exp(-grid.x**2).astype(complex))


def focusing_problem(grid, d, omega=4.0):
    # profile-equation symbol +2 corresponds to focusing evolution -2
    return SolitonProblem(dispersion=d, omega=omega,
                          nonlinearity=make_trilinear("const", gamma=2.0),
                          grid=grid)


def test_problem_validation(grid, d):
    with pytest.raises(ConfigurationError):
        SolitonProblem(dispersion=d, omega=-1.0,
                       nonlinearity=make_trilinear("const"), grid=grid)
    shifted = make_dispersion("schrodinger")
    bad = type(shifted)(a=lambda x: x**2 + x, a1=lambda x: 2 * x + 1,
                        a2=shifted.a2)
    with pytest.raises(ConfigurationError):
        SolitonProblem(dispersion=bad, omega=4.0,
                       nonlinearity=make_trilinear("const"), grid=grid)


def test_exact_ground_state(grid, d):
    sol = petviashvili_solve(focusing_problem(grid, d), gaussian_seed(grid))
    assert sol.converged
    exact = 2.0 / np.cosh(2.0 * grid.x)
    assert np.max(np.abs(sol.profile.values - exact)) < 1e-8
    assert sol.residual < 1e-10


def test_scaling_family(d):
    # Q_omega(x) = sqrt(omega) Q_1(sqrt(omega) x); the omega = 1 profile
    # has e^{-|x|} tails, so the domain must be long enough that its
    # periodization error sits below the tolerance
    long_grid = make_grid(1024, 60.0)
    q1 = petviashvili_solve(focusing_problem(long_grid, d, omega=1.0),
                            gaussian_seed(long_grid)).profile
    q4 = petviashvili_solve(focusing_problem(long_grid, d, omega=4.0),
                            gaussian_seed(long_grid)).profile
    from displab.grid import sample_at

    # keep 2x inside the q1 domain to avoid its periodic extension
    core = np.abs(long_grid.x) <= 14.0
    rescaled = 2.0 * sample_at(q1, 2.0 * long_grid.x[core])
    assert np.max(np.abs(q4.values[core] - rescaled)) < 1e-8


def test_residual_cases(grid, d):
    p = focusing_problem(grid, d)
    exact = ComplexField(grid=grid,
                         values=(2.0 / np.cosh(2.0 * grid.x)).astype(complex))
    assert soliton_residual(p, exact) < 1e-8
    zero = ComplexField(grid=grid, values=np.zeros(grid.n_points))
    assert soliton_residual(p, zero) == 0.0
    rng = np.random.default_rng(2)
    noise = ComplexField(grid=grid, values=rng.normal(size=grid.n_points)
                         + 1j * rng.normal(size=grid.n_points))
    assert soliton_residual(p, noise) > 1.0


def test_defocusing_sign_rejected(grid, d):
    p = SolitonProblem(dispersion=d, omega=4.0,
                       nonlinearity=make_trilinear("const", gamma=-2.0),
                       grid=grid)
    with pytest.raises(NoSolitonError):
        petviashvili_solve(p, gaussian_seed(grid))


def test_rescaled_nonlinearity_flips_sign():
    c = make_trilinear("const", gamma=-2.0)
    flipped = rescaled_nonlinearity(c)
    assert flipped.diag(np.array([0.0]))[0] == pytest.approx(2.0)


def test_even_seed_gives_even_profile(grid, d):
    sol = petviashvili_solve(focusing_problem(grid, d), gaussian_seed(grid))
    vals = sol.profile.values
    flipped = np.concatenate([[vals[0]], vals[1:][::-1]])
    assert np.max(np.abs(vals - flipped)) < 1e-10


def test_zero_seed_rejected(grid, d):
    zero = ComplexField(grid=grid, values=np.zeros(grid.n_points))
    with pytest.raises(ConfigurationError):
        petviashvili_solve(focusing_problem(grid, d), zero)


def test_embed_identity(grid, d):
    prof = ComplexField(grid=grid,
                        values=(2.0 / np.cosh(2.0 * grid.x)).astype(complex))
    out = embed_soliton(prof, xi0=0.0, N=1.0, x0=0.0, d=d)
    assert np.max(np.abs(out.values - prof.values)) < 1e-10


def test_embed_l2_scaling(grid, d):
    prof = ComplexField(grid=grid,
                        values=(2.0 / np.cosh(2.0 * grid.x)).astype(complex))
    fine = make_grid(2048, 30.0)
    full = embed_soliton(prof, xi0=0.0, N=1.0, x0=0.0, d=d, target_grid=fine)
    quarter = embed_soliton(prof, xi0=0.0, N=0.25, x0=0.0, d=d,
                            target_grid=fine)
    assert quarter.norm_l2() == pytest.approx(0.5 * full.norm_l2(), rel=1e-4)


def test_embed_spectral_centroid(grid, d):
    prof = ComplexField(grid=grid,
                        values=(2.0 / np.cosh(2.0 * grid.x)).astype(complex))
    wide = make_grid(2048, 120.0)
    out = embed_soliton(prof, xi0=5.0, N=0.5, x0=0.0, d=d, target_grid=wide)
    from displab.grid import to_spectral

    co = to_spectral(out).coeffs
    w = np.abs(co) ** 2
    centroid = float(np.sum(wide.frequencies * w) / np.sum(w))
    assert abs(centroid - 5.0) < 0.1


def test_embed_resolution_check(grid, d):
    prof = ComplexField(grid=grid,
                        values=(2.0 / np.cosh(2.0 * grid.x)).astype(complex))
    coarse = make_grid(16, 30.0)
    with pytest.raises(ConfigurationError):
        embed_soliton(prof, xi0=0.0, N=1.0, x0=0.0, d=d, target_grid=coarse)
