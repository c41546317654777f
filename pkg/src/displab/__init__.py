"""Numerical laboratory for one-dimensional cubic dispersive flows
i u_t - A(D) u = C(u, ubar, u) on periodic grids."""

__version__ = "0.1.0"

from .errors import (BlowUpError, ConfigurationError, ConvergenceError,
                     DislabError, GridMismatchError, NoSolitonError,
                     RangeError, WrapAroundError)
from .grid import (ComplexField, GridSpec, SpectralField, make_grid,
                   sample_at, spectrum_at, to_physical, to_spectral)
from .symbols import (DispersionSpec, TrilinearSpec, classify,
                      legendre_point, make_dispersion, make_trilinear)
from .evolve import EvolutionTrace, SolverConfig, eval_trilinear, run, step
from .linear import (asymptotic_profile, bilinear_scaling_probe, decay_metric,
                     propagate_linear, stationary_phase_eval)
from .lp import FrequencyEnvelope, LPScheme, compute_envelope, lp_project
from .diagnostics import (densities, density_flux_residual,
                          interaction_morawetz, morawetz_rate,
                          strichartz_norms)
from .solitons import (SolitonProblem, SolitonSolution, embed_soliton,
                       petviashvili_solve, soliton_residual)
from .experiments import (FitReport, WavePacketSpec, blowup_time_experiment,
                          envelope_tracking_test, modified_scattering_fit,
                          wave_packet_experiment)

__all__ = [
    "BlowUpError", "ComplexField", "ConfigurationError", "ConvergenceError",
    "DislabError", "DispersionSpec", "EvolutionTrace", "FitReport",
    "FrequencyEnvelope", "GridMismatchError", "GridSpec", "LPScheme",
    "NoSolitonError", "RangeError", "SolitonProblem", "SolitonSolution",
    "SolverConfig", "SpectralField", "TrilinearSpec", "WavePacketSpec",
    "WrapAroundError", "asymptotic_profile", "bilinear_scaling_probe",
    "blowup_time_experiment", "classify", "compute_envelope",
    "decay_metric", "densities", "density_flux_residual", "embed_soliton",
    "envelope_tracking_test", "eval_trilinear", "interaction_morawetz",
    "legendre_point", "lp_project", "make_dispersion", "make_grid",
    "make_trilinear", "modified_scattering_fit", "morawetz_rate",
    "petviashvili_solve", "propagate_linear", "run", "sample_at",
    "soliton_residual", "spectrum_at", "stationary_phase_eval", "step",
    "strichartz_norms", "to_physical", "to_spectral",
    "wave_packet_experiment",
]
