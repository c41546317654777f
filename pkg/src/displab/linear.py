"""Exact linear propagation and the dispersive-decay, stationary-phase,
and bilinear-scaling probes built on top of it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, RangeError
from .grid import (ComplexField, GridSpec, SpectralField, check_wrap_guard,
                   spectrum_at, to_physical, to_spectral)
from .symbols import DispersionSpec, legendre_point


def propagate_linear(u0: ComplexField, d: DispersionSpec, t: float) -> ComplexField:
    """Apply the free group exp(-i t a(D)); an exact L2 isometry."""
    spec = to_spectral(u0)
    phase = np.exp(-1j * t * np.asarray(d.a(u0.grid.frequencies), dtype=float))
    return to_physical(SpectralField(grid=u0.grid, coeffs=phase * spec.coeffs,
                                     time=u0.time + t))


@dataclass(frozen=True)
class AsymptoticProfile:
    """Sampled far-field asymptotics along rays x = v t."""

    velocities: np.ndarray
    gamma: np.ndarray
    phase: np.ndarray
    amplitude_factor: np.ndarray


def stationary_phase_eval(u0: ComplexField, d: DispersionSpec, t: float,
                          x: float, t_min: float = 10.0) -> complex:
    """Leading-order far-field value gamma(v) e^{i t phi(v)} / sqrt(t a''(xi_v)).

    gamma(v) = e^{-i pi/4} u0_hat(xi_v), with the spectrum evaluated at the
    off-lattice stationary frequency by band-limited interpolation.
    """
    if t < t_min:
        raise RangeError(f"t = {t:.6g} below the asymptotic threshold {t_min}")
    v = x / t
    bracket = (-u0.grid.xi_max, u0.grid.xi_max)
    phi_v, xi_v = legendre_point(d, v, bracket=bracket)
    gamma = np.exp(-0.25j * np.pi) * spectrum_at(u0, xi_v)[0]
    a2 = float(d.a2(xi_v))
    return complex(gamma * np.exp(1j * t * phi_v) / np.sqrt(t * a2))


def asymptotic_profile(u0: ComplexField, d: DispersionSpec, t: float,
                       velocities) -> AsymptoticProfile:
    """Vectorized stationary-phase data for a list of ray velocities."""
    velocities = np.asarray(velocities, dtype=float)
    bracket = (-u0.grid.xi_max, u0.grid.xi_max)
    gammas = np.empty(velocities.shape, dtype=np.complex128)
    phases = np.empty(velocities.shape)
    amps = np.empty(velocities.shape)
    for i, v in enumerate(velocities):
        phi_v, xi_v = legendre_point(d, float(v), bracket=bracket)
        gammas[i] = np.exp(-0.25j * np.pi) * spectrum_at(u0, xi_v)[0]
        phases[i] = t * phi_v
        amps[i] = 1.0 / np.sqrt(t * float(d.a2(xi_v)))
    return AsymptoticProfile(velocities=velocities, gamma=gammas,
                             phase=phases, amplitude_factor=amps)


def decay_metric(u0: ComplexField, d: DispersionSpec, times) -> list:
    """Normalized sup-norms sup_x |u(t)| * sqrt(t) along a time list.

    Near-constant values at late times witness the t^{-1/2} dispersive
    decay.  Each evaluation enforces the wrap-around guard.
    """
    times = list(times)
    if any(t <= 0 for t in times) or any(
            b <= a for a, b in zip(times, times[1:])):
        raise ConfigurationError("times must be positive and strictly increasing")
    out = []
    for t in times:
        u = propagate_linear(u0, d, t)
        check_wrap_guard(u)
        out.append((float(t), u.norm_sup() * np.sqrt(t)))
    return out


def make_dyadic_packet(grid: GridSpec, j: int, center_frac: float = 0.75,
                       width_frac: float = 0.125) -> ComplexField:
    """Unit-L2 wave packet with spectrum sharply supported in |xi| ~ 2^j.

    Gaussian spectral bump centered at center_frac * 2^j, truncated to the
    dyadic region (2^(j-1), 2^j] so that supports of distinct regions are
    exactly disjoint.
    """
    xi = grid.frequencies
    center = center_frac * 2.0**j
    width = width_frac * 2.0**j
    bump = np.exp(-0.5 * ((xi - center) / width) ** 2)
    mask = (xi > 2.0 ** (j - 1)) & (xi <= 2.0**j)
    coeffs = np.where(mask, bump, 0.0).astype(np.complex128)
    f = to_physical(SpectralField(grid=grid, coeffs=coeffs))
    nrm = f.norm_l2()
    if nrm == 0.0:
        raise ConfigurationError(
            f"dyadic region {j} is not resolved on this grid"
        )
    return ComplexField(grid=grid, values=f.values / nrm)


def _separated_pair_same_region(grid: GridSpec, k: int):
    """Two packets inside |xi| ~ 2^k with O(2^k) frequency separation.

    Each is hard-truncated to its own half of the dyadic region so the
    spectral supports are exactly disjoint.
    """
    xi = grid.frequencies
    mid = 0.75 * 2.0**k
    out = []
    for center_frac, lo_edge, hi_edge in (
            (0.6, 2.0 ** (k - 1), mid), (0.9, mid, 2.0**k)):
        center = center_frac * 2.0**k
        width = 0.04 * 2.0**k
        bump = np.exp(-0.5 * ((xi - center) / width) ** 2)
        mask = (xi > lo_edge) & (xi <= hi_edge)
        coeffs = np.where(mask, bump, 0.0).astype(np.complex128)
        f = to_physical(SpectralField(grid=grid, coeffs=coeffs))
        nrm = f.norm_l2()
        if nrm == 0.0:
            raise ConfigurationError(
                f"dyadic region {k} is not resolved on this grid"
            )
        out.append(ComplexField(grid=grid, values=f.values / nrm))
    return tuple(out)


def bilinear_scaling_probe(d: DispersionSpec, j: int, k: int, horizon: float,
                           grid: GridSpec, n_samples: int = 160) -> float:
    """Space-time L2 norm of the product of two frequency-separated waves.

    Returns ||u1 u2||_{L2_{t,x}} over [0, horizon] for unit-L2 packets at
    dyadic scales 2^j and 2^k (or, for j == k, two separated packets in
    the same dyadic region).  Across scales the values follow the
    2^{-max(j,k)/2} transversality law.
    """
    if horizon <= 0:
        raise ConfigurationError("horizon must be positive")
    if j == k:
        u1, u2 = _separated_pair_same_region(grid, k)
    else:
        if abs(j - k) <= 2:
            raise ConfigurationError(
                f"dyadic probe needs |j - k| > 2, got ({j}, {k})"
            )
        u1 = make_dyadic_packet(grid, j)
        u2 = make_dyadic_packet(grid, k)
    s1 = to_spectral(u1).coeffs
    s2 = to_spectral(u2).coeffs
    # transform roundtrips leave ~1e-17 dust outside the true supports
    tol1 = 1e-12 * np.max(np.abs(s1))
    tol2 = 1e-12 * np.max(np.abs(s2))
    if np.any((np.abs(s1) > tol1) & (np.abs(s2) > tol2)):
        raise ConfigurationError("packet spectra overlap")
    a_vals = np.asarray(d.a(grid.frequencies), dtype=float)
    ts = np.linspace(0.0, horizon, n_samples + 1)
    sq = np.empty(ts.shape)
    for i, t in enumerate(ts):
        phase = np.exp(-1j * t * a_vals)
        v1 = to_physical(SpectralField(grid=grid, coeffs=phase * s1)).values
        v2 = to_physical(SpectralField(grid=grid, coeffs=phase * s2)).values
        sq[i] = np.sum(np.abs(v1 * v2) ** 2) * grid.dx
    return float(np.sqrt(np.trapezoid(sq, ts)))
