"""Conserved densities, flux residuals, space-time norms, and the
interaction Morawetz functional.

Sign conventions: the momentum density is P = 2 Im(conj(u) u_x), the
physical momentum current, so that the linear conservation laws read
d/dt M + d/dx P = 0 and d/dt P + d/dx F = 0 with momentum flux
F = 4|u_x|^2 - d^2/dx^2 M, and the diagonal Morawetz rate is positive
definite:

    d/dt I(u, u) = 4 ||d/dx |u|^2||^2 + 2 gamma ||u||_6^6     (cubic NLS)

for the defocusing constant symbol gamma > 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .evolve import EvolutionTrace
from .grid import ComplexField, SpectralField, require_same_grid, to_physical, to_spectral
from .lp import LPScheme, lp_project
from .symbols import DispersionSpec


def _ddx(f: ComplexField) -> np.ndarray:
    spec = to_spectral(f)
    coeffs = 1j * f.grid.frequencies * spec.coeffs
    return to_physical(SpectralField(grid=f.grid, coeffs=coeffs)).values


def _ddx_arr(values: np.ndarray, grid) -> np.ndarray:
    return _ddx(ComplexField(grid=grid, values=values))


@dataclass(frozen=True)
class DensityTriple:
    """Pointwise mass, momentum and energy densities."""

    mass: np.ndarray
    momentum: np.ndarray
    energy: np.ndarray


def densities(u: ComplexField) -> DensityTriple:
    """M = |u|^2, P = 2 Im(conj(u) u_x), E = 4 |u_x|^2 (spectral d/dx)."""
    du = _ddx(u)
    return DensityTriple(
        mass=np.abs(u.values) ** 2,
        momentum=2.0 * np.imag(np.conj(u.values) * du),
        energy=4.0 * np.abs(du) ** 2,
    )


@dataclass(frozen=True)
class FluxResidual:
    res_m: float
    res_p: float
    applicable: bool

    def __iter__(self):
        return iter((self.res_m, self.res_p))


def density_flux_residual(trace: EvolutionTrace,
                          d: DispersionSpec) -> FluxResidual:
    """Discrete defect of the linear density-flux identities.

    res_m = max_t ||dM/dt + dP/dx||_L1 / ||M||_L1 with dM/dt by centered
    differences on snapshots and dP/dx spectral; res_p analogous with the
    momentum flux 4|u_x|^2 - d^2/dx^2 M.  Both vanish at second order as
    the output interval shrinks.  The identities are exact only for the
    free Schrodinger flow; other dispersions are flagged not-applicable
    but still measured.
    """
    if len(trace.snapshots) < 3:
        raise ConfigurationError("need at least 3 stored snapshots")
    grid = trace.grid
    xi = grid.frequencies
    applicable = bool(np.allclose(np.asarray(d.a(xi), dtype=float), xi**2))
    h = trace.dt_out
    res_m = 0.0
    res_p = 0.0
    for i in range(1, len(trace.snapshots) - 1):
        um, u0, up = (trace.snapshots[i + s] for s in (-1, 0, 1))
        dm, d0, dp = densities(um), densities(u0), densities(up)
        dm_dt = (dp.mass - dm.mass) / (2 * h)
        dp_dt = (dp.momentum - dm.momentum) / (2 * h)
        dpdx = _ddx_arr(d0.momentum.astype(np.complex128), grid).real
        flux = d0.energy - _ddx_arr(
            _ddx_arr(d0.mass.astype(np.complex128), grid), grid).real
        dfdx = _ddx_arr(flux.astype(np.complex128), grid).real
        norm_m = float(np.sum(np.abs(d0.mass)) * grid.dx)
        if norm_m > 0:
            res_m = max(res_m, float(
                np.sum(np.abs(dm_dt + dpdx)) * grid.dx) / norm_m)
            res_p = max(res_p, float(
                np.sum(np.abs(dp_dt + dfdx)) * grid.dx) / norm_m)
    return FluxResidual(res_m=res_m, res_p=res_p, applicable=applicable)


def strichartz_norms(trace: EvolutionTrace) -> tuple:
    """(L6_{t,x}, Linf_t L2_x, L4_t Linf_x) over the trace window."""
    if not trace.times:
        raise ConfigurationError("empty trace")
    ts = np.asarray(trace.times)
    if trace.snapshots:
        l6_density = np.array([
            float(np.sum(np.abs(s.values) ** 6) * s.grid.dx)
            for s in trace.snapshots])
        sup = np.array([s.norm_sup() for s in trace.snapshots])
        mass = np.array([s.norm_l2() ** 2 for s in trace.snapshots])
    else:
        l6_final = trace.column("l6_accum")[-1]
        sup = trace.column("linfty")
        mass = trace.column("mass")
        l4 = float(np.trapezoid(sup**4, ts)) ** 0.25
        return float(l6_final) ** (1.0 / 6.0), float(np.sqrt(np.max(mass))), l4
    l6 = float(np.trapezoid(l6_density, ts)) ** (1.0 / 6.0)
    linf_l2 = float(np.sqrt(np.max(mass)))
    l4_linf = float(np.trapezoid(sup**4, ts)) ** 0.25
    return l6, linf_l2, l4_linf


def bilinear_norm(trace: EvolutionTrace, x0: float = 0.0,
                  weight: str = "none") -> float:
    """|| d/dx (u conj(u(. + x0))) || in L2_t (H^{-1/2}_x or L2_x).

    The shift snaps to the nearest grid multiple; the snapped value is
    what is measured.
    """
    if weight not in ("none", "sobolev_minus_half"):
        raise ConfigurationError(f"unknown weight {weight!r}")
    if not trace.snapshots:
        raise ConfigurationError("bilinear_norm needs stored snapshots")
    grid = trace.grid
    shift = int(np.round(x0 / grid.dx))
    ts = np.asarray(trace.times)
    xi = grid.frequencies
    mult = (1.0 + xi**2) ** -0.25 if weight == "sobolev_minus_half" else 1.0
    sq = np.empty(len(trace.snapshots))
    for i, snap in enumerate(trace.snapshots):
        v = snap.values * np.conj(np.roll(snap.values, -shift))
        spec = to_spectral(ComplexField(grid=grid, values=v))
        w = 1j * xi * spec.coeffs * mult
        sq[i] = np.sum(np.abs(w) ** 2) * (2.0 * np.pi / grid.length)
    return float(np.sqrt(np.trapezoid(sq, ts)))


def interaction_morawetz(uk: ComplexField, uj: ComplexField) -> float:
    """Ordered pairing I = int_{x<y} M_k(x) P_j(y) - M_j(y) P_k(x) dx dy.

    O(n) via prefix sums with the ordered integral cut at the left
    boundary of the periodic grid.
    """
    require_same_grid(uk, uj)
    dx = uk.grid.dx
    dk = densities(uk)
    dj = densities(uj)
    # strict x < y: cumulative sums exclude the diagonal cell
    cum_mk = np.concatenate([[0.0], np.cumsum(dk.mass)[:-1]]) * dx
    cum_pk = np.concatenate([[0.0], np.cumsum(dk.momentum)[:-1]]) * dx
    term1 = np.sum(dj.momentum * cum_mk) * dx
    term2 = np.sum(dj.mass * cum_pk) * dx
    return float(term1 - term2)


@dataclass(frozen=True)
class MorawetzReport:
    time: float
    value: float
    rate: float
    leading_terms: tuple
    residual: float


def morawetz_rate(trace: EvolutionTrace, k: int | None = None,
                  j: int | None = None,
                  scheme: LPScheme | None = None) -> list:
    """Windowed Morawetz functional, rate, and leading-order terms.

    ``k``/``j`` select LP regions (None = full band).  The rate is a
    centered difference of I between output snapshots; the leading terms
    are the instantaneous ||d/dx (u_k conj(u_j))||^2 and, on the
    diagonal, ||u_k||_6^6.  The residual subtracts the calibrated
    combination 4 * bilinear + 2 * Re(gamma) * L6 (constant symbols).
    """
    if len(trace.snapshots) < 3:
        raise ConfigurationError("need at least 3 stored snapshots")
    grid = trace.grid

    def piece(snap, region):
        if region is None or scheme is None:
            return snap
        return lp_project(snap, scheme, region)

    uks = [piece(s, k) for s in trace.snapshots]
    ujs = uks if j == k else [piece(s, j) for s in trace.snapshots]
    values = np.array([interaction_morawetz(a, b) for a, b in zip(uks, ujs)])
    h = trace.dt_out
    gamma = trace.meta.get("gamma")
    gamma_re = float(np.real(gamma)) if gamma is not None else 0.0
    diagonal = j == k
    reports = []
    for i in range(1, len(values) - 1):
        rate = float((values[i + 1] - values[i - 1]) / (2 * h))
        a = uks[i]
        b = ujs[i]
        prod = a.values * np.conj(b.values)
        dprod = _ddx_arr(prod, grid)
        lead_bi = float(np.sum(np.abs(dprod) ** 2) * grid.dx)
        lead_l6 = float(np.sum(np.abs(a.values) ** 6) * grid.dx) if diagonal else 0.0
        residual = rate - (4.0 * lead_bi + 2.0 * gamma_re * lead_l6)
        reports.append(MorawetzReport(
            time=float(trace.times[i]), value=float(values[i]), rate=rate,
            leading_terms=(lead_bi, lead_l6), residual=residual))
    return reports
