"""Nonlinear time integration of i u_t - A(D) u = C(u, ubar, u).

The stiff linear part is applied exactly through integrating factors;
the cubic term is evaluated pseudospectrally in separable rank-r form
with 2x zero-padding, which is exact for cubic products.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUpError, ConfigurationError
from .grid import ComplexField, GridSpec, SQRT_2PI, check_wrap_guard, to_physical, to_spectral
from .symbols import DispersionSpec, TrilinearSpec

DEALIAS_MODES = ("pad2x", "none")
SCHEMES = ("ifrk4", "strang")


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    t_end: float
    dealias: str = "pad2x"
    output_stride: int = 1
    scheme: str = "ifrk4"
    store_snapshots: bool = True
    blowup_threshold: float = 1e8

    def __post_init__(self):
        errors = []
        if not self.dt > 0:
            errors.append(f"dt must be positive, got {self.dt}")
        elif not self.t_end >= self.dt:
            errors.append(f"t_end must be >= dt, got {self.t_end}")
        if self.dealias not in DEALIAS_MODES:
            errors.append(f"dealias must be one of {DEALIAS_MODES}, got {self.dealias!r}")
        if self.output_stride < 1:
            errors.append(f"output_stride must be >= 1, got {self.output_stride}")
        if self.scheme not in SCHEMES:
            errors.append(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if errors:
            raise ConfigurationError(errors)


@dataclass
class EvolutionTrace:
    """Output of a run: diagnostic rows plus optional stored snapshots."""

    grid: GridSpec
    times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    blowup_time: float | None = None
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([row.get(name, np.nan) for row in self.diagnostics])

    @property
    def dt_out(self) -> float:
        if len(self.times) < 2:
            return 0.0
        return float(self.times[1] - self.times[0])


class _SpectralWorkspace:
    """Per-run scratch: phases and padded-transform bookkeeping.

    Operates on spectral coefficient arrays in ascending frequency order,
    matching ``GridSpec.frequencies``.
    """

    def __init__(self, grid: GridSpec, c: TrilinearSpec, dealias: str):
        self.grid = grid
        self.c = c
        self.dealias = dealias
        n = grid.n_points
        self.n = n
        xi = grid.frequencies
        if dealias == "pad2x":
            self.fine = GridSpec(n_points=2 * n, length=grid.length)
            self.band = slice(n // 2, n // 2 + n)
        else:
            self.fine = grid
            self.band = slice(0, n)
        # multiplier arrays per separable term, conjugated in the middle slot
        self.filters = []
        for (f, g, h), alpha in zip(c.terms, c.weights):
            self.filters.append((
                np.asarray(f(xi), dtype=np.complex128),
                np.conj(np.asarray(g(xi), dtype=np.complex128)),
                np.asarray(h(xi), dtype=np.complex128),
                complex(alpha),
            ))

    def _to_fine_physical(self, coeffs: np.ndarray) -> np.ndarray:
        g = self.fine
        if self.dealias == "pad2x":
            padded = np.zeros(g.n_points, dtype=np.complex128)
            padded[self.band] = coeffs
        else:
            padded = coeffs
        cfft = np.fft.ifftshift(padded) / g._phase_fwd
        return np.fft.ifft(cfft) * (SQRT_2PI / g.dx)

    def _from_fine_physical(self, values: np.ndarray) -> np.ndarray:
        g = self.fine
        cfft = (g.dx / SQRT_2PI) * np.fft.fft(values) * g._phase_fwd
        return np.fft.fftshift(cfft)[self.band]

    def trilinear(self, coeffs: np.ndarray) -> np.ndarray:
        """Spectral coefficients of C(u, ubar, u) from those of u.

        The middle slot carries conj((g*)(D) u) with g*(xi) = conj(g(xi)),
        so that its spectrum contributes g(xi2) conj(u_hat(xi2)) on the
        hyperplane xi1 - xi2 + xi3 = xi.
        """
        cache: dict[bytes, np.ndarray] = {}

        def fine_field(mult: np.ndarray) -> np.ndarray:
            key = mult.tobytes()
            out = cache.get(key)
            if out is None:
                out = self._to_fine_physical(mult * coeffs)
                cache[key] = out
            return out

        total = np.zeros(self.fine.n_points, dtype=np.complex128)
        for f_arr, g_star, h_arr, alpha in self.filters:
            prod = fine_field(f_arr) * np.conj(fine_field(g_star)) * fine_field(h_arr)
            total += alpha * prod
        return self._from_fine_physical(total)


def eval_trilinear(c: TrilinearSpec, u: ComplexField,
                   dealias: str = "pad2x") -> ComplexField:
    """Evaluate the cubic nonlinearity C(u, ubar, u) on a field."""
    ws = _SpectralWorkspace(u.grid, c, dealias)
    coeffs = to_spectral(u).coeffs
    out = ws.trilinear(coeffs)
    return to_physical(type(to_spectral(u))(grid=u.grid, coeffs=out, time=u.time))


def _constant_gamma(c: TrilinearSpec) -> complex | None:
    """Return gamma when the symbol is constant on a probe set, else None."""
    probe = np.array([-1.7, 0.0, 2.3])
    vals = c.eval(probe[:, None, None], probe[None, :, None], probe[None, None, :])
    first = vals.flat[0]
    if np.allclose(vals, first, rtol=0.0, atol=1e-13 * (1 + abs(first))):
        return complex(first)
    return None


def _ifrk4_step(coeffs, dt, a_vals, ws):
    """Classical RK4 in the interaction picture; linear phase exact."""
    e_half = np.exp(-0.5j * dt * a_vals)
    e_full = e_half * e_half

    def nonlin(ch):
        return -1j * ws.trilinear(ch)

    k1 = nonlin(coeffs)
    k2 = np.conj(e_half) * nonlin(e_half * (coeffs + 0.5 * dt * k1))
    k3 = np.conj(e_half) * nonlin(e_half * (coeffs + 0.5 * dt * k2))
    k4 = np.conj(e_full) * nonlin(e_full * (coeffs + dt * k3))
    w1 = coeffs + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return e_full * w1


def _exact_cubic_phase(values, dt, gamma):
    """Exact solution of u' = -i gamma |u|^2 u over one step."""
    y0 = np.abs(values) ** 2
    im, re = gamma.imag, gamma.real
    if im == 0.0:
        return values * np.exp(-1j * re * y0 * dt)
    denom = 1.0 - 2.0 * im * y0 * dt
    with np.errstate(divide="ignore", invalid="ignore"):
        amp = denom**-0.5
        phase = (re / (2.0 * im)) * np.log(denom)
    return values * amp * np.exp(1j * phase)


def _strang_step(coeffs, dt, a_vals, gamma, grid):
    # exact linear half-steps around the exact pointwise cubic ODE
    e_half = np.exp(-0.5j * dt * a_vals)
    half = e_half * coeffs
    cfft = np.fft.ifftshift(half) / grid._phase_fwd
    values = np.fft.ifft(cfft) * (SQRT_2PI / grid.dx)
    values = _exact_cubic_phase(values, dt, gamma)
    back = np.fft.fftshift((grid.dx / SQRT_2PI) * np.fft.fft(values) * grid._phase_fwd)
    return e_half * back


def step(u: ComplexField, d: DispersionSpec, c: TrilinearSpec,
         cfg: SolverConfig) -> ComplexField:
    """Advance one time step; raises BlowUpError on NaN/Inf output."""
    ws = _SpectralWorkspace(u.grid, c, cfg.dealias)
    a_vals = np.asarray(d.a(u.grid.frequencies), dtype=float)
    coeffs = to_spectral(u).coeffs
    if cfg.scheme == "ifrk4":
        out = _ifrk4_step(coeffs, cfg.dt, a_vals, ws)
    else:
        gamma = _constant_gamma(c)
        if gamma is None:
            raise ConfigurationError(
                "strang scheme requires a constant cubic symbol"
            )
        out = _strang_step(coeffs, cfg.dt, a_vals, gamma, u.grid)
    if not np.all(np.isfinite(out.view(float))):
        raise BlowUpError(u.time + cfg.dt)
    spec = to_spectral(u)
    return to_physical(type(spec)(grid=u.grid, coeffs=out, time=u.time + cfg.dt))


def _builtin_row(t, grid, coeffs, values, l6_accum):
    dx = grid.dx
    mass = float(np.sum(np.abs(values) ** 2) * dx)
    du = to_physical(_spec(grid, 1j * grid.frequencies * coeffs, t)).values
    momentum = float(2.0 * np.sum(np.imag(np.conj(values) * du)) * dx)
    return {
        "time": t,
        "mass": mass,
        "momentum": momentum,
        "linfty": float(np.max(np.abs(values))),
        "l6_accum": l6_accum,
    }


def _spec(grid, coeffs, t):
    from .grid import SpectralField

    return SpectralField(grid=grid, coeffs=coeffs, time=t)


def run(u0: ComplexField, d: DispersionSpec, c: TrilinearSpec,
        cfg: SolverConfig, probes=()) -> EvolutionTrace:
    """Integrate and emit one diagnostics row per output step.

    On blow-up the partial trace is returned with ``blowup_time`` set so
    the failure time can still be fitted.
    """
    check_wrap_guard(u0)
    grid = u0.grid
    a_vals = np.asarray(d.a(grid.frequencies), dtype=float)
    ws = _SpectralWorkspace(grid, c, cfg.dealias)
    gamma = _constant_gamma(c)
    if cfg.scheme == "strang" and gamma is None:
        raise ConfigurationError("strang scheme requires a constant cubic symbol")

    trace = EvolutionTrace(grid=grid, meta={
        "dispersion": d.name, "nonlinearity": c.name,
        "gamma": gamma, "dt": cfg.dt, "scheme": cfg.scheme,
    })
    n_steps = int(round(cfg.t_end / cfg.dt))
    coeffs = to_spectral(u0).coeffs
    t = float(u0.time)
    l6_accum = 0.0
    prev_l6_density = 0.0
    prev_t_out = t
    # sup|u| <= (dxi / sqrt(2 pi)) sum |coeffs|; cheap blow-up bound
    sup_factor = SQRT_2PI / grid.length

    def emit(tt, ch):
        nonlocal l6_accum, prev_l6_density, prev_t_out
        values = to_physical(_spec(grid, ch, tt)).values
        l6_density = float(np.sum(np.abs(values) ** 6) * grid.dx)
        if tt > prev_t_out:
            l6_accum += 0.5 * (tt - prev_t_out) * (prev_l6_density + l6_density)
        prev_l6_density = l6_density
        prev_t_out = tt
        row = _builtin_row(tt, grid, ch, values, l6_accum)
        f = ComplexField(grid=grid, values=values, time=tt)
        for probe in probes:
            row.update(probe(f))
        trace.times.append(tt)
        trace.diagnostics.append(row)
        if cfg.store_snapshots:
            trace.snapshots.append(f)

    emit(t, coeffs)
    for k in range(1, n_steps + 1):
        if cfg.scheme == "ifrk4":
            coeffs = _ifrk4_step(coeffs, cfg.dt, a_vals, ws)
        else:
            coeffs = _strang_step(coeffs, cfg.dt, a_vals, gamma, grid)
        t = float(u0.time) + k * cfg.dt
        finite = np.all(np.isfinite(coeffs.view(float)))
        if finite:
            finite = np.sum(np.abs(coeffs)) * sup_factor < cfg.blowup_threshold
        if not finite:
            trace.blowup_time = t
            break
        if k % cfg.output_stride == 0 or k == n_steps:
            emit(t, coeffs)
    return trace
