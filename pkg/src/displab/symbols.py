"""Dispersion relations a(xi), cubic symbols c(xi1, xi2, xi3), and their
classification (conservative / defocusing / focusing), plus resonance
bookkeeping and Fourier multiplier application.

Cubic symbols are kept in separable rank-r form
c = sum_m alpha_m f_m(xi1) g_m(xi2) h_m(xi3), which lets the trilinear
convolution in the evolution module reduce to r pointwise products of
multiplier-filtered fields.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ConvergenceError, RangeError
from .grid import ComplexField, to_physical, to_spectral

CONSERVATIVE_TOL = 1e-8
_FD_STEP = 1e-4


@dataclass(frozen=True)
class DispersionSpec:
    """The real symbol a(xi) with analytic first and second derivatives."""

    a: callable
    a1: callable
    a2: callable
    name: str = "custom"

    def validate_on(self, xi_samples) -> None:
        """Check strict convexity and derivative consistency on samples."""
        xi = np.asarray(xi_samples, dtype=float)
        a2 = np.asarray(self.a2(xi), dtype=float)
        errors = []
        if np.any(a2 <= 0):
            errors.append(f"a2 must be positive on samples for {self.name!r}")
        fd = (self.a(xi + _FD_STEP) - self.a(xi - _FD_STEP)) / (2 * _FD_STEP)
        a1 = np.asarray(self.a1(xi), dtype=float)
        if np.any(np.abs(fd - a1) > 1e-6 * (1.0 + np.abs(a1))):
            errors.append(f"a1 disagrees with finite differences for {self.name!r}")
        if errors:
            raise ConfigurationError(errors)


@dataclass(frozen=True)
class TrilinearSpec:
    """Separable rank-r cubic symbol.

    ``terms`` is a list of (f, g, h) callables on frequency arrays and
    ``weights`` the matching complex prefactors alpha_m.
    """

    terms: list
    weights: list
    name: str = "custom"

    def __post_init__(self):
        if len(self.terms) != len(self.weights) or not self.terms:
            raise ConfigurationError("terms and weights must be nonempty and matched")

    @property
    def rank(self) -> int:
        return len(self.terms)

    def eval(self, xi1, xi2, xi3):
        """Evaluate c(xi1, xi2, xi3) with numpy broadcasting."""
        xi1 = np.asarray(xi1, dtype=float)
        xi2 = np.asarray(xi2, dtype=float)
        xi3 = np.asarray(xi3, dtype=float)
        total = np.zeros(np.broadcast(xi1, xi2, xi3).shape, dtype=np.complex128)
        for (f, g, h), alpha in zip(self.terms, self.weights):
            total = total + alpha * np.asarray(f(xi1)) * np.asarray(g(xi2)) \
                * np.asarray(h(xi3))
        return total

    def diag(self, xi):
        return self.eval(xi, xi, xi)


@dataclass(frozen=True)
class SymbolClassification:
    conservative: bool
    defocusing: bool
    focusing: bool
    max_imag_diag: float
    min_real_diag: float
    sample_count: int


def classify(c: TrilinearSpec, d: DispersionSpec,
             xi_samples) -> SymbolClassification:
    """Classify a cubic symbol from diagonal samples.

    Conservative: |Im c| and |Im grad c| on the diagonal below 1e-8
    (gradient by central differences slot by slot).  Defocusing /
    focusing: conservative with strictly positive / negative real
    diagonal.  The convexity convention a'' > 0 is validated on the same
    samples since the focusing sign is only meaningful relative to it.
    """
    xi = np.asarray(xi_samples, dtype=float)
    if xi.size == 0:
        raise ConfigurationError("xi_samples must be nonempty")
    d.validate_on(xi)
    diag = c.diag(xi)
    imag_max = float(np.max(np.abs(diag.imag)))
    h = _FD_STEP
    for slot in range(3):
        args_p = [xi + h if j == slot else xi for j in range(3)]
        args_m = [xi - h if j == slot else xi for j in range(3)]
        grad = (c.eval(*args_p) - c.eval(*args_m)) / (2 * h)
        imag_max = max(imag_max, float(np.max(np.abs(grad.imag))))
    conservative = imag_max <= CONSERVATIVE_TOL
    min_real = float(np.min(diag.real))
    max_real = float(np.max(diag.real))
    return SymbolClassification(
        conservative=conservative,
        defocusing=conservative and min_real > 0,
        focusing=conservative and max_real < 0,
        max_imag_diag=imag_max,
        min_real_diag=min_real,
        sample_count=int(xi.size),
    )


@dataclass(frozen=True)
class ResonanceQuad:
    """A frequency quadruple with its two resonance residuals."""

    xi: tuple
    delta4_xi: float
    delta4_xi2: float

    @property
    def resonant(self) -> bool:
        return abs(self.delta4_xi) < 1e-12 and abs(self.delta4_xi2) < 1e-12

    @property
    def doubly_resonant(self) -> bool:
        x1, x2, x3, x4 = self.xi
        return self.resonant and abs(x1 - x2) < 1e-12 and abs(x1 - x3) < 1e-12 \
            and abs(x1 - x4) < 1e-12


def resonance_residual(xi) -> ResonanceQuad:
    """Compute Delta4(xi) = xi1 - xi2 + xi3 - xi4 and the same for xi^2."""
    x1, x2, x3, x4 = (float(v) for v in xi)
    return ResonanceQuad(
        xi=(x1, x2, x3, x4),
        delta4_xi=x1 - x2 + x3 - x4,
        delta4_xi2=x1**2 - x2**2 + x3**2 - x4**2,
    )


def legendre_point(d: DispersionSpec, v: float,
                   bracket: tuple = (-64.0, 64.0),
                   max_iter: int = 100) -> tuple:
    """Legendre transform point: (phi(v), xi_v) with a'(xi_v) = v.

    Newton with bisection fallback; strict convexity makes a' monotone so
    the root is unique inside the bracket when v is attainable.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    g_lo = float(d.a1(lo)) - v
    g_hi = float(d.a1(hi)) - v
    if g_lo > 0 or g_hi < 0:
        raise RangeError(
            f"v = {v:.6g} outside the range of a' on [{lo:.6g}, {hi:.6g}]"
        )
    xi = 0.5 * (lo + hi)
    for _ in range(max_iter):
        g = float(d.a1(xi)) - v
        if abs(g) <= 1e-10 * (1.0 + abs(v)):
            phi = v * xi - float(d.a(xi))
            return phi, xi
        if g > 0:
            hi = xi
        else:
            lo = xi
        slope = float(d.a2(xi))
        step = g / slope if slope > 0 else np.inf
        candidate = xi - step
        if not (lo < candidate < hi):
            candidate = 0.5 * (lo + hi)
        xi = candidate
    raise ConvergenceError(
        f"legendre_point did not converge for v = {v:.6g} in {max_iter} iterations"
    )


def apply_multiplier(m: callable, f: ComplexField) -> ComplexField:
    """Apply the Fourier multiplier m(xi) pointwise on the spectrum."""
    spec = to_spectral(f)
    coeffs = np.asarray(m(f.grid.frequencies), dtype=np.complex128) * spec.coeffs
    return to_physical(type(spec)(grid=f.grid, coeffs=coeffs, time=f.time))


# Built-in named symbol library, addressable from run configs.

def _schrodinger(**params) -> DispersionSpec:
    return DispersionSpec(
        a=lambda xi: xi**2,
        a1=lambda xi: 2.0 * xi,
        a2=lambda xi: 2.0 * np.ones_like(np.asarray(xi, dtype=float)),
        name="schrodinger",
    )


def _quartic(beta: float = 0.1, **params) -> DispersionSpec:
    return DispersionSpec(
        a=lambda xi: xi**2 + beta * xi**4,
        a1=lambda xi: 2.0 * xi + 4.0 * beta * xi**3,
        a2=lambda xi: 2.0 + 12.0 * beta * xi**2,
        name="quartic",
    )


def _one(xi):
    return np.ones_like(np.asarray(xi, dtype=float))


def _const_symbol(gamma=2.0, **params) -> TrilinearSpec:
    return TrilinearSpec(terms=[(_one, _one, _one)],
                         weights=[complex(gamma)], name="const")


def _smoothed_symbol(gamma=2.0, sigma: float = 0.5, **params) -> TrilinearSpec:
    def bracket_pow(xi):
        return (1.0 + np.asarray(xi, dtype=float) ** 2) ** (-0.5 * sigma)

    return TrilinearSpec(terms=[(bracket_pow, bracket_pow, bracket_pow)],
                         weights=[complex(gamma)], name="smoothed")


DISPERSION_LIBRARY = {
    "schrodinger": _schrodinger,
    "quartic": _quartic,
}

TRILINEAR_LIBRARY = {
    "const": _const_symbol,
    "smoothed": _smoothed_symbol,
}


def make_dispersion(name: str, **params) -> DispersionSpec:
    if name not in DISPERSION_LIBRARY:
        raise ConfigurationError(
            f"unknown dispersion {name!r}; known: {sorted(DISPERSION_LIBRARY)}"
        )
    return DISPERSION_LIBRARY[name](**params)


def make_trilinear(name: str, **params) -> TrilinearSpec:
    if name not in TRILINEAR_LIBRARY:
        raise ConfigurationError(
            f"unknown nonlinearity {name!r}; known: {sorted(TRILINEAR_LIBRARY)}"
        )
    return TRILINEAR_LIBRARY[name](**params)
