"""Littlewood-Paley projections and slowly-varying frequency envelopes.

Projections use sharp Fourier cutoffs so that the pieces partition the
spectrum exactly and Parseval splits without overlap corrections.

Dyadic regions: k = 0 covers |xi| <= 1, region k >= 1 covers
2**(k-1) < |xi| <= 2**k.  Lattice regions are unit-width intervals
centered on integer multiples of ``unit``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .grid import ComplexField, to_physical, to_spectral

ENVELOPE_FLOOR = 1e-8


@dataclass(frozen=True)
class LPScheme:
    """Decomposition family: dyadic shells or a unit-interval lattice.

    ``delta`` is the slow-variation exponent for dyadic envelopes;
    ``unit`` the lattice interval width; ``maximal_constant`` the bound K
    in the lattice slow-variation condition M c_k <= K c_k.
    """

    kind: str = "dyadic"
    delta: float = 0.5
    unit: float = 1.0
    maximal_constant: float = 4.0

    def __post_init__(self):
        if self.kind not in ("dyadic", "lattice"):
            raise ConfigurationError(f"unknown LP scheme kind {self.kind!r}")
        if self.delta <= 0 or self.unit <= 0:
            raise ConfigurationError("delta and unit must be positive")


def lp_mask(grid, scheme: LPScheme, k: int) -> np.ndarray:
    """Boolean mask over ``grid.frequencies`` selecting region ``k``."""
    xi = grid.frequencies
    if scheme.kind == "dyadic":
        if k < 0:
            return np.zeros_like(xi, dtype=bool)
        if k == 0:
            return np.abs(xi) <= 1.0
        return (np.abs(xi) > 2.0 ** (k - 1)) & (np.abs(xi) <= 2.0**k)
    lo = (k - 0.5) * scheme.unit
    hi = (k + 0.5) * scheme.unit
    return (xi >= lo) & (xi < hi)


def lp_region_indices(grid, scheme: LPScheme) -> list[int]:
    """Region indices intersecting the grid's frequency range."""
    xi_max = float(np.max(np.abs(grid.frequencies)))
    if scheme.kind == "dyadic":
        k_max = max(0, int(np.ceil(np.log2(max(xi_max, 1.0)))))
        return list(range(k_max + 1))
    k_lo = int(np.round(grid.frequencies[0] / scheme.unit))
    k_hi = int(np.round(grid.frequencies[-1] / scheme.unit))
    return list(range(k_lo, k_hi + 1))


def lp_project(f: ComplexField, scheme: LPScheme, k: int) -> ComplexField:
    """Sharp-cutoff projection of ``f`` onto LP region ``k``.

    Out-of-range ``k`` yields the zero field, not an error.
    """
    spec = to_spectral(f)
    coeffs = np.where(lp_mask(f.grid, scheme, k), spec.coeffs, 0.0)
    return to_physical(type(spec)(grid=f.grid, coeffs=coeffs, time=f.time))


def lp_piece_norms(f: ComplexField, scheme: LPScheme) -> dict[int, float]:
    """L2 norm of each LP piece, computed spectrally via Parseval."""
    spec = to_spectral(f)
    dxi = 2.0 * np.pi / f.grid.length
    power = np.abs(spec.coeffs) ** 2
    out = {}
    for k in lp_region_indices(f.grid, scheme):
        out[k] = float(np.sqrt(np.sum(power[lp_mask(f.grid, scheme, k)]) * dxi))
    return out


@dataclass(frozen=True)
class FrequencyEnvelope:
    """Slowly varying l2 weights dominating the LP piece norms.

    Invariants: sum c_k^2 <= 1 (+1e-9); epsilon * c_k >= ||u_k|| for every
    region; slow variation per the scheme (2**(delta|j-k|) ratio bound for
    dyadic, M c <= K c for lattice).  ``epsilon`` absorbs the l2
    renormalization so domination survives it.
    """

    scheme: LPScheme
    weights: dict = field(default_factory=dict)
    epsilon: float = 1.0

    def weight(self, k: int) -> float:
        return self.weights.get(k, ENVELOPE_FLOOR)

    def l2_norm(self) -> float:
        return float(np.sqrt(sum(c * c for c in self.weights.values())))


def _maximal_function(c: np.ndarray) -> np.ndarray:
    """Discrete centered maximal function: max over window averages."""
    n = len(c)
    cum = np.concatenate([[0.0], np.cumsum(c)])
    out = np.array(c, dtype=float)
    for i in range(n):
        for r in range(1, n):
            lo = max(0, i - r)
            hi = min(n, i + r + 1)
            avg = (cum[hi] - cum[lo]) / (hi - lo)
            if avg > out[i]:
                out[i] = avg
        # window averages shrink once the window swallows everything
    return out


def compute_envelope(f: ComplexField, scheme: LPScheme,
                     epsilon: float) -> FrequencyEnvelope:
    """Minimal slowly-varying envelope dominating ||u_k|| / epsilon.

    Dyadic: c_k = max_j (||u_j||/eps) 2**(-delta|j-k|).  Lattice: fixed
    point of c <- max(c, M c / K).  A floor of 1e-8 avoids downstream
    division by zero; weights are l2-renormalized with the scale folded
    into ``epsilon`` so that domination is preserved.
    """
    if epsilon <= 0:
        raise ConfigurationError("epsilon must be positive")
    norms = lp_piece_norms(f, scheme)
    ks = np.array(sorted(norms), dtype=int)
    r = np.array([norms[k] / epsilon for k in ks])
    if scheme.kind == "dyadic":
        gaps = np.abs(ks[:, None] - ks[None, :])
        c = np.max(r[None, :] * 2.0 ** (-scheme.delta * gaps), axis=1)
    else:
        c = np.array(r)
        for _ in range(10 * len(ks) + 10):
            mc = _maximal_function(c) / scheme.maximal_constant
            new = np.maximum(c, mc)
            if np.allclose(new, c, rtol=0.0, atol=1e-14):
                break
            c = new
    c = np.maximum(c, ENVELOPE_FLOOR)
    scale = max(1.0, float(np.sqrt(np.sum(c * c))))
    weights = {int(k): float(v / scale) for k, v in zip(ks, c)}
    return FrequencyEnvelope(scheme=scheme, weights=weights,
                             epsilon=epsilon * scale)
