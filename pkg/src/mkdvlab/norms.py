"""Fourier-Lebesgue, mixed, and dispersive restriction norms.

All norms are Riemann sums over the frequency grid with the normalized
cell measures ``dxi/(2 pi)`` and ``dtau/(2 pi)`` of :mod:`mkdvlab.grid`,
so values converge to the corresponding continuum integrals under grid
refinement.  Infinite exponents are explicit supremum branches, never
large-exponent limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Grid, GridError, SpectralField


def conjugate_exponent(p: float) -> float:
    """Holder conjugate; accepts 1 <= p <= inf, maps 1 <-> inf."""
    if p == math.inf:
        return 1.0
    if p < 1.0:
        raise ValueError(f"exponent {p} out of range [1, inf]")
    if p == 1.0:
        return math.inf
    return p / (p - 1.0)


@dataclass(frozen=True)
class FLParams:
    """Data-space exponents (r, s): Lebesgue dual index and regularity."""

    r: float
    s: float = 0.0

    def __post_init__(self) -> None:
        if not self.r > 1.0:
            raise ValueError(f"r must exceed 1, got {self.r}")

    @property
    def r_conj(self) -> float:
        return conjugate_exponent(self.r)


@dataclass(frozen=True)
class MixedParams:
    """Outer/inner space-time exponents (q over xi, p over tau)."""

    p: float
    q: float

    def __post_init__(self) -> None:
        for e in (self.p, self.q):
            if not (e >= 1.0):
                raise ValueError(f"exponent {e} out of range [1, inf]")

    @property
    def p_conj(self) -> float:
        return conjugate_exponent(self.p)

    @property
    def q_conj(self) -> float:
        return conjugate_exponent(self.q)


@dataclass(frozen=True)
class XsbParams:
    """Restriction-norm exponents (r, s, b); b may be negative for probes."""

    r: float
    s: float
    b: float

    def __post_init__(self) -> None:
        if not self.r > 1.0:
            raise ValueError(f"r must exceed 1, got {self.r}")

    @property
    def r_conj(self) -> float:
        return conjugate_exponent(self.r)


def _lp_sum(values: np.ndarray, exponent: float, measure: float, axis=None):
    """(sum |v|^e * measure)^(1/e), with the e = inf branch a supremum."""
    a = np.abs(values)
    if exponent == math.inf:
        return a.max(axis=axis) if a.size else 0.0
    return (np.sum(a**exponent, axis=axis) * measure) ** (1.0 / exponent)


def fl_norm(u0: SpectralField, p: FLParams) -> float:
    """|| <xi>^s uhat ||_{L^{r'}} with the normalized xi measure."""
    if u0.ndim != 1:
        raise GridError("fl_norm takes 1D data")
    g = u0.to_frequency()
    w = (1.0 + g.grid.xi**2) ** (p.s / 2.0)
    return float(_lp_sum(w * g.values, p.r_conj, g.grid.mxi))

def mixed_fl_norm(f: SpectralField, m: MixedParams) -> float:
    """Inner tau-sum at exponent p', outer xi-sum at exponent q'.

    Collapses to the full space-time dual norm when p == q.
    """
    if f.ndim != 2:
        raise GridError("mixed_fl_norm takes 2D fields")
    g = f.to_frequency()
    grid = g.grid
    inner = _lp_sum(g.values, m.p_conj, grid.mtau, axis=0)
    return float(_lp_sum(inner, m.q_conj, grid.mxi))


def xsb_norm(f: SpectralField, p: XsbParams) -> float:
    """Restriction norm with weights <xi>^s and <tau - xi^3>^b."""
    if f.ndim != 2:
        raise GridError("xsb_norm takes 2D fields")
    g = f.to_frequency()
    grid = g.grid
    ws = (1.0 + grid.xi**2) ** (p.s / 2.0)
    wb = (1.0 + (grid.tau[:, None] - grid.xi[None, :] ** 3) ** 2) ** (p.b / 2.0)
    weighted = g.values * ws[None, :] * wb
    rc = p.r_conj
    return float((np.sum(np.abs(weighted) ** rc) * grid.mxi * grid.mtau) ** (1.0 / rc))


def xsb_norm_centered(f: SpectralField, p: XsbParams, windowed: bool = False) -> float:
    """Restriction norm evaluated in the comoving variable mu = tau - xi^3.

    Each xi column is demodulated by exp(-i t xi^3) before the time
    transform, so the dispersive weight becomes <mu>^b on the stored tau
    grid.  This is the continuum change of variables tau -> tau - xi^3 and
    avoids requiring the tau grid to reach max|xi|^3.  ``windowed`` applies
    the grid's smooth time window first (for time-sampled content that was
    not windowed yet).
    """
    if f.ndim != 2:
        raise GridError("xsb_norm_centered takes 2D fields")
    g = f.to_frequency()
    grid = g.grid
    half = grid.inverse_t(g.values)  # (t, xi) samples
    if windowed:
        half = half * grid.time_window()[:, None]
    demod = half * np.exp(-1j * grid.t[:, None] * grid.xi[None, :] ** 3)
    spec = grid.forward_t(demod)
    ws = (1.0 + grid.xi**2) ** (p.s / 2.0)
    wb = (1.0 + grid.tau**2) ** (p.b / 2.0)
    weighted = spec * ws[None, :] * wb[:, None]
    rc = p.r_conj
    return float((np.sum(np.abs(weighted) ** rc) * grid.mxi * grid.mtau) ** (1.0 / rc))


def spacetime_lp_norm(f: SpectralField, exponent: float, windowed: bool = True) -> float:
    """Physical-side L^e norm over the box, with the smooth time window
    as the cutoff measure (the continuum statements live on all of R_t)."""
    if f.ndim != 2:
        raise GridError("spacetime_lp_norm takes 2D fields")
    g = f.to_physical()
    grid = g.grid
    a = np.abs(g.values)
    if exponent == math.inf:
        return float(a.max())
    w = grid.time_window()[:, None] if windowed else 1.0
    return float((np.sum(a**exponent * w) * grid.dx * grid.dt) ** (1.0 / exponent))


def sr_threshold(r: float) -> float:
    """Regularity threshold s(r) = 1/2 - 1/(2r) for the data space."""
    if not (1.0 < r <= 2.0):
        raise ValueError(f"r must lie in (1, 2], got {r}")
    return 0.5 - 0.5 / r


def scaling_sigma(s: float, r: float) -> float:
    """Sobolev scale sigma with s - 1/r = sigma - 1/2."""
    return s - 1.0 / r + 0.5


def lifespan_exponent(r: float) -> float:
    """Predicted power of the data norm in the local lifespan, -2r/(r-1)."""
    if not (1.0 < r <= 2.0):
        raise ValueError(f"r must lie in (1, 2], got {r}")
    return -2.0 * r / (r - 1.0)
