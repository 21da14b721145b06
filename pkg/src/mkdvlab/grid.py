"""Grids, transform conventions, Fourier multipliers and the exact Airy group.

Conventions (fixed once, used by every other module):

* Periodic box of length ``L`` with ``n_x`` points, ``x_j = j * dx``.
  Frequencies ascending, ``xi_k = (k - n_x/2) * dxi`` with ``dxi = 2*pi/L``.
* Forward transform ``uhat(xi) = dx * sum_j exp(-i x_j xi) u(x_j)``,
  the Riemann sum for ``int exp(-i x xi) u(x) dx``.
* Inverse transform carries the measure ``dxi / (2*pi)``.
* Frequency-side integrals always use the normalized cell measure
  ``dxi/(2*pi)`` (and ``dtau/(2*pi)``), so that Plancherel reads
  ``||u||_{L^2(dx)}^2 = int |uhat|^2 dxi/(2*pi)`` without stray constants.
* Time transforms act on the window ``[0, T)`` with ``tau`` spacing
  ``2*pi/T``; the space-time transform multiplies by a smooth compactly
  supported window first (Airy flows are not time periodic).

The smooth window is the C-infinity flat-top bump

    w(t) = step(t / ramp) * step((T - t) / ramp),      ramp = T / window_ramp,
    step(u) = sigma(u) / (sigma(u) + sigma(1 - u)),    sigma(u) = exp(-1/u) (u > 0).

All operations here are pure functions of immutable inputs; reductions are
plain numpy sums in fixed (C-order) index order, so repeated runs are
bitwise deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

TAU_HEADROOM = 0.8  # max |xi|^3 must stay below this fraction of max |tau|


class GridError(ValueError):
    """Invalid grid parameters or mismatched grids."""


class RangeError(FloatingPointError):
    """A multiplier produced a non-finite amplitude."""


def smooth_step(u: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for u <= 0, 1 for u >= 1, strictly monotone between."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(u > 0.0, np.exp(-1.0 / np.where(u > 0.0, u, 1.0)), 0.0)
        b = np.where(u < 1.0, np.exp(-1.0 / np.where(u < 1.0, 1.0 - u, 1.0)), 0.0)
    return a / (a + b)


@dataclass(frozen=True)
class Grid:
    """Discretization of the space-time box [0, L) x [0, T).

    ``n_x`` must be a power of two.  The tau-grid must be wide enough to
    carry the cubic curve ``tau = xi^3`` of every retained mode:
    ``max|xi|^3 <= TAU_HEADROOM * max|tau|``.  Grids used only for
    physical-side work may opt out with ``require_tau_cover=False``.
    """

    n_x: int
    length: float
    n_t: int = 64
    t_window: float = 1.0
    require_tau_cover: bool = True
    window_ramp: float = 20.0  # ramp length is t_window / window_ramp

    def __post_init__(self) -> None:
        if self.n_x < 4 or (self.n_x & (self.n_x - 1)) != 0:
            raise GridError(f"n_x must be a power of two >= 4, got {self.n_x}")
        if self.length <= 0 or self.t_window <= 0:
            raise GridError("length and t_window must be positive")
        if self.n_t < 4 or self.n_t % 2:
            raise GridError(f"n_t must be even and >= 4, got {self.n_t}")
        if self.require_tau_cover:
            ximax = np.max(np.abs(self.xi))
            taumax = np.max(np.abs(self.tau))
            if ximax**3 > TAU_HEADROOM * taumax:
                raise GridError(
                    f"tau range too small: max|xi|^3 = {ximax ** 3:.4g} exceeds "
                    f"{TAU_HEADROOM} * max|tau| = {TAU_HEADROOM * taumax:.4g}; "
                    f"increase n_t or decrease t_window"
                )

    # -- derived quantities -------------------------------------------------

    @property
    def dx(self) -> float:
        return self.length / self.n_x

    @property
    def dxi(self) -> float:
        return 2.0 * np.pi / self.length

    @property
    def dt(self) -> float:
        return self.t_window / self.n_t

    @property
    def dtau(self) -> float:
        return 2.0 * np.pi / self.t_window

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n_x) * self.dx

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.n_t) * self.dt

    @property
    def xi(self) -> np.ndarray:
        """Ascending frequency grid, symmetric about 0 up to the Nyquist mode."""
        return (np.arange(self.n_x) - self.n_x // 2) * self.dxi

    @property
    def tau(self) -> np.ndarray:
        return (np.arange(self.n_t) - self.n_t // 2) * self.dtau

    # -- normalized measures -------------------------------------------------

    @property
    def mxi(self) -> float:
        """Frequency cell measure dxi/(2 pi)."""
        return self.dxi / (2.0 * np.pi)

    @property
    def mtau(self) -> float:
        """Time-frequency cell measure dtau/(2 pi)."""
        return self.dtau / (2.0 * np.pi)

    # -- transforms (ascending-order storage) --------------------------------

    def forward_x(self, values: np.ndarray) -> np.ndarray:
        """Physical -> frequency along the last axis."""
        return self.dx * np.fft.fftshift(np.fft.fft(values, axis=-1), axes=-1)

    def inverse_x(self, values: np.ndarray) -> np.ndarray:
        """Frequency -> physical along the last axis."""
        return np.fft.ifft(np.fft.ifftshift(values, axes=-1), axis=-1) / self.dx

    def forward_t(self, values: np.ndarray) -> np.ndarray:
        """Time -> tau along the first axis (no window; caller applies one)."""
        return self.dt * np.fft.fftshift(np.fft.fft(values, axis=0), axes=0)

    def inverse_t(self, values: np.ndarray) -> np.ndarray:
        return np.fft.ifft(np.fft.ifftshift(values, axes=0), axis=0) / self.dt

    def time_window(self) -> np.ndarray:
        """Smooth flat-top bump on [0, T), one value per time sample."""
        ramp = self.t_window / self.window_ramp
        t = self.t
        return smooth_step(t / ramp) * smooth_step((self.t_window - t) / ramp)

    def window_spectrum(self) -> np.ndarray:
        """tau-side transform of the window, on the tau grid."""
        return self.forward_t(self.time_window().astype(complex))

    def compatible(self, other: "Grid") -> bool:
        return (
            self.n_x == other.n_x
            and self.length == other.length
            and self.n_t == other.n_t
            and self.t_window == other.t_window
        )


Side = Literal["physical", "frequency"]


@dataclass
class SpectralField:
    """Complex amplitudes on a grid: 1D data u0 or 2D space-time functions.

    1D: shape (n_x,), indexed by x (physical) or xi (frequency).
    2D: shape (n_t, n_x), axis 0 is t (or tau), axis 1 is x (or xi).
    """

    grid: Grid
    values: np.ndarray
    side: Side = "frequency"

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim == 1:
            if self.values.shape != (self.grid.n_x,):
                raise GridError("1D field shape does not match grid")
        elif self.values.ndim == 2:
            if self.values.shape != (self.grid.n_t, self.grid.n_x):
                raise GridError("2D field shape does not match grid")
        else:
            raise GridError("fields are 1D or 2D")

    @property
    def ndim(self) -> int:
        return self.values.ndim

    def to_frequency(self) -> "SpectralField":
        """Transform in x only (1D) or in x and t (2D, unwindowed)."""
        if self.side == "frequency":
            return self
        v = self.grid.forward_x(self.values)
        if self.ndim == 2:
            v = self.grid.forward_t(v)
        return SpectralField(self.grid, v, "frequency")

    def to_physical(self) -> "SpectralField":
        if self.side == "physical":
            return self
        v = self.grid.inverse_x(self.values)
        if self.ndim == 2:
            v = self.grid.inverse_t(v)
        return SpectralField(self.grid, v, "physical")

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.values.copy(), self.side)


def from_profile(grid: Grid, fn, side: Side = "frequency") -> SpectralField:
    """1D field from a closed-form profile evaluated on the xi (or x) grid."""
    axis = grid.xi if side == "frequency" else grid.x
    return SpectralField(grid, np.asarray(fn(axis), dtype=complex), side)


# -- multipliers --------------------------------------------------------------

MultiplierKind = Literal["riesz", "bessel", "lambda", "lowpass"]


@dataclass(frozen=True)
class MultiplierSpec:
    """Fourier multiplier: riesz |xi|^s, bessel <xi>^s, lambda <tau - xi^3>^b,
    or the low-frequency projection chi_{|xi| <= 1}.

    Riesz with any nonzero order annihilates the zero mode: for s > 0 that is
    the limit value, for s < 0 the operator is only ever applied where the
    zero mode is irrelevant, so annihilation is the conservative choice.
    """

    kind: MultiplierKind
    order: float = 0.0

    def symbol(self, grid: Grid, two_dim: bool) -> np.ndarray:
        xi = grid.xi
        if self.kind == "riesz":
            if self.order == 0.0:
                sym = np.ones_like(xi)
            else:
                with np.errstate(divide="ignore"):
                    sym = np.where(xi == 0.0, 0.0, np.abs(xi) ** self.order)
        elif self.kind == "bessel":
            sym = (1.0 + xi**2) ** (self.order / 2.0)
        elif self.kind == "lowpass":
            sym = (np.abs(xi) <= 1.0).astype(float)
        elif self.kind == "lambda":
            if not two_dim:
                raise GridError("lambda multiplier needs a 2D field")
            sym = (1.0 + (grid.tau[:, None] - xi[None, :] ** 3) ** 2) ** (
                self.order / 2.0
            )
            return sym
        else:  # pragma: no cover - literal type guards this
            raise GridError(f"unknown multiplier kind {self.kind!r}")
        return sym[None, :] if two_dim else sym


def apply_multiplier(f: SpectralField, m: MultiplierSpec) -> SpectralField:
    """Pointwise multiplication on the frequency side; grid unchanged."""
    if not np.isfinite(m.order):
        raise RangeError("multiplier order must be finite")
    g = f.to_frequency()
    # overflow is detected on the product below, not left to warnings
    with np.errstate(over="ignore", invalid="ignore"):
        sym = m.symbol(g.grid, g.ndim == 2)
        out = g.values * sym
    if not np.all(np.isfinite(out)):
        bad = np.argwhere(~np.isfinite(out))[0]
        raise RangeError(
            f"multiplier {m.kind}^{m.order} overflowed at grid index {tuple(bad)}"
        )
    return SpectralField(g.grid, out, "frequency")


def airy_propagate(u0: SpectralField, t: float) -> SpectralField:
    """Exact Airy group e^{-t d^3/dx^3}: frequency phases exp(i t xi^3)."""
    if u0.ndim != 1:
        raise GridError("airy_propagate takes 1D data")
    g = u0.to_frequency()
    phase = np.exp(1j * t * g.grid.xi**3)
    return SpectralField(g.grid, g.values * phase, "frequency")


def airy_flow_2d(u0: SpectralField, windowed: bool = False) -> SpectralField:
    """Frequency(x)-side time samples of the Airy flow of 1D data u0.

    Returns a 2D field whose axis 0 is physical time and axis 1 is xi (a
    "half transformed" layout used by the multilinear operators).  With
    ``windowed=True`` the smooth time window is applied.
    """
    g = u0.to_frequency()
    grid = g.grid
    phases = np.exp(1j * grid.t[:, None] * grid.xi[None, :] ** 3)
    vals = phases * g.values[None, :]
    if windowed:
        vals = vals * grid.time_window()[:, None]
    return SpectralField(grid, vals, "frequency")  # frequency in x, time in axis 0


def spacetime_transform(f: SpectralField, windowed: bool = True) -> SpectralField:
    """Windowed discrete transform of 2D physical samples to (tau, xi)."""
    if f.ndim != 2:
        raise GridError("spacetime_transform takes 2D fields")
    if f.side != "physical":
        raise GridError("spacetime_transform takes physical-side samples")
    grid = f.grid
    v = f.values
    if windowed:
        v = v * grid.time_window()[:, None]
    v = grid.forward_x(v)
    v = grid.forward_t(v)
    return SpectralField(grid, v, "frequency")


def halfspec_to_spacetime(f: SpectralField, windowed: bool = True) -> SpectralField:
    """Time-sampled, xi-side 2D field -> full (tau, xi) amplitudes."""
    if f.ndim != 2:
        raise GridError("expected a 2D field")
    grid = f.grid
    v = f.values
    if windowed:
        v = v * grid.time_window()[:, None]
    return SpectralField(grid, grid.forward_t(v), "frequency")
