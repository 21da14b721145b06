"""Picard iteration for the modified KdV equation on a periodic box.

The solver realizes the contraction-mapping construction behind the local
well-posedness result: starting from the free Airy flow, it iterates the
Duhamel map

    u(t) = W(t) u0  -  sign * int_0^t W(t - t') d/dx (u^3)(t') dt',

where W(t) is the Airy propagator, until the iterates stop moving in a
windowed restriction norm.  The data is posed at the center of the stored
time window (where the smooth window is flat), and both time directions
are solved simultaneously (the equation is time reversible).

Companion experiments: an independent integrating-factor RK reference,
conservation diagnostics, a flow-map Lipschitz probe, and the lifespan
sweep that fits how the maximal contraction time shrinks as the data
grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson, solve_ivp

from .grid import Grid, GridError, SpectralField, halfspec_to_spacetime
from .norms import FLParams, XsbParams, fl_norm, xsb_norm_centered

DIVERGENCE_FACTOR = 1e6


@dataclass(frozen=True)
class SolverConfig:
    """Contraction setup: norm exponents, step length, iteration limits,
    and the nonlinearity sign (+1 focusing, -1 defocusing)."""

    params: XsbParams
    delta: float
    max_iter: int = 30
    tol: float = 1e-10
    sign: float = 1.0

    def __post_init__(self) -> None:
        if not self.delta > 0.0:
            raise GridError(f"delta must be positive, got {self.delta}")
        if not self.params.b > 1.0 / self.params.r:
            raise GridError("solver norms need b > 1/r")
        if self.sign not in (1.0, -1.0):
            raise GridError(f"sign must be +-1, got {self.sign}")
        if self.max_iter < 1 or not self.tol > 0.0:
            raise GridError("need max_iter >= 1 and tol > 0")


def solver_grid(n_x: int, length: float, delta: float, n_t: int = 80) -> Grid:
    """Grid whose stored time window (length 2.5 delta) keeps the solve
    interval [t_c - delta, t_c + delta] around the center t_c inside the
    flat part of the smooth window; n_t stays a multiple of 5 so
    t_c + delta is an exact sample."""
    if n_t % 5:
        raise GridError("solver grids need n_t divisible by 5")
    return Grid(n_x, length, n_t=n_t, t_window=2.5 * delta, require_tau_cover=False)


def center_time(grid: Grid) -> float:
    """The Duhamel base point: center of the stored time window."""
    return float(grid.t[grid.n_t // 2])


def delta_index(grid: Grid, delta: float) -> int:
    """Index of the exact time sample t_c + delta."""
    idx = grid.n_t // 2 + int(round(delta / grid.dt))
    tc = center_time(grid)
    if not (0 <= idx < grid.n_t) or abs(grid.t[idx] - tc - delta) > 1e-9 * max(delta, 1.0):
        raise GridError("delta is not a time sample offset of this grid")
    return idx


def _cube_rows(rows: np.ndarray, grid: Grid) -> np.ndarray:
    """Frequency rows of u^3 from frequency rows of u, dealiased by a
    4x zero-padded transform."""
    n = grid.n_x
    m = 4 * n
    spec = np.fft.ifftshift(rows, axes=-1) / grid.dx
    big = np.zeros(rows.shape[:-1] + (m,), dtype=complex)
    half = n // 2
    big[..., :half] = spec[..., :half]
    big[..., m - half :] = spec[..., half:]
    u_fine = np.fft.ifft(big, axis=-1) * (m / n)
    cube_big = np.fft.fft(u_fine**3, axis=-1) * (n / m)
    out = np.concatenate([cube_big[..., :half], cube_big[..., m - half :]], axis=-1)
    return np.fft.fftshift(out, axes=-1) * grid.dx


def duhamel_step(rows: np.ndarray, u0: SpectralField, cfg: SolverConfig) -> np.ndarray:
    """One Duhamel map application on frequency rows (t, xi).

    Cumulative Simpson quadrature in t' from the centered sample t = 0;
    with the nonlinearity dropped this returns the free flow exactly.
    """
    grid = u0.grid
    tt = grid.t - center_time(grid)
    phase = np.exp(1j * tt[:, None] * grid.xi[None, :] ** 3)
    nl = 1j * grid.xi[None, :] * _cube_rows(rows, grid)
    integrand = nl / phase
    # cumulative_simpson is real-only in some scipy versions
    cum = cumulative_simpson(
        integrand.real, x=grid.t, axis=0, initial=0.0
    ) + 1j * cumulative_simpson(integrand.imag, x=grid.t, axis=0, initial=0.0)
    cum = cum - cum[grid.n_t // 2]
    return phase * (u0.to_frequency().values[None, :] - cfg.sign * cum)


@dataclass
class SolverState:
    """Outcome of one Picard run."""

    config: SolverConfig
    grid: Grid
    rows: np.ndarray  # frequency rows (t, xi) of the last iterate
    diffs: list[float]
    contraction_factors: list[float]
    verdict: str  # converged | diverged | max_iter
    residual: float
    scale: float
    n_iter: int

    @property
    def converged(self) -> bool:
        return self.verdict == "converged"

    def final_field(self) -> SpectralField:
        """Windowed full (tau, xi) spectrum of the last iterate."""
        half = SpectralField(self.grid, self.rows, "frequency")
        return halfspec_to_spacetime(half, windowed=True)

    def physical_rows(self) -> np.ndarray:
        return self.grid.inverse_x(self.rows)


def _metric(rows: np.ndarray, grid: Grid, params: XsbParams) -> float:
    half = SpectralField(grid, rows, "frequency")
    f = halfspec_to_spacetime(half, windowed=True)
    return xsb_norm_centered(f, params)


def picard_solve(u0: SpectralField, cfg: SolverConfig, grid: Grid | None = None) -> SolverState:
    """Iterate the Duhamel map from the free flow until the windowed
    restriction-norm increments drop below tol relative to the free flow
    (or divergence / iteration budget)."""
    if grid is None:
        grid = u0.grid
    if cfg.delta > grid.t_window / 2.0 + 1e-12:
        raise GridError("delta exceeds half the stored time window")
    u0 = SpectralField(grid, u0.to_frequency().values, "frequency")
    tt = grid.t - center_time(grid)
    phase = np.exp(1j * tt[:, None] * grid.xi[None, :] ** 3)
    rows = phase * u0.values[None, :]
    scale = _metric(rows, grid, cfg.params)
    if scale < 1e-300:
        return SolverState(cfg, grid, rows, [0.0], [], "converged", 0.0, 0.0, 1)
    diffs: list[float] = []
    factors: list[float] = []
    verdict = "max_iter"
    n_iter = 0
    for n_iter in range(1, cfg.max_iter + 1):
        new = duhamel_step(rows, u0, cfg)
        if not np.all(np.isfinite(new)):
            verdict = "diverged"
            rows = new
            break
        d = _metric(new - rows, grid, cfg.params)
        diffs.append(d)
        if len(diffs) > 1 and diffs[-2] > 0.0:
            factors.append(d / diffs[-2])
        rows = new
        if d < cfg.tol * scale:
            verdict = "converged"
            break
        if d > DIVERGENCE_FACTOR * scale:
            verdict = "diverged"
            break
    residual = float("nan")
    if verdict == "converged":
        residual = _metric(duhamel_step(rows, u0, cfg) - rows, grid, cfg.params)
    return SolverState(cfg, grid, rows, diffs, factors, verdict, residual, scale, n_iter)


def rk45_rows(u0: SpectralField, cfg: SolverConfig, rtol: float = 1e-10, atol: float = 1e-12) -> np.ndarray:
    """Reference frequency rows from an adaptive RK integration of the
    integrating-factor form of the equation, independent of the Picard
    quadrature."""
    grid = u0.grid
    xi = grid.xi
    tc = center_time(grid)
    v0 = u0.to_frequency().values.astype(complex)

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        uhat = y.view(complex) * np.exp(1j * (t - tc) * xi**3)
        cube = _cube_rows(uhat[None, :], grid)[0]
        dv = -cfg.sign * 1j * xi * cube * np.exp(-1j * (t - tc) * xi**3)
        return dv.view(float)

    rows = np.empty((grid.n_t, grid.n_x), dtype=complex)
    i0 = grid.n_t // 2
    for sl, span in ((slice(i0, None), grid.t[i0:]), (slice(i0, None, -1), grid.t[i0::-1])):
        ts = np.asarray(span)
        sol = solve_ivp(
            rhs,
            (ts[0], ts[-1]),
            v0.view(float),
            t_eval=ts,
            rtol=rtol,
            atol=atol,
            method="RK45",
        )
        if not sol.success:
            raise GridError(f"reference integrator failed: {sol.message}")
        v = sol.y.T.copy().view(complex)
        rows[sl] = v * np.exp(1j * (ts - tc)[:, None] * xi[None, :] ** 3)
    return rows


@dataclass
class ConservationReport:
    mass_drift: float
    l2_drift: float


def conservation_check(state: SolverState) -> ConservationReport:
    """Drift of int u dx and int u^2 dx over the solve interval."""
    grid = state.grid
    keep = np.abs(grid.t - center_time(grid)) <= state.config.delta + 1e-12
    zero_idx = grid.n_x // 2
    mass = state.rows[keep, zero_idx].real
    phys = grid.inverse_x(state.rows[keep])
    l2 = np.sum(np.abs(phys) ** 2, axis=1) * grid.dx
    return ConservationReport(
        float(np.max(np.abs(mass - mass[0]))), float(np.max(np.abs(l2 - l2[0])))
    )


@dataclass
class LipschitzReport:
    ratio: float
    degenerate: bool


def flowmap_lipschitz_probe(
    u0: SpectralField, v0: SpectralField, cfg: SolverConfig, grid: Grid | None = None
) -> LipschitzReport:
    """Solution distance in the windowed restriction norm over data
    distance in the data norm; 0 with a flag for coinciding data."""
    if grid is None:
        grid = u0.grid
    p = cfg.params
    dist_data = fl_norm(
        SpectralField(
            grid, u0.to_frequency().values - v0.to_frequency().values, "frequency"
        ),
        FLParams(p.r, p.s),
    )
    if dist_data < 1e-14:
        return LipschitzReport(0.0, True)
    su = picard_solve(u0, cfg, grid)
    sv = picard_solve(v0, cfg, grid)
    if not (su.converged and sv.converged):
        raise GridError("both data must converge for the Lipschitz probe")
    dist_sol = _metric(su.rows - sv.rows, grid, p)
    return LipschitzReport(float(dist_sol / dist_data), False)


def soliton_profile(grid: Grid, c: float = 1.0, x0: float = 0.0) -> SpectralField:
    """sqrt(2c) sech(sqrt(c) (x - x0)): traveling-wave data of the
    focusing sign, moving at speed c."""
    vals = np.sqrt(2.0 * c) / np.cosh(np.sqrt(c) * (grid.x - x0))
    return SpectralField(grid, vals.astype(complex), "physical")


def soliton_reference(grid: Grid, t: float, c: float = 1.0, x0: float = 0.0) -> np.ndarray:
    """Exact traveling-wave physical samples at time t (periodized only
    through the data's own tails)."""
    return np.sqrt(2.0 * c) / np.cosh(np.sqrt(c) * (grid.x - c * t - x0))


@dataclass
class MarchResult:
    times: list[float]
    data: list[SpectralField]  # 1D frequency data at the segment ends
    states: list[SolverState]


def march(
    u0: SpectralField,
    cfg: SolverConfig,
    total_time: float,
    n_segments: int,
    n_t: int = 80,
) -> MarchResult:
    """Advance data over [0, total_time] by repeated Picard solves of
    length total_time / n_segments."""
    base = u0.grid
    delta = total_time / n_segments
    seg_cfg = SolverConfig(cfg.params, delta, cfg.max_iter, cfg.tol, cfg.sign)
    grid = solver_grid(base.n_x, base.length, delta, n_t=n_t)
    data = SpectralField(grid, u0.to_frequency().values, "frequency")
    idx = delta_index(grid, delta)
    out = MarchResult([0.0], [data], [])
    for k in range(n_segments):
        state = picard_solve(data, seg_cfg, grid)
        if not state.converged:
            raise GridError(f"segment {k} did not converge ({state.verdict})")
        data = SpectralField(grid, state.rows[idx].copy(), "frequency")
        out.states.append(state)
        out.times.append((k + 1) * delta)
        out.data.append(data)
    return out


# -- lifespan sweep -------------------------------------------------------------


@dataclass
class LifespanPoint:
    lam: float
    norm: float
    delta_star: float


@dataclass
class LifespanReport:
    points: list[LifespanPoint]
    slope: float
    monotone: bool
    amplitude_power: float


def _scaled_data(grid: Grid, lam: float, amplitude_power: float) -> SpectralField:
    """Frequency profile of lam^a u0(lam x) for Gaussian base data
    u0 with uhat0(xi) = exp(-xi^2 / 2)."""
    vals = lam ** (amplitude_power - 1.0) * np.exp(-((grid.xi / lam) ** 2) / 2.0)
    return SpectralField(grid, vals.astype(complex), "frequency")


def largest_converged_delta(
    make_state,
    delta_init: float = 1.0,
    rel_tol: float = 0.05,
    delta_min: float = 1e-9,
    delta_max: float = 1e6,
) -> float:
    """Bisect the largest step length with a converged verdict; the
    callable runs one solve at a given delta and reports convergence."""
    d = delta_init
    if make_state(d):
        lo = d
        while True:
            hi = lo * 2.0
            if hi > delta_max:
                return lo
            if not make_state(hi):
                break
            lo = hi
    else:
        hi = d
        while True:
            lo = hi / 2.0
            if lo < delta_min:
                raise GridError("no converged step length found")
            if make_state(lo):
                break
            hi = lo
    while hi / lo > 1.0 + rel_tol:
        mid = math.sqrt(lo * hi)
        if make_state(mid):
            lo = mid
        else:
            hi = mid
    return lo


def lifespan_experiment(
    r: float = 2.0,
    s: float | None = None,
    lambdas: tuple[float, ...] = (1.0, 1.45, 2.1, 3.0, 4.35, 6.3),
    amplitude_power: float = 1.0,
    n_x: int = 1024,
    length: float = 8.0 * np.pi,
    n_t: int = 80,
    b_slack: float = 0.1,
    max_iter: int = 40,
    tol: float = 1e-8,
    rel_tol: float = 0.05,
) -> LifespanReport:
    """Fit how the largest contracting step shrinks as concentrated data
    grows: data family lam^a u0(lam x), log-log fit of delta* against the
    data norm."""
    if s is None:
        s = 0.5 - 0.5 / r
    params = XsbParams(r, s, 1.0 / r + b_slack)
    points: list[LifespanPoint] = []
    delta_guess = 1.0
    for lam in lambdas:
        def run(delta: float) -> bool:
            grid = solver_grid(n_x, length, delta, n_t=n_t)
            data = _scaled_data(grid, lam, amplitude_power)
            cfg = SolverConfig(params, delta, max_iter, tol, 1.0)
            return picard_solve(data, cfg, grid).converged

        d_star = largest_converged_delta(run, delta_init=delta_guess, rel_tol=rel_tol)
        delta_guess = d_star  # warm start: delta* shrinks with lam
        probe_grid = solver_grid(n_x, length, d_star, n_t=n_t)
        norm = fl_norm(_scaled_data(probe_grid, lam, amplitude_power), FLParams(r, s))
        points.append(LifespanPoint(lam, norm, d_star))
    ln = np.log([p.norm for p in points])
    ld = np.log([p.delta_star for p in points])
    slope = float(np.polyfit(ln, ld, 1)[0])
    deltas = [p.delta_star for p in points]
    monotone = all(d2 <= d1 * 1.10 for d1, d2 in zip(deltas, deltas[1:]))
    return LifespanReport(points, slope, monotone, amplitude_power)
