"""Empirical probes of the bilinear and trilinear Airy inequalities.

Each estimate id names one inequality between norms of (products of) Airy
flows.  A probe evaluates both sides on every member of a reproducible
test family, at a sequence of grid refinements, and reports the growth of
the worst ratio: a bounded constant shows up as ratio growth below the
PASS threshold, a failing estimate as steady growth.

The harness also carries the exponent bookkeeping used by the trilinear
machinery (interpolation bundles, threshold formulas) and the quadrature
of the resonant denominator integral.

Conventions: open-ended exponent conditions ("strictly above") are run at
a fixed documented slack (default 0.05 or 0.1); dispersive-weight norms of
general space-time inputs use the comoving evaluation of
:func:`mkdvlab.norms.xsb_norm_centered`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .families import TestFamily
from .grid import (
    Grid,
    MultiplierSpec,
    SpectralField,
    airy_flow_2d,
    apply_multiplier,
    halfspec_to_spacetime,
)
from .multilinear import TrilinearMask, i_minus, i_plus, trilinear_apply
from .norms import (
    FLParams,
    MixedParams,
    XsbParams,
    fl_norm,
    mixed_fl_norm,
    spacetime_lp_norm,
    sr_threshold,
    xsb_norm_centered,
)

EPSILON_DEFAULT = 0.05
B_SLACK = 0.1
PASS_GROWTH = 1.2

ESTIMATE_IDS = (
    "cor_b1",
    "cor_b2_204",
    "cor_t1c",
    "cor_t2c",
    "cor_t3c",
    "fs20",
    "lemma1",
    "lemma2",
    "lemma3",
    "lemma4",
    "theorem2",
)


class HypothesisError(ValueError):
    """An exponent bundle violates the printed hypotheses of its estimate."""


# -- exponent bundles -----------------------------------------------------------


@dataclass(frozen=True)
class EstimateSpec:
    """Exponent bundle for one estimate id; unused slots stay None."""

    id: str
    r: float = 1.5
    s: float | None = None
    b: float | None = None
    bprime: float = -B_SLACK
    epsilon: float = EPSILON_DEFAULT
    p: float | None = None
    q: float | None = None
    r1: float | None = None
    r2: float | None = None
    b1: float | None = None
    b2: float | None = None
    p0: float | None = None
    p1: float | None = None
    rho: float | None = None
    beta: float | None = None
    s0: float | None = None
    s1: float | None = None
    s2: float | None = None


def default_spec(estimate_id: str, r: float | None = None, **overrides) -> EstimateSpec:
    """The documented default exponents for one estimate id."""
    if estimate_id not in ESTIMATE_IDS:
        raise HypothesisError(f"unknown estimate id {estimate_id!r}")
    if r is not None and not r > 1.0:
        raise HypothesisError(f"{estimate_id}: need r > 1, got {r}")
    kw: dict = {}
    if estimate_id in ("lemma1", "cor_b1"):
        kw.update(p=2.0, q=2.0, r1=2.0, r2=2.0)
        if estimate_id == "cor_b1":
            kw.update(b1=0.5 + B_SLACK, b2=0.5 + B_SLACK)
    elif estimate_id == "cor_b2_204":
        rr = r if r is not None else 1.5
        rc = rr / (rr - 1.0)
        rho_conj = 2.0 * rc
        kw.update(r=rr, rho=rho_conj / (rho_conj - 1.0), beta=-1.0 / rho_conj - B_SLACK)
    elif estimate_id == "fs20":
        kw.update(r=r if r is not None else 2.0)
    elif estimate_id in ("lemma2", "cor_t1c"):
        rr = r if r is not None else 1.5
        rc = rr / (rr - 1.0)
        kw.update(
            r=rr,
            s1=1.0 / (4.0 * rc) - 0.5 + EPSILON_DEFAULT,
            s2=1.0 / (2.0 * rc),
            b=1.0 / rr + B_SLACK,
        )
    elif estimate_id == "lemma3":
        kw.update(p=1.5, p0=2.5, p1=1.25)
    elif estimate_id == "cor_t2c":
        rr = r if r is not None else 1.5
        bundle = t2c_exponents(rr)
        kw.update(r=rr, s0=bundle.s0, s1=bundle.s1, b=1.0 / rr + B_SLACK)
    elif estimate_id == "lemma4":
        rr = r if r is not None else 1.5
        kw.update(r=rr, rho=4.0)
    elif estimate_id == "cor_t3c":
        rr = r if r is not None else 1.5
        kw.update(r=rr, rho=4.0, beta=0.25 + B_SLACK, b=1.0 / rr + B_SLACK)
    else:  # theorem2
        rr = r if r is not None else 1.5
        if not (1.0 < rr <= 2.0):
            raise HypothesisError(f"theorem2: need r in (1, 2], got {rr}")
        kw.update(r=rr, s=sr_threshold(rr), b=1.0 / rr + B_SLACK, bprime=-B_SLACK)
    if r is not None:
        kw["r"] = r
    kw.update(overrides)
    return EstimateSpec(estimate_id, **kw)


def _conj(x: float) -> float:
    return x / (x - 1.0)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise HypothesisError(msg)


def validate_spec(spec: EstimateSpec) -> None:
    """Check the printed hypotheses of the estimate named by spec.id."""
    sid = spec.id
    if sid in ("lemma1", "cor_b1"):
        p, q, r1, r2 = spec.p, spec.q, spec.r1, spec.r2
        _require(None not in (p, q, r1, r2), f"{sid} needs p, q, r1, r2")
        _require(1.0 <= q <= min(r1, r2), f"{sid}: need 1 <= q <= r1, r2")
        _require(max(r1, r2) <= p, f"{sid}: need r1, r2 <= p")
        _require(
            abs(1.0 / p + 1.0 / q - 1.0 / r1 - 1.0 / r2) < 1e-12,
            f"{sid}: need 1/p + 1/q = 1/r1 + 1/r2",
        )
        if sid == "cor_b1":
            _require(spec.b1 is not None and spec.b1 > 1.0 / r1, "cor_b1: need b1 > 1/r1")
            _require(spec.b2 is not None and spec.b2 > 1.0 / r2, "cor_b1: need b2 > 1/r2")
    elif sid == "cor_b2_204":
        _require(spec.r > 1.0, "cor_b2_204: need r > 1")
        _require(spec.rho is not None and spec.beta is not None, "cor_b2_204: need rho, beta")
        rho_conj = _conj(spec.rho)
        _require(
            0.0 <= 1.0 / rho_conj <= 1.0 / _conj(spec.r),
            "cor_b2_204: need 0 <= 1/rho' <= 1/r'",
        )
        _require(spec.beta < -1.0 / rho_conj, "cor_b2_204: need beta < -1/rho'")
    elif sid == "fs20":
        _require(spec.r > 1.0, "fs20: need r > 1")
    elif sid in ("lemma2", "cor_t1c"):
        _require(1.0 <= spec.r <= 2.0, f"{sid}: need 1 <= r <= 2")
        rc = _conj(spec.r)
        _require(
            spec.s1 is not None and spec.s1 > 1.0 / (4.0 * rc) - 0.5,
            f"{sid}: need s1 > 1/(4r') - 1/2",
        )
        _require(
            spec.s2 is not None and spec.s2 >= 1.0 / (2.0 * rc),
            f"{sid}: need s2 >= 1/(2r')",
        )
        if sid == "cor_t1c":
            _require(spec.b is not None and spec.b > 1.0 / spec.r, "cor_t1c: need b > 1/r")
    elif sid == "lemma3":
        verdict = validate_lemma3_params(spec.p, spec.p0, spec.p1)
        _require(verdict.accepted, "lemma3: " + "; ".join(verdict.violations))
    elif sid == "cor_t2c":
        _require(1.0 < spec.r, "cor_t2c: need r > 1")
        _require(
            spec.s0 is not None and spec.s1 is not None and spec.s0 >= 0 and spec.s1 >= 0,
            "cor_t2c: need s0, s1 >= 0",
        )
        _require(
            abs(spec.s0 + 2.0 * spec.s1 - 1.0 / spec.r) < 1e-10,
            "cor_t2c: need s0 + 2 s1 = 1/r",
        )
        _require(spec.b is not None and spec.b > 1.0 / spec.r, "cor_t2c: need b > 1/r")
    elif sid == "lemma4":
        _require(
            spec.rho is not None and 1.0 <= spec.r < spec.rho,
            "lemma4: need 1 <= r < rho",
        )
    elif sid == "cor_t3c":
        _require(
            spec.rho is not None and 1.0 <= spec.r < spec.rho,
            "cor_t3c: need 1 <= r < rho",
        )
        _require(spec.beta is not None and spec.beta > 1.0 / spec.rho, "cor_t3c: need beta > 1/rho")
        _require(spec.b is not None and spec.b > 1.0 / spec.r, "cor_t3c: need b > 1/r")
        _require(spec.epsilon > 0.0, "cor_t3c: need epsilon > 0")
    else:  # theorem2
        _require(1.0 < spec.r <= 2.0, "theorem2: need 1 < r <= 2")
        _require(
            spec.s is not None and spec.s >= sr_threshold(spec.r),
            "theorem2: need s >= s(r)",
        )
        _require(spec.b is not None and spec.b > 1.0 / spec.r, "theorem2: need b > 1/r")
        _require(spec.bprime < 0.0, "theorem2: need b' < 0")


# -- space-time input builders --------------------------------------------------


def windowed_flow(u0: SpectralField) -> SpectralField:
    """Windowed exact Airy flow of 1D data, as a full (tau, xi) field."""
    return halfspec_to_spacetime(airy_flow_2d(u0), windowed=True)


def modulated_flow(
    u0: SpectralField,
    rng: np.random.Generator,
    n_terms: int = 2,
    lam_max: float = 40.0,
) -> SpectralField:
    """Superposition of windowed Airy flows shifted off the cubic in tau.

    This is the harness test class for general space-time inputs: each
    term carries a controlled dispersive-weight distance <lam>, so the
    restriction norms on the right-hand sides stay finite and meaningful.
    """
    grid = u0.grid
    flow = airy_flow_2d(u0).values
    acc = np.zeros_like(flow)
    for _ in range(n_terms):
        lam = rng.uniform(-lam_max, lam_max)
        c = rng.uniform(0.4, 1.0) * np.exp(2j * np.pi * rng.uniform())
        acc = acc + c * flow * np.exp(1j * lam * grid.t)[:, None]
    half = SpectralField(grid, acc, "frequency")
    return halfspec_to_spacetime(half, windowed=True)


def _riesz(f: SpectralField, order: float) -> SpectralField:
    return apply_multiplier(f, MultiplierSpec("riesz", order))


def _l_hat(f: SpectralField, r: float) -> float:
    return mixed_fl_norm(f, MixedParams(r, r))


def _x_norm(f: SpectralField, r: float, s: float, b: float) -> float:
    return xsb_norm_centered(f, XsbParams(r, s, b))


def _derivative(f: SpectralField) -> SpectralField:
    g = f.to_frequency()
    return SpectralField(g.grid, g.values * (1j * g.grid.xi), "frequency")


# -- per-estimate evaluators ----------------------------------------------------


def _ev_lemma1(spec, grid, datas, fields):
    u0, v0 = datas
    h = i_minus(windowed_flow(u0), windowed_flow(v0), 1.0 / spec.p)
    h = _riesz(h, 1.0 / spec.p)
    lhs = mixed_fl_norm(h, MixedParams(spec.p, spec.q))
    rhs = fl_norm(u0, FLParams(spec.r1)) * fl_norm(v0, FLParams(spec.r2))
    return lhs, rhs


def _ev_cor_b1(spec, grid, datas, fields):
    u1, u2 = fields
    h = _riesz(i_minus(u1, u2, 1.0 / spec.p), 1.0 / spec.p)
    lhs = mixed_fl_norm(h, MixedParams(spec.p, spec.q))
    rhs = _x_norm(u1, spec.r1, 0.0, spec.b1) * _x_norm(u2, spec.r2, 0.0, spec.b2)
    return lhs, rhs


def _ev_cor_b2_204(spec, grid, datas, fields):
    u1, u2 = fields
    rho_conj = _conj(spec.rho)
    h = i_plus(_riesz(u2, 1.0 / rho_conj), u1, 1.0 / rho_conj)
    lhs = _x_norm(h, spec.r, 0.0, spec.beta)
    rhs = _x_norm(u1, rho_conj, 0.0, -spec.beta) * _l_hat(u2, spec.r)
    return lhs, rhs


def _ev_fs20(spec, grid, datas, fields):
    (u0,) = datas
    half = airy_flow_2d(u0)
    phys = SpectralField(grid, grid.inverse_x(half.values), "physical")
    lhs = spacetime_lp_norm(phys, 3.0 * spec.r, windowed=True)
    rhs = fl_norm(_riesz(u0, -1.0 / (3.0 * spec.r)), FLParams(spec.r))
    return lhs, rhs


def _ev_lemma2(spec, grid, datas, fields):
    u0, v0, w0 = datas
    t = trilinear_apply(
        windowed_flow(u0), windowed_flow(v0), windowed_flow(w0), TrilinearMask("t")
    )
    lhs = _l_hat(t, spec.r)
    rhs = (
        fl_norm(u0, FLParams(spec.r, spec.s1))
        * fl_norm(v0, FLParams(spec.r, spec.s1))
        * fl_norm(w0, FLParams(spec.r, spec.s2))
    )
    return lhs, rhs


def _ev_cor_t1c(spec, grid, datas, fields):
    u1, u2, u3 = fields
    t = trilinear_apply(u1, u2, u3, TrilinearMask("t"))
    lhs = _l_hat(t, spec.r)
    rhs = (
        _x_norm(u1, spec.r, spec.s1, spec.b)
        * _x_norm(u2, spec.r, spec.s1, spec.b)
        * _x_norm(u3, spec.r, spec.s2, spec.b)
    )
    return lhs, rhs


def _ev_lemma3(spec, grid, datas, fields):
    u0, v0, w0 = datas
    t = trilinear_apply(
        windowed_flow(u0), windowed_flow(v0), windowed_flow(w0), TrilinearMask("ge")
    )
    lhs = _l_hat(t, spec.p)
    order = -1.0 / (2.0 * spec.p)
    rhs = (
        fl_norm(u0, FLParams(spec.p0))
        * fl_norm(_riesz(v0, order), FLParams(spec.p1))
        * fl_norm(_riesz(w0, order), FLParams(spec.p1))
    )
    return lhs, rhs


def _ev_cor_t2c(spec, grid, datas, fields):
    u1, u2, u3 = fields
    t = trilinear_apply(u1, u2, u3, TrilinearMask("ge"))
    lhs = _l_hat(t, spec.r)
    rhs = (
        _x_norm(_riesz(u1, -spec.s0), spec.r, 0.0, spec.b)
        * _x_norm(_riesz(u2, -spec.s1), spec.r, 0.0, spec.b)
        * _x_norm(_riesz(u3, -spec.s1), spec.r, 0.0, spec.b)
    )
    return lhs, rhs


def _ev_lemma4(spec, grid, datas, fields):
    u0, v0, w0 = datas
    t = trilinear_apply(
        windowed_flow(u0), windowed_flow(v0), windowed_flow(w0), TrilinearMask("le")
    )
    lhs = _l_hat(t, spec.r)
    order = -1.0 / (2.0 * spec.r)
    rhs = (
        fl_norm(u0, FLParams(spec.rho))
        * fl_norm(_riesz(v0, order), FLParams(spec.r))
        * fl_norm(_riesz(w0, order), FLParams(spec.r))
    )
    return lhs, rhs


def _ev_cor_t3c(spec, grid, datas, fields):
    u1, u2, u3 = fields
    t = trilinear_apply(u1, u2, u3, TrilinearMask("le"))
    lhs = _l_hat(t, spec.r)
    order = -1.0 / (2.0 * spec.r)
    rhs = (
        _x_norm(u1, spec.r, spec.epsilon, spec.b)
        * _x_norm(_riesz(u2, order), spec.r, 0.0, spec.b)
        * _x_norm(_riesz(u3, order), spec.r, 0.0, spec.b)
    )
    return lhs, rhs


def _ev_theorem2(spec, grid, datas, fields):
    u1, u2, u3 = fields
    prod = trilinear_apply(u1, u2, u3, TrilinearMask("unmasked"))
    lhs = _x_norm(_derivative(prod), spec.r, spec.s, spec.bprime)
    rhs = (
        _x_norm(u1, spec.r, spec.s, spec.b)
        * _x_norm(u2, spec.r, spec.s, spec.b)
        * _x_norm(u3, spec.r, spec.s, spec.b)
    )
    return lhs, rhs


_EVALUATORS = {
    "lemma1": (2, "data", _ev_lemma1),
    "cor_b1": (2, "field", _ev_cor_b1),
    "cor_b2_204": (2, "field", _ev_cor_b2_204),
    "fs20": (1, "data", _ev_fs20),
    "lemma2": (3, "data", _ev_lemma2),
    "cor_t1c": (3, "field", _ev_cor_t1c),
    "lemma3": (3, "data", _ev_lemma3),
    "cor_t2c": (3, "field", _ev_cor_t2c),
    "lemma4": (3, "data", _ev_lemma4),
    "cor_t3c": (3, "field", _ev_cor_t3c),
    "theorem2": (3, "field", _ev_theorem2),
}


# -- probe plans ----------------------------------------------------------------


def standard_grid(n: int, n_t: int = 64, t_window: float = 1.25) -> Grid:
    """Fixed frequency band (|xi| <= 8), refined by sampling density."""
    return Grid(n, np.pi * n / 8.0, n_t=n_t, t_window=t_window, require_tau_cover=False)


def separated_grid(n: int) -> Grid:
    """Wide band (|xi| <= 16) for the frequency-separated trilinear region."""
    return Grid(n, np.pi * n / 16.0, n_t=256, t_window=0.5, require_tau_cover=False)


@dataclass(frozen=True)
class ProbePlan:
    spec: EstimateSpec
    families: tuple[TestFamily, ...]
    grids: tuple[Grid, ...]
    input_mode: str  # "data" or "field"
    band_follow_grid: bool = False
    lam_max: float = 40.0
    expected: str = "PASS"


def default_plan(
    estimate_id: str,
    seed: int = 0,
    count: int = 50,
    grid_ns: tuple[int, ...] = (64, 128, 256),
    r: float | None = None,
    spec: EstimateSpec | None = None,
) -> ProbePlan:
    """The documented probe setup for one estimate id."""
    if spec is None:
        spec = default_spec(estimate_id, r=r)
    n_inputs, mode, _ = _EVALUATORS[spec.id]
    if spec.id in ("lemma2", "cor_t1c"):
        fams = (
            TestFamily("gaussian", count, seed, band=1.2, center=14.0),
            TestFamily("gaussian", count, seed + 1, band=1.2, center=-14.0),
            TestFamily("gaussian", count, seed + 2, band=0.7, center=0.0),
        )
        grids = tuple(separated_grid(n) for n in grid_ns)
        return ProbePlan(spec, fams, grids, mode, lam_max=100.0)
    if spec.id == "fs20" and spec.r <= 4.0 / 3.0:
        # wide-band failure probe: fixed cell size 0.25, band growing with n
        fams = (TestFamily("power_band", count, seed, band=8.0),)
        grids = tuple(
            Grid(n, 8.0 * np.pi, n_t=64, t_window=1.25, require_tau_cover=False)
            for n in (64, 256, 1024)
        )
        return ProbePlan(spec, fams, grids, mode, band_follow_grid=True, expected="FAIL")
    kind_cycle = ("gaussian", "wave_packet", "two_bump_separated")
    if spec.id == "fs20":
        fams = (TestFamily("dyadic_bump", count, seed, band=2.0),)
    else:
        fams = tuple(
            TestFamily(kind_cycle[i % 3], count, seed + i, band=2.0)
            for i in range(n_inputs)
        )
    grids = tuple(standard_grid(n) for n in grid_ns)
    return ProbePlan(spec, fams, grids, mode)


@dataclass
class EstimateReport:
    estimate_id: str
    grid_sizes: list[int]
    max_ratios: list[float]
    growths: list[float]
    total_growth: float
    verdict: str
    dropped: int
    samples: list[list[tuple[float, float, float]]]

    def to_rows(self, spec: EstimateSpec, seed: int) -> list[dict]:
        rows = []
        for i, n in enumerate(self.grid_sizes):
            rows.append(
                {
                    "estimate_id": self.estimate_id,
                    "r": spec.r,
                    "s": spec.s if spec.s is not None else "",
                    "b": spec.b if spec.b is not None else "",
                    "grid_n": n,
                    "max_ratio": self.max_ratios[i],
                    "growth": self.growths[i - 1] if i > 0 else "",
                    "verdict": self.verdict,
                }
            )
        return rows


def probe(plan: ProbePlan, seed: int = 0) -> EstimateReport:
    """Run one estimate probe over its refinement sequence."""
    spec = plan.spec
    validate_spec(spec)
    _, mode, ev = _EVALUATORS[spec.id]
    max_ratios: list[float] = []
    all_samples: list[list[tuple[float, float, float]]] = []
    dropped = 0
    for grid in plan.grids:
        fams = plan.families
        if plan.band_follow_grid:
            band = float(np.max(np.abs(grid.xi)))
            fams = tuple(f.with_band(band) for f in fams)
        member_lists = [f.members() for f in fams]
        samples: list[tuple[float, float, float]] = []
        for j in range(fams[0].count):
            datas = tuple(
                ml[j].materialize(grid) for ml in member_lists
            )
            fields = None
            if mode == "field":
                fields = tuple(
                    modulated_flow(
                        d, np.random.default_rng((seed, j, slot)), lam_max=plan.lam_max
                    )
                    for slot, d in enumerate(datas)
                )
            lhs, rhs = ev(spec, grid, datas, fields)
            if rhs < 1e-14:
                dropped += 1
                continue
            samples.append((float(lhs), float(rhs), float(lhs / rhs)))
        if not samples:
            raise HypothesisError(f"{spec.id}: every sample degenerated")
        all_samples.append(samples)
        max_ratios.append(max(s[2] for s in samples))
    growths = [max_ratios[i + 1] / max_ratios[i] for i in range(len(max_ratios) - 1)]
    total = max_ratios[-1] / max_ratios[0] if max_ratios else 1.0
    verdict = "PASS" if all(g < PASS_GROWTH for g in growths) else "FAIL"
    return EstimateReport(
        spec.id,
        [g.n_x for g in plan.grids],
        max_ratios,
        growths,
        total,
        verdict,
        dropped,
        all_samples,
    )


# -- exponent bookkeeping -------------------------------------------------------


@dataclass(frozen=True)
class Lemma3Verdict:
    accepted: bool
    theta: float
    violations: tuple[str, ...]


def validate_lemma3_params(p: float, p0: float, p1: float) -> Lemma3Verdict:
    """Check the full exponent constraint set of the sign-separated
    trilinear estimate and return theta = 3/p' - 2/p1' (= 1/p0')."""
    bad: list[str] = []
    if not (1.0 < p1 < p < p0):
        bad.append("need 1 < p1 < p < p0")
    pc = _conj(p) if p > 1 else math.inf
    p0c = _conj(p0) if p0 > 1 else math.inf
    p1c = _conj(p1) if p1 > 1 else math.inf
    theta = 3.0 / pc - 2.0 / p1c if p > 1 and p1 > 1 else math.nan
    if p0 > 1 and p >= p0c:
        bad.append("need p < p0'")
    if abs(3.0 / p - 1.0 / p0 - 2.0 / p1) > 1e-12:
        bad.append("need 3/p = 1/p0 + 2/p1")
    if not (2.0 / p1 < 1.0 + 1.0 / p):
        bad.append("need 2/p1 < 1 + 1/p")
    if not (math.isfinite(theta) and 0.0 < theta < 1.0):
        bad.append("need theta in (0, 1)")
    if math.isfinite(theta) and not (1.0 < theta * pc < 2.0):
        bad.append("need 1 < theta p' < 2")
    if math.isfinite(theta) and abs(theta - 1.0 / p0c) > 1e-12:
        bad.append("need theta = 1/p0'")
    if math.isfinite(theta) and not (0.0 < (1.0 - theta) * p < 1.0):
        bad.append("need 0 < (1 - theta) p < 1")
    if (
        math.isfinite(theta)
        and (1.0 - theta) * p < 1.0
        and not (1.0 < p0c / p < 1.0 / (1.0 - (1.0 - theta) * p))
    ):
        bad.append("need 1 < p0'/p < 1/(1 - (1 - theta) p)")
    return Lemma3Verdict(not bad, theta, tuple(bad))


@dataclass(frozen=True)
class T2CBundle:
    s0: float
    s1: float
    theta: float
    q0: float
    q1: float
    p: float
    p0: float
    p1: float
    degenerate: bool = False


def t2c_exponents(r: float, n_theta: int = 193, n_q0: int = 97) -> T2CBundle:
    """Search a feasible interpolation bundle for the sign-separated
    trilinear estimate at exponent r, returning (s0, s1) with
    s0 + 2 s1 = 1/r.

    For r >= 2 the estimate holds without interpolation and the bundle
    degenerates to s0 = s1 = 1/(3r).
    """
    if not r > 1.0:
        raise HypothesisError("t2c_exponents: need r > 1")
    if r >= 2.0:
        s = 1.0 / (3.0 * r)
        return T2CBundle(s, s, 1.0, r, r, r, r, r, degenerate=True)
    best: T2CBundle | None = None
    for theta in np.linspace(0.02, 0.98, n_theta):
        inv_p = (1.0 / r - theta / 2.0) / (1.0 - theta)
        if not (0.0 < inv_p < 1.0):
            continue
        p = 1.0 / inv_p
        for q0 in np.linspace(4.0 / 3.0 + 0.01, 2.0 - 0.01, n_q0):
            q1 = 2.0 / (1.5 - 1.0 / q0)
            inv_p0 = (1.0 / r - theta / q0) / (1.0 - theta)
            inv_p1 = (1.0 / r - theta / q1) / (1.0 - theta)
            if not (0.0 < inv_p0 < 1.0 and 0.0 < inv_p1 < 1.0):
                continue
            p0 = 1.0 / inv_p0
            p1 = 1.0 / inv_p1
            if not validate_lemma3_params(p, p0, p1).accepted:
                continue
            if not (4.0 / 3.0 < q0 < 2.0 < q1):
                continue
            s0 = theta / (3.0 * q0)
            s1 = (1.0 - theta) / (2.0 * p) + theta / (3.0 * q1)
            cand = T2CBundle(s0, s1, float(theta), float(q0), float(q1), p, p0, p1)
            if best is None or theta < best.theta:
                best = cand
        if best is not None:
            break
    if best is None:
        raise HypothesisError(f"t2c_exponents: no feasible bundle found for r = {r}")
    return best


# -- resonance algebra ----------------------------------------------------------


def resonance_product(xi1, xi2, xi3):
    """3 (xi1 + xi2)(xi2 + xi3)(xi3 + xi1)."""
    return 3.0 * (xi1 + xi2) * (xi2 + xi3) * (xi3 + xi1)


def resonance_defect(xis, taus) -> float:
    """Relative defect of sigma_0 - sum sigma_i = -3 prod(pair sums)
    on a constrained triple ((xi_i), (tau_i))."""
    xi = sum(xis)
    tau = sum(taus)
    sigma0 = tau - xi**3
    sig = [t - x**3 for x, t in zip(xis, taus)]
    lhs = sigma0 - sum(sig)
    rhs = -resonance_product(*xis)
    scale = max(abs(lhs), abs(rhs), 1.0)
    return abs(lhs - rhs) / scale


def sigma_gain_check(
    n_samples: int = 100_000, seed: int = 0, epsilon: float = EPSILON_DEFAULT
) -> tuple[float, np.ndarray]:
    """Sample the ratio <xi1>^eps <xi2>^eps / prod <sigma_i>^eps on random
    constrained triples from the semiresonant region with |xi1 + xi2| >= 1.

    Returns (max factor, all factors)."""
    rng = np.random.default_rng(seed)
    xi1 = rng.uniform(2.0, 50.0, n_samples) * rng.choice([-1.0, 1.0], n_samples)
    ratio = rng.uniform(0.5, 2.0, n_samples)
    xi2 = -xi1 * ratio + rng.uniform(-5.0, 5.0, n_samples)
    xi3 = rng.uniform(-1.0, 1.0, n_samples)
    keep = np.abs(xi1 + xi2) >= 1.0
    xi1, xi2, xi3 = xi1[keep], xi2[keep], xi3[keep]
    m = xi1.size
    eta = rng.standard_cauchy((3, m)) * 2.0
    sigma123 = eta
    sigma0 = eta.sum(axis=0) - resonance_product(xi1, xi2, xi3)
    num = (1.0 + xi1**2) ** (epsilon / 2.0) * (1.0 + xi2**2) ** (epsilon / 2.0)
    den = (1.0 + sigma0**2) ** (epsilon / 2.0)
    for k in range(3):
        den = den * (1.0 + sigma123[k] ** 2) ** (epsilon / 2.0)
    factors = num / den
    return float(factors.max()), factors


# -- the resonant denominator integral ------------------------------------------


def _resonant_domain(xi: float, n: int):
    """Masked (xi1, xi2) sample of the fully resonant region and the
    resonance values z = 3 (xi1 + xi2)(xi - xi1)(xi - xi2) on it."""
    c = xi / 3.0
    lo, hi = c - 1.0, c + 1.0
    step = (hi - lo) / n
    ax = lo + (np.arange(n) + 0.5) * step
    x1 = ax[:, None]
    x2 = ax[None, :]
    x3 = xi - x1 - x2
    z = 3.0 * (x1 + x2) * (xi - x1) * (xi - x2)
    return z[_resonant_mask(xi, x1, x2, x3)], step * step


def _resonant_mask(xi, x1, x2, x3):
    """All pairwise differences at most 1 and every frequency large and
    comparable to xi/3; empty for small |xi|."""
    lo = max(abs(xi) / 6.0, 1.0)
    hi = 2.0 * abs(xi)
    return (
        (np.abs(x1 - x2) <= 1.0)
        & (np.abs(x2 - x3) <= 1.0)
        & (np.abs(x1 - x3) <= 1.0)
        & (np.abs(x1) >= lo)
        & (np.abs(x1) <= hi)
        & (np.abs(x2) >= lo)
        & (np.abs(x2) <= hi)
        & (np.abs(x3) >= lo)
        & (np.abs(x3) <= hi)
    )


def resonant_integral(xi: float, tau: float, eps: float, n: int = 768) -> float:
    """Quadrature of <tau - xi^3 + 3 (xi1 + xi2)(xi - xi1)(xi - xi2)>^(-1-eps)
    over the fully resonant region (all pairwise differences <= 1, all
    |xi_i| comparable to |xi|)."""
    if eps <= 0.0:
        raise HypothesisError("resonant_integral: need eps > 0")
    z, da = _resonant_domain(xi, n)
    if z.size == 0:
        return 0.0
    arg = tau - xi**3 + z
    return float(np.sum((1.0 + arg**2) ** (-(1.0 + eps) / 2.0)) * da)


def resonant_integral_mc(
    xi: float, tau: float, eps: float, n_samples: int = 400_000, seed: int = 0
) -> float:
    """Monte-Carlo cross-check of resonant_integral on the same box."""
    rng = np.random.default_rng(seed)
    c = xi / 3.0
    x1 = rng.uniform(c - 1.0, c + 1.0, n_samples)
    x2 = rng.uniform(c - 1.0, c + 1.0, n_samples)
    x3 = xi - x1 - x2
    mask = _resonant_mask(xi, x1, x2, x3)
    z = 3.0 * (x1[mask] + x2[mask]) * (xi - x1[mask]) * (xi - x2[mask])
    arg = tau - xi**3 + z
    vals = (1.0 + arg**2) ** (-(1.0 + eps) / 2.0)
    area = 4.0  # box area
    return float(vals.sum() / n_samples * area)


def resonant_sup_tau(xi: float, eps: float, n: int = 768, n_tau: int = 33) -> tuple[float, float]:
    """sup over tau of resonant_integral at fixed xi, scanned at quantiles
    of the resonance value z (the integrand peaks where tau - xi^3 = -z).

    Returns (sup value, maximizing tau)."""
    z, da = _resonant_domain(xi, n)
    if z.size == 0:
        return 0.0, xi**3
    taus = xi**3 - np.quantile(z, np.linspace(0.0, 1.0, n_tau))
    best_v, best_t = -1.0, xi**3
    for t in taus:
        arg = t - xi**3 + z
        v = float(np.sum((1.0 + arg**2) ** (-(1.0 + eps) / 2.0)) * da)
        if v > best_v:
            best_v, best_t = v, float(t)
    return best_v, best_t


def resonant_slope(
    eps: float = 0.1, xis: tuple[float, ...] = (8.0, 16.0, 32.0, 64.0), n: int = 768
) -> tuple[float, list[tuple[float, float]]]:
    """Fitted log-log slope of sup_tau resonant_integral versus |xi|."""
    pts = []
    for x in xis:
        v, _ = resonant_sup_tau(x, eps, n=n)
        pts.append((x, v))
    lx = np.log([p[0] for p in pts])
    lv = np.log([max(p[1], 1e-300) for p in pts])
    slope = float(np.polyfit(lx, lv, 1)[0])
    return slope, pts
