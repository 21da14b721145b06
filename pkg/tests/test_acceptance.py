"""End-to-end acceptance gate for the whole laboratory.

Each test states one property of the finished artifact: exact algebra,
oracle agreement, exponent bookkeeping, the full estimate probe matrix,
solver behavior, the lifespan fit, and report determinism.
"""

import json
import time

import numpy as np
import pytest

from mkdvlab.airy_products import pair_pairing, triple_pairing
from mkdvlab.cli import main as cli_main
from mkdvlab.estimates import (
    default_plan,
    default_spec,
    probe,
    resonance_defect,
    resonant_slope,
    t2c_exponents,
)
from mkdvlab.grid import Grid, SpectralField, airy_flow_2d, airy_propagate, from_profile
from mkdvlab.multilinear import (
    TrilinearMask,
    adjoint_defect,
    i_minus,
    i_plus,
    trilinear_apply,
    trilinear_naive,
)
from mkdvlab.norms import (
    FLParams,
    XsbParams,
    fl_norm,
    lifespan_exponent,
    scaling_sigma,
    sr_threshold,
)
from mkdvlab.solver import (
    SolverConfig,
    conservation_check,
    lifespan_experiment,
    march,
    picard_solve,
    soliton_profile,
    soliton_reference,
    solver_grid,
)


def std_grid(n, n_t=16):
    return Grid(n, np.pi * n / 8.0, n_t=n_t, t_window=1.25, require_tau_cover=False)


def test_01_resonance_identity():
    start = time.monotonic()
    rng = np.random.default_rng(0)
    for _ in range(10_000):
        xis = rng.uniform(-50.0, 50.0, 3)
        taus = rng.uniform(-1e5, 1e5, 3)
        assert resonance_defect(xis, taus) <= 1e-10
    assert time.monotonic() - start < 1.0


def test_02_airy_unitarity():
    start = time.monotonic()
    g = std_grid(128)
    u = from_profile(
        g,
        lambda x: np.exp(-((x - g.length / 2.0) ** 2) / 2.0) * (1.0 + 0.2 * np.cos(x)),
        side="physical",
    )
    rng = np.random.default_rng(1)
    for _ in range(20):
        r = rng.uniform(1.1, 4.0)
        s = rng.uniform(-1.0, 1.5)
        t = rng.uniform(-3.0, 3.0)
        a = fl_norm(u, FLParams(r, s))
        b = fl_norm(airy_propagate(u, t), FLParams(r, s))
        assert abs(a - b) <= 1e-12 * max(a, 1.0)
    assert time.monotonic() - start < 1.0


def test_03_multilinear_oracles():
    start = time.monotonic()
    g = std_grid(64, n_t=8)
    z = g.n_x // 2

    def band(seed, n_cells=8):
        rng = np.random.default_rng(seed)
        vals = np.zeros(g.n_x, dtype=complex)
        m = 2 * n_cells + 1
        vals[z - n_cells : z + n_cells + 1] = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        return SpectralField(g, vals, "frequency")

    def naive_bilinear(f, h, s, flavor):
        fv, hv = f.values, h.values
        out = np.zeros(g.n_x, dtype=complex)
        for i in range(g.n_x):
            for j in range(g.n_x):
                k = i + j - z
                if not (0 <= k < g.n_x):
                    continue
                if flavor == "minus":
                    w = abs(g.xi[i] - g.xi[j]) ** s if g.xi[i] != g.xi[j] else 0.0
                else:
                    w = abs(g.xi[k] + g.xi[j]) ** s if g.xi[k] + g.xi[j] != 0.0 else 0.0
                out[k] += w * fv[i] * hv[j]
        return out * g.mxi

    f, h = band(1), band(2)
    for s in (0.5, 1.0 / 3.0):
        for op, flavor in ((i_minus, "minus"), (i_plus, "plus")):
            fast = op(f, h, s).values
            ref = naive_bilinear(f, h, s, flavor)
            assert np.max(np.abs(fast - ref)) <= 1e-12 * np.max(np.abs(ref))
    g3 = std_grid(32, n_t=8)
    z3 = g3.n_x // 2

    def band3(seed):
        rng = np.random.default_rng(seed)
        vals = np.zeros(g3.n_x, dtype=complex)
        vals[z3 - 5 : z3 + 6] = rng.standard_normal(11) + 1j * rng.standard_normal(11)
        return SpectralField(g3, vals, "frequency")

    u, v, w = band3(3), band3(4), band3(5)
    for region in ("t", "ge", "le", "unmasked"):
        mask = TrilinearMask(region)
        fast = trilinear_apply(u, v, w, mask).values
        ref = trilinear_naive(u, v, w, mask).values
        assert np.max(np.abs(fast - ref)) <= 1e-12 * max(np.max(np.abs(ref)), 1.0)
    for seed in (10, 11, 12):
        rng = np.random.default_rng(seed)
        mk = lambda: SpectralField(
            g,
            rng.standard_normal(g.n_x) + 1j * rng.standard_normal(g.n_x),
            "frequency",
        )
        assert adjoint_defect(mk(), mk(), mk(), 0.5) < 1e-10
    assert time.monotonic() - start < 30.0


def test_04_delta_resolution_against_time_evolution():
    start = time.monotonic()
    g = Grid(256, np.pi * 256 / 8.0, n_t=256, t_window=1.25, require_tau_cover=False)
    profiles = [
        lambda xi: np.exp(-((xi - 0.8) ** 2) / (2.0 * 0.45**2)),
        lambda xi: 1.3 * np.exp(-((xi + 0.5) ** 2) / (2.0 * 0.35**2)),
        lambda xi: 0.9 * np.exp(-((xi - 0.3) ** 2) / (2.0 * 0.5**2)),
    ]
    wpsi = g.time_window() * np.exp(-(((g.t - 0.6) / 0.18) ** 2)) * np.exp(1j * 7.0 * g.t)

    def oracle(profs, xi_ix):
        halves = [g.inverse_x(airy_flow_2d(from_profile(g, p)).values) for p in profs]
        prod = halves[0]
        for h in halves[1:]:
            prod = prod * h
        return np.sum(g.forward_x(prod)[:, xi_ix] * np.conj(wpsi)) * g.dt

    def test_fn(tau):
        tau = np.asarray(tau, dtype=float)
        flat = tau.reshape(-1)
        out = np.empty(flat.size, dtype=complex)
        for i in range(0, flat.size, 8192):
            blk = flat[i : i + 8192]
            out[i : i + 8192] = np.conj(np.exp(-1j * np.outer(blk, g.t)) @ wpsi * g.dt)
        return out.reshape(tau.shape)

    u0, v0, w0 = (from_profile(g, p) for p in profiles)
    xi_ix = int(round(1.0 / g.dxi)) + g.n_x // 2
    xi = g.xi[xi_ix]
    lhs = oracle(profiles[:2], xi_ix)
    rhs = pair_pairing(u0, v0, xi, test_fn, y_max=2 * 3 + abs(xi), n_quad=4096)
    assert abs(lhs - rhs) / abs(lhs) < 0.05
    lhs3 = oracle(profiles, xi_ix)
    rhs3 = triple_pairing(u0, v0, w0, xi, test_fn)
    assert abs(lhs3 - rhs3) / abs(lhs3) < 0.05
    assert time.monotonic() - start < 120.0


def test_05_plancherel_bridge():
    start = time.monotonic()
    g = Grid(256, 16.0 * np.pi, n_t=8, t_window=1.0, require_tau_cover=False)
    u = from_profile(g, lambda x: np.exp(-((x - g.length / 2.0) ** 2) / 2.0), side="physical")
    assert abs(fl_norm(u, FLParams(2.0)) - np.pi**0.25) < 1e-6
    vals = u.to_frequency().values
    s = 0.3
    direct = np.sqrt(np.sum((1.0 + g.xi**2) ** s * np.abs(vals) ** 2) * g.mxi)
    assert abs(fl_norm(u, FLParams(2.0, s)) - direct) < 1e-8
    assert time.monotonic() - start < 1.0


def test_06_exponent_checks():
    start = time.monotonic()
    assert sr_threshold(2.0) == pytest.approx(0.25, abs=1e-15)
    assert scaling_sigma(0.0, 1.0) == pytest.approx(-0.5, abs=1e-15)
    for r in (1.2, 1.5, 2.0):
        b = t2c_exponents(r)
        assert abs(b.s0 + 2.0 * b.s1 - 1.0 / r) <= 1e-12
    for r in (2.0, 3.0):
        b = t2c_exponents(r)
        assert b.degenerate
        assert b.s0 == pytest.approx(1.0 / (3.0 * r), abs=1e-15)
        assert b.s1 == pytest.approx(1.0 / (3.0 * r), abs=1e-15)
    assert lifespan_exponent(2.0) == pytest.approx(-4.0, abs=1e-15)
    assert time.monotonic() - start < 1.0


PROBE_SPECS = [
    ("lemma1", {}),
    ("lemma1", {"p": 4.0, "q": 4.0 / 3.0, "r1": 2.0, "r2": 2.0}),
    ("cor_b1", {}),
    ("cor_b2_204", {}),
    ("lemma2", {}),
    ("lemma3", {}),
    ("cor_t2c", {}),
    ("lemma4", {}),
    ("cor_t3c", {}),
    ("theorem2", {"r": 1.5}),
]


@pytest.mark.parametrize("eid,overrides", PROBE_SPECS)
def test_07_estimate_probes_pass(eid, overrides):
    spec = default_spec(eid, **overrides)
    if eid == "theorem2":
        assert spec.s == pytest.approx(sr_threshold(1.5))
        assert spec.b == pytest.approx(1.0 / 1.5 + 0.1)
        assert spec.bprime == pytest.approx(-0.1)
    rep = probe(default_plan(eid, seed=0, count=50, spec=spec))
    assert rep.verdict == "PASS"
    assert all(g < 1.2 for g in rep.growths)


def test_07_fs20_fails_below_threshold():
    rep = probe(default_plan("fs20", seed=0, count=50, r=1.2))
    assert rep.verdict == "FAIL"
    assert rep.total_growth >= 1.5


def test_08_resonant_integral_slope():
    start = time.monotonic()
    slope, pts = resonant_slope(eps=0.1, xis=(8.0, 16.0, 32.0, 64.0))
    assert all(v > 0.0 for _, v in pts)
    assert time.monotonic() - start < 300.0
    assert slope <= -0.8


def test_09_solver_suite():
    start = time.monotonic()
    params = XsbParams(2.0, 0.25, 0.6)
    g = solver_grid(128, 8.0 * np.pi, 0.1)
    zero = SpectralField(g, np.zeros(g.n_x, dtype=complex), "frequency")
    st = picard_solve(zero, SolverConfig(params, 0.1))
    assert st.converged and st.n_iter == 1
    data = from_profile(g, lambda xi: 0.5 * np.exp(-(xi**2)))
    st = picard_solve(data, SolverConfig(params, 0.1))
    assert st.converged
    assert st.residual < 1e-6 * st.scale
    cons = conservation_check(st)
    assert cons.mass_drift < 1e-8
    st = picard_solve(data, SolverConfig(params, 0.1, sign=-1.0))
    assert st.converged
    base = Grid(256, 40.0, n_t=10, t_window=0.05, require_tau_cover=False)
    u0 = soliton_profile(base, c=1.0, x0=20.0)
    out = march(u0, SolverConfig(params, 0.02), total_time=0.1, n_segments=5)
    gm = out.data[-1].grid
    final = gm.inverse_x(out.data[-1].values).real
    err = np.sqrt(np.sum((final - soliton_reference(gm, 0.1, c=1.0, x0=20.0)) ** 2) * gm.dx)
    assert err < 1e-3
    assert time.monotonic() - start < 600.0


def test_10_lifespan_slope():
    start = time.monotonic()
    report = lifespan_experiment(r=2.0)
    assert report.monotone
    assert -5.2 <= report.slope <= -2.8
    assert time.monotonic() - start < 1800.0


def test_11_determinism_byte_identical_csv(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps(
            {
                "experiment": "probe",
                "seed": 5,
                "params": {"estimate_id": "lemma1", "count": 5, "grid_ns": [64, 128]},
            }
        )
    )
    blobs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert cli_main(["run", str(cfg), "--out", str(out)]) == 0
        blobs.append((out / "report.csv").read_bytes())
    assert blobs[0] == blobs[1]
