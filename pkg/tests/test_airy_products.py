"""Closed resolution of products of free flows on the frequency side."""

import math

import numpy as np
import pytest

from mkdvlab.airy_products import (
    dyadic_measure_probe,
    dyadic_partition,
    dyadic_total_measure,
    pair_branches,
    pair_jacobian,
    pair_norm_formula,
    pair_pairing,
    pair_spectrum,
    pair_tau,
    pair_y_squared,
    triple_branches,
    triple_pairing,
    triple_y_squared,
    y_max_on_window,
)
from mkdvlab.grid import Grid, airy_flow_2d, from_profile


def grid(n=256, n_t=256):
    return Grid(n, np.pi * n / 8.0, n_t=n_t, t_window=1.25, require_tau_cover=False)


def gauss(c, w, a=1.0):
    return lambda xi: a * np.exp(-((xi - c) ** 2) / (2.0 * w**2))


def pairing_oracle(g, profiles, xi_ix, wpsi):
    """Time-evolution side of the pairing: transform the pointwise product
    of the free flows and integrate against the windowed test function."""
    halves = [g.inverse_x(airy_flow_2d(from_profile(g, p)).values) for p in profiles]
    prod = halves[0]
    for h in halves[1:]:
        prod = prod * h
    prod_half = g.forward_x(prod)
    return np.sum(prod_half[:, xi_ix] * np.conj(wpsi)) * g.dt


def window_test(g, wpsi):
    """test(tau) = conj(Phi(tau)) with Phi the direct time transform of the
    windowed test function; evaluated in chunks and shape preserving."""

    def test(tau):
        tau = np.asarray(tau, dtype=float)
        flat = tau.reshape(-1)
        out = np.empty(flat.size, dtype=complex)
        step = 8192
        for i in range(0, flat.size, step):
            blk = flat[i : i + step]
            out[i : i + step] = np.conj(np.exp(-1j * np.outer(blk, g.t)) @ wpsi * g.dt)
        return out.reshape(tau.shape)

    return test


def test_pair_branch_algebra():
    xi, tau = 1.3, 7.0
    y2 = pair_y_squared(xi, tau)
    assert y2 == pytest.approx(4.0 * (tau / (3.0 * xi) - xi**2 / 12.0))
    plus, minus = pair_branches(xi, tau)
    assert plus.admissible and minus.admissible
    for br in (plus, minus):
        # the branch zero reproduces tau through the constraint
        z = br.zero
        assert z**3 + (xi - z) ** 3 == pytest.approx(tau, rel=1e-12)
        assert br.constraint_defect() < 1e-12
    y = math.sqrt(y2)
    assert pair_tau(xi, y) == pytest.approx(tau)
    assert pair_jacobian(xi, y) == pytest.approx(1.5 * abs(xi) * y)


def test_pair_branch_inadmissible():
    # tau below the branch point of xi^3/4 has no real zeros
    plus, minus = pair_branches(2.0, 0.5)
    assert not plus.admissible and not minus.admissible


def test_triple_branch_algebra():
    xi, tau, xi1 = 0.8, 4.0, 0.25
    y2 = triple_y_squared(xi, tau, xi1)
    y = math.sqrt(float(y2))
    for br in triple_branches(xi, tau, xi1):
        z = br.zero
        # zeros of xi1^3 + z^3 + (xi - xi1 - z)^3 = tau
        assert xi1**3 + z**3 + (xi - xi1 - z) ** 3 == pytest.approx(tau, rel=1e-10)
        assert br.jacobian == pytest.approx(6.0 * abs(xi - xi1) * y)


def test_pair_pairing_matches_time_evolution():
    g = grid()
    pu, pv = gauss(0.8, 0.45), gauss(-0.5, 0.35, 1.3)
    w = g.time_window()
    psi = np.exp(-(((g.t - 0.6) / 0.18) ** 2)) * np.exp(1j * 7.0 * g.t)
    wpsi = w * psi
    test = window_test(g, wpsi)
    u0 = from_profile(g, pu)
    v0 = from_profile(g, pv)
    for xi_val in (0.5, 1.0, -1.0):
        xi_ix = int(round(xi_val / g.dxi)) + g.n_x // 2
        xi = g.xi[xi_ix]
        lhs = pairing_oracle(g, [pu, pv], xi_ix, wpsi)
        rhs = pair_pairing(u0, v0, xi, test, y_max=2 * 3 + abs(xi), n_quad=4096)
        assert abs(lhs - rhs) / abs(lhs) < 0.02


def test_triple_pairing_matches_time_evolution():
    g = grid()
    pu, pv, pw = gauss(0.8, 0.45), gauss(-0.5, 0.35, 1.3), gauss(0.3, 0.5, 0.9)
    w = g.time_window()
    psi = np.exp(-(((g.t - 0.6) / 0.18) ** 2)) * np.exp(1j * 7.0 * g.t)
    wpsi = w * psi
    test = window_test(g, wpsi)
    u0, v0, w0 = (from_profile(g, p) for p in (pu, pv, pw))
    xi_ix = g.n_x // 2 + 2
    xi = g.xi[xi_ix]
    lhs = pairing_oracle(g, [pu, pv, pw], xi_ix, wpsi)
    rhs = triple_pairing(u0, v0, w0, xi, test)
    assert abs(lhs - rhs) / abs(lhs) < 0.02


def test_pair_spectrum_inadmissible_is_zero():
    g = grid(n=64, n_t=8)
    u0 = from_profile(g, gauss(0.0, 1.0))
    assert pair_spectrum(u0, u0, 2.0, 0.5) == 0.0


def test_pair_norm_formula_matches_naive_convolution():
    g = Grid(64, np.pi * 8.0, n_t=8, t_window=1.25, require_tau_cover=False)
    u = from_profile(g, lambda xi: np.exp(-((xi - 0.5) ** 2)) * (1 + 0.3j))
    v = from_profile(g, lambda xi: np.exp(-((xi + 0.3) ** 2) / 0.8))
    pc = 1.7
    out = pair_norm_formula(u, v, pc)
    n = g.n_x
    z = n // 2
    fa = np.abs(u.values) ** pc
    ga = np.abs(v.values) ** pc
    naive = np.zeros(n)
    for k in range(n):
        s = 0.0
        for i in range(n):
            s += fa[i] * ga[(k - i + z) % n]
        naive[k] = (s * g.mxi) ** (1.0 / pc)
    assert np.max(np.abs(out - naive)) < 1e-9 * np.max(naive)


def test_dyadic_measure_bins():
    # measure of {y ~ 2^j} inside the sampling window stays ~ 2^j
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(30):
        xi = rng.uniform(-20.0, 20.0)
        tau = rng.uniform(-500.0, 500.0)
        if abs(xi) < 0.5:
            continue
        for j in range(-2, 6):
            m = dyadic_measure_probe(xi, tau, j, samples=1 << 14)
            worst = max(worst, m / 2.0**j)
    assert 0.5 < worst < 20.0


def test_dyadic_partition_additivity_and_empty_bin():
    xi, tau = 5.3, 40.0
    parts = dyadic_partition(xi, tau, -6, 7, samples=1 << 16)
    tot = dyadic_total_measure(xi, tau, -6, 7, samples=1 << 16)
    assert abs(parts.sum() - tot) <= 1e-12 * max(tot, 1.0)
    # on tau = xi^3 the pole at xi1 = xi disappears and y is bounded
    xi0 = 2.0
    tau0 = xi0**3
    ym = y_max_on_window(xi0, tau0)
    j_hi = math.floor(math.log2(ym))
    assert dyadic_measure_probe(xi0, tau0, j_hi + 2) == 0.0
