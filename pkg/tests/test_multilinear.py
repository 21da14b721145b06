"""Bilinear and trilinear frequency operators against naive loops."""

import numpy as np
import pytest

from mkdvlab.grid import Grid, SpectralField, from_profile
from mkdvlab.multilinear import (
    TrilinearMask,
    adjoint_defect,
    conjugate_field,
    i_minus,
    i_plus,
    inner_product,
    region_mask,
    trilinear_apply,
    trilinear_naive,
)


def grid(n=64, n_t=8):
    return Grid(n, np.pi * n / 8.0, n_t=n_t, t_window=1.25, require_tau_cover=False)


def band_limited(g, seed, band_cells=8):
    """Random field supported well inside the band, so circular and linear
    convolutions coincide and the naive loops below can use true xi sums."""
    rng = np.random.default_rng(seed)
    vals = np.zeros(g.n_x, dtype=complex)
    z = g.n_x // 2
    sl = slice(z - band_cells, z + band_cells + 1)
    m = 2 * band_cells + 1
    vals[sl] = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return SpectralField(g, vals, "frequency")


def naive_bilinear(f, g_field, s, flavor):
    g = f.grid
    n = g.n_x
    z = n // 2
    fv = f.to_frequency().values
    gv = g_field.to_frequency().values
    out = np.zeros(n, dtype=complex)
    for i in range(n):
        for j in range(n):
            k = i + j - z
            if not (0 <= k < n):
                continue
            if s == 0.0:
                w = 1.0
            elif flavor == "minus":
                w = abs(g.xi[i] - g.xi[j]) ** s if g.xi[i] != g.xi[j] else 0.0
            else:
                w = abs(g.xi[k] + g.xi[j]) ** s if g.xi[k] + g.xi[j] != 0.0 else 0.0
            out[k] += w * fv[i] * gv[j]
    return out * g.mxi


@pytest.mark.parametrize("s", [0.0, 0.5, 1.0 / 3.0])
def test_i_minus_matches_naive(s):
    g = grid()
    f = band_limited(g, 1)
    h = band_limited(g, 2)
    fast = i_minus(f, h, s).values
    ref = naive_bilinear(f, h, s, "minus")
    assert np.max(np.abs(fast - ref)) < 1e-12 * max(np.max(np.abs(ref)), 1.0)


@pytest.mark.parametrize("s", [0.0, 0.5])
def test_i_plus_matches_naive(s):
    g = grid()
    f = band_limited(g, 3)
    h = band_limited(g, 4)
    fast = i_plus(f, h, s).values
    ref = naive_bilinear(f, h, s, "plus")
    assert np.max(np.abs(fast - ref)) < 1e-12 * max(np.max(np.abs(ref)), 1.0)


@pytest.mark.parametrize("region", ["t", "ge", "le", "unmasked"])
def test_trilinear_matches_naive(region):
    g = grid(n=32)
    f = band_limited(g, 5, band_cells=5)
    h = band_limited(g, 6, band_cells=5)
    k = band_limited(g, 7, band_cells=5)
    mask = TrilinearMask(region)
    fast = trilinear_apply(f, h, k, mask).values
    ref = trilinear_naive(f, h, k, mask).values
    assert np.max(np.abs(fast - ref)) < 1e-12 * max(np.max(np.abs(ref)), 1.0)


def test_trilinear_2d_acts_per_time_slice():
    g = grid(n=32, n_t=4)
    rng = np.random.default_rng(9)
    rows = [band_limited(g, 20 + i, band_cells=5).values for i in range(3)]
    mk2 = lambda base: SpectralField(
        g,
        g.forward_t(
            np.stack([base * (1.0 + 0.1 * j) for j in range(g.n_t)])
        ),
        "frequency",
    )
    u, v, w = (mk2(r) for r in rows)
    out = trilinear_apply(u, v, w, TrilinearMask("ge"))
    halves = g.inverse_t(out.values)
    for j in range(g.n_t):
        sl = [SpectralField(g, r * (1.0 + 0.1 * j), "frequency") for r in rows]
        ref = trilinear_apply(sl[0], sl[1], sl[2], TrilinearMask("ge")).values
        assert np.allclose(halves[j], ref, atol=1e-12)
    del rng


def test_adjoint_identity_on_random_fields():
    g = grid()
    rng = np.random.default_rng(31)
    mk = lambda seed: SpectralField(
        g,
        np.random.default_rng(seed).standard_normal(g.n_x)
        + 1j * np.random.default_rng(seed + 100).standard_normal(g.n_x),
        "frequency",
    )
    for seed in (1, 2, 3):
        d = adjoint_defect(mk(seed), mk(seed + 10), mk(seed + 20), 0.5)
        assert d < 1e-10
    del rng


def test_inner_product_conjugate_symmetry():
    g = grid()
    f = band_limited(g, 40)
    h = band_limited(g, 41)
    assert inner_product(f, h) == pytest.approx(np.conj(inner_product(h, f)))


def test_conjugate_field_involution():
    g = grid()
    f = band_limited(g, 50)
    twice = conjugate_field(conjugate_field(f)).values
    assert np.allclose(twice, f.values, atol=1e-14)


def test_region_mask_examples():
    # separated: comparable large pair against a small third frequency
    assert region_mask(40.0, -38.0, 1.0) == "i"
    # opposite signs in the (2, 3) slots
    assert region_mask(0.5, 4.0, -3.0) == "ii"
    # same sign, unit-separated pair
    assert region_mask(0.5, 4.0, 2.5) == "iii"
    # nearby same-sign frequencies fall outside all three regions
    assert region_mask(0.5, 1.2, 1.0) == "none"
    # precedence: region i wins over the sign conditions
    assert region_mask(40.0, 38.0, 1.0) == "i"
