"""Lattice, transform contract, norms, averages, Bernstein."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsepdo.dyadic import DyadicCube, GridShift
from sparsepdo.func import (GridFunction, Lattice, bernstein_check, dft, inner, inverse_dft,
                            local_average, lp_norm, read_gridfunction, write_gridfunction)

LAT = Lattice(1, 8.0, 256)


def _random_gf(lat, rng):
    return GridFunction(lat, rng.standard_normal(lat.shape()) + 1j * rng.standard_normal(lat.shape()))


def test_lattice_validation():
    with pytest.raises(ValueError):
        Lattice(1, 8.0, 100)  # not a power of two
    with pytest.raises(ValueError):
        Lattice(1, 8.0, 4)
    with pytest.raises(ValueError):
        Lattice(3, 8.0, 16)
    with pytest.raises(ValueError):
        Lattice(1, -1.0, 16)


def test_dft_constant_is_delta():
    f = GridFunction(LAT, np.ones(256))
    fhat = dft(f).values
    assert abs(fhat[0] - 8.0) < 1e-12  # integral of 1 over [0, L)
    assert np.abs(fhat[1:]).max() < 1e-12


def test_dft_pure_exponential():
    x = LAT.x_axis()
    f = GridFunction(LAT, np.exp(1j * 2 * np.pi * x / LAT.L))
    fhat = dft(f).values
    peak = np.argmax(np.abs(fhat))
    assert peak == 1
    assert np.abs(np.delete(fhat, 1)).max() < 1e-10


def test_roundtrip_and_parseval():
    rng = np.random.default_rng(0)
    for _ in range(100):
        f = _random_gf(LAT, rng)
        g = inverse_dft(dft(f))
        assert np.abs(g.values - f.values).max() < 1e-12 * np.abs(f.values).max()
        c = (LAT.L / math.sqrt(LAT.N))
        assert abs(lp_norm(dft(f), 2) - c * lp_norm(f, 2)) < 1e-10 * lp_norm(f, 2)


def test_parseval_2d():
    lat = Lattice(2, 4.0, 16)
    rng = np.random.default_rng(1)
    f = _random_gf(lat, rng)
    c = (lat.L / math.sqrt(lat.N)) ** 2
    assert abs(lp_norm(dft(f), 2) - c * lp_norm(f, 2)) < 1e-10 * lp_norm(f, 2)


def test_lp_norm_halfdomain_indicator():
    lat = Lattice(1, 1.0, 64)
    vals = np.zeros(64)
    vals[:32] = 1.0
    assert abs(lp_norm(GridFunction(lat, vals), 1) - 0.5) < 1e-14


def test_lp_norm_constant():
    for p in (1.0, 2.0, 3.5, math.inf):
        f = GridFunction(LAT, np.ones(256))
        expect = 1.0 if p == math.inf else LAT.L ** (1.0 / p)
        assert abs(lp_norm(f, p) - expect) < 1e-12


def test_lp_norm_rejects_small_p():
    with pytest.raises(ValueError):
        lp_norm(GridFunction(LAT, np.ones(256)), 0.5)


@given(st.integers(0, 10**6))
@settings(max_examples=30, deadline=None)
def test_holder_nesting(seed):
    rng = np.random.default_rng(seed)
    f = _random_gf(LAT, rng)
    # ||f||_p <= L^(1/p - 1/q) ||f||_q for p <= q
    for (p, q) in ((1.0, 2.0), (2.0, 4.0), (1.0, math.inf)):
        lhs = lp_norm(f, p)
        scale = LAT.L ** ((1.0 / p) - (0.0 if q == math.inf else 1.0 / q))
        assert lhs <= scale * lp_norm(f, q) * (1 + 1e-12)


def test_local_average_indicator_and_constant():
    lat = Lattice(1, 8.0, 256)
    Q = DyadicCube(GridShift((0,)), 1, (1,))  # [2, 4)
    vals = np.zeros(256)
    vals[Q.cells(lat)[0]] = 1.0
    f = GridFunction(lat, vals)
    for p in (1.0, 2.0, 3.0, math.inf):
        assert abs(local_average(f, Q, p) - 1.0) < 1e-14
    c = GridFunction(lat, np.full(256, 2.5))
    assert abs(local_average(c, Q, 2.0) - 2.5) < 1e-14


def test_local_average_monotone_in_p():
    rng = np.random.default_rng(4)
    f = _random_gf(LAT, rng)
    Q = DyadicCube(GridShift((0,)), 2, (0,))
    vals = [local_average(f, Q, p) for p in (1.0, 1.5, 2.0, 4.0)]
    assert all(vals[i] <= vals[i + 1] + 1e-12 for i in range(len(vals) - 1))


def test_local_average_outside_domain_errors():
    Q = DyadicCube(GridShift((0,)), 0, (100,))
    with pytest.raises(ValueError, match="does not intersect"):
        local_average(GridFunction(LAT, np.ones(256)), Q, 2.0)


def test_root_average_matches_global_norm():
    rng = np.random.default_rng(9)
    f = _random_gf(LAT, rng)
    root = DyadicCube(GridShift((0,)), 3, (0,))  # [0, 8) exactly
    p = 2.5
    avg = local_average(f, root, p)
    assert abs(avg**p * LAT.L - lp_norm(f, p) ** p) < 1e-10


def test_inner_is_quadrature_pairing():
    rng = np.random.default_rng(2)
    f, g = _random_gf(LAT, rng), _random_gf(LAT, rng)
    direct = np.sum(f.values * np.conj(g.values)) * LAT.dx
    assert abs(inner(f, g) - direct) < 1e-12


def test_bernstein_single_mode_and_identity_case():
    lat = Lattice(1, 8.0, 512)
    rng = np.random.default_rng(3)
    res = bernstein_check(lat, 4, 2.0, 2.0, 3, rng)
    assert res.worst_ratio <= 1.0 + 1e-9  # r = s: plain norm identity
    # a single pure frequency has ratio L^(1/s-1/r) 2^{-j(1/r-1/s)}
    res12 = bernstein_check(lat, 4, 1.0, 2.0, 0, rng)
    assert "pure_mode" in res12.ratios
    expect = lat.L ** (0.5 - 1.0) * 2.0 ** (-4 * 0.5)
    assert abs(res12.ratios["pure_mode"] - expect) < 1e-9


def test_bernstein_dirichlet_bounded_across_j():
    lat = Lattice(1, 8.0, 512)
    rng = np.random.default_rng(5)
    vals = [bernstein_check(lat, j, 1.0, 2.0, 0, rng).ratios["dirichlet"] for j in range(2, 7)]
    assert max(vals) / min(vals) < 3.0


def test_bernstein_nyquist_guard():
    lat = Lattice(1, 8.0, 64)
    with pytest.raises(ValueError, match="exceeds lattice"):
        bernstein_check(lat, 5, 1.0, 2.0, 1)


def test_serialization_both_formats(tmp_path):
    rng = np.random.default_rng(11)
    f = _random_gf(Lattice(1, 2.0, 32), rng)
    for binary in (False, True):
        path = tmp_path / f"gf_{binary}.dat"
        write_gridfunction(path, f, binary=binary)
        g = read_gridfunction(path)
        assert g.lattice == f.lattice
        np.testing.assert_allclose(g.values, f.values, rtol=0, atol=1e-15)


def test_serialization_2d(tmp_path):
    rng = np.random.default_rng(12)
    f = _random_gf(Lattice(2, 2.0, 8), rng)
    path = tmp_path / "gf2.dat"
    write_gridfunction(path, f, binary=True)
    g = read_gridfunction(path)
    np.testing.assert_allclose(g.values, f.values, atol=1e-15)
