"""Oscillatory multipliers, condition checkers, kernels, propagator."""

import math
from fractions import Fraction as Fr

import numpy as np
import pytest

from sparsepdo.func import GridFunction, Lattice, lp_norm
from sparsepdo.multiplier import (MultiplierParams, ScaledCube, miyachi_check, model_multiplier,
                                  negative_band_piece, oscillatory_kernel_transfer, propagate,
                                  propagator, sobolev_factor, subdyadic_check,
                                  theorem_region_direct)
from sparsepdo.pdo import opnorm
from sparsepdo.sparse import ExponentPair, admissible_pair, make_test_function
from sparsepdo.symbol import Symbol, ClassParams


def test_params_gate():
    with pytest.raises(ValueError):
        MultiplierParams(0.0, 1.0)
    assert MultiplierParams(0.5, 0.25).sign_ok
    assert not MultiplierParams(-1.0, 0.5).sign_ok


def test_model_values():
    m = model_multiplier(0.5, 0.25, chi_width=0.01)
    v = m.eval(0.0, np.array([16.0]))[0]
    assert abs(abs(v) - 0.5) < 1e-12
    assert abs((np.angle(v) - 4.0) % (2 * math.pi)) < 1e-10


def test_negative_alpha_support():
    m = model_multiplier(-1.0, -0.5, chi_width=0.01)
    assert abs(m.eval(0.0, np.array([2.0]))[0]) == 0.0
    assert abs(m.eval(0.0, np.array([0.5]))[0]) > 0.5
    assert m.eval(0.0, np.array([0.0]))[0] == 0.0


def test_miyachi_pass_and_mislabel():
    m = model_multiplier(0.5, 0.25, chi_width=0.01)
    assert miyachi_check(m, 0.5, 0.25, max_order=3, freq_range=(2.0, 2.0**9)).passed
    bad = miyachi_check(m, 0.5, 0.45, max_order=1, freq_range=(2.0, 2.0**9))
    assert not bad.entry(0).uniform


def test_constant_annulus_multiplier_passes():
    def xi_part(xi):
        r = np.abs(np.asarray(xi, dtype=float))
        return ((r >= 1.0) & (r <= 2.0**10)).astype(complex)

    const = Symbol(ClassParams(-1e-9, 0.0, 0.0), "annulus", xi_part)
    rep = miyachi_check(const, 1.0, 0.0, max_order=2, freq_range=(2.0, 2.0**8))
    assert rep.passed


def test_low_frequency_branch():
    m = model_multiplier(-1.0, -0.5, chi_width=0.001)
    rep = miyachi_check(m, -1.0, -0.5, max_order=2, freq_range=(2.0**-8, 1.0))
    assert rep.passed


def test_subdyadic_weaker_than_pointwise():
    m = model_multiplier(0.5, 0.25, chi_width=0.01)
    assert subdyadic_check(m, 0.5, 0.25, max_order=2, freq_range=(2.0, 2.0**9)).passed


def test_spiky_perturbation_separates_conditions():
    """Narrow spikes of height growing like t^0.2 but width shrinking like
    rad * t^-0.4 break the pointwise bound at order zero while their L^2 mass
    over the unit subdyadic balls (alpha = 1) stays uniformly bounded."""
    base = model_multiplier(1.0, 0.5, chi_width=0.01)
    rad = 0.25  # ball_frac * c^(1-alpha) with alpha = 1

    def spiky(xi):
        r = np.abs(np.asarray(xi, dtype=float))
        out = np.asarray(base.xi_part(xi), dtype=complex).copy()
        with np.errstate(divide="ignore"):
            band = np.floor(np.log2(np.maximum(r, 1e-30)))
        center = 1.5 * 2.0**band
        width = rad * center**-0.4
        spike = np.exp(-((r - center) / width) ** 2) * center**0.2 * center**-0.5
        return out + np.where(r >= 1, spike, 0.0)

    sym = Symbol(base.params, "spiky", spiky)
    mi = miyachi_check(sym, 1.0, 0.5, max_order=0, freq_range=(2.0, 2.0**9))
    sd = subdyadic_check(sym, 1.0, 0.5, max_order=0, freq_range=(2.0, 2.0**9), ball_frac=rad)
    assert not mi.entry(0).uniform
    assert sd.entry(0).uniform


def test_region_translation_matches_direct():
    grid = [ExponentPair(Fr(a), Fr(b)) for a in ("1", "4/3", "3/2", "2", "3") for b in ("1", "4/3", "2", "4")]
    for (alpha, beta) in ((Fr(1, 2), Fr(1, 4)), (Fr(2), Fr(1, 2)), (Fr(-1), Fr(-3, 4)), (Fr(1, 2), Fr(-1, 4))):
        for pt in grid:
            direct = theorem_region_direct(alpha, beta, pt)
            translated = (alpha * beta > 0) and admissible_pair(pt, -abs(beta), abs(alpha), 0, False)
            assert direct == translated


def test_kernel_transfer_formulas():
    res = oscillatory_kernel_transfer(2, Fr(1, 2))
    assert (res.alpha, res.beta) == (Fr(2), Fr(1, 2))
    assert res.sign_ok
    res2 = oscillatory_kernel_transfer(Fr(1, 2), Fr(3, 4))
    assert (res2.alpha, res2.beta) == (Fr(-1), Fr(0))
    assert not res2.sign_ok  # the sign gate rejects beta = 0
    with pytest.raises(ValueError):
        oscillatory_kernel_transfer(1, 1.0)
    with pytest.raises(ValueError):
        oscillatory_kernel_transfer(2, -5)


def test_envelope_check():
    res = oscillatory_kernel_transfer(2, Fr(1, 2), lat=Lattice(1, 256.0, 2**15))
    assert res.envelope_ok
    assert abs(res.envelope_slope) < 0.25


def test_propagator_conservation_and_continuity():
    lat = Lattice(1, 8.0, 512)
    rng = np.random.default_rng(0)
    f = make_test_function(lat, rng)
    for alpha in (1, 2, 3):
        u = propagate(alpha, 0.3, f)
        assert abs(lp_norm(u, 2) - lp_norm(f, 2)) < 1e-12 * lp_norm(f, 2)
    u_small = propagate(2, 1e-7, f)
    assert lp_norm(GridFunction(lat, u_small.values - f.values), 2) < 1e-4


def test_sobolev_factor_matches_spectral_formula():
    lat = Lattice(1, 8.0, 256)
    rng = np.random.default_rng(1)
    f = make_test_function(lat, rng)
    t, alpha, beta = 0.3, 2.0, 0.5
    fs = sobolev_factor(f, t, alpha, beta)
    mult = (1 + t * lat.xi_modulus() ** 2) ** (beta / 2)
    direct = np.fft.ifft(mult * np.fft.fft(f.values))
    assert np.abs(fs.values - direct).max() < 1e-12


def test_propagator_report_finite():
    lat = Lattice(1, 8.0, 512)
    rng = np.random.default_rng(2)
    f = make_test_function(lat, rng)
    rep = propagator(2, 0.02, 0.5, f, g=make_test_function(lat, rng), levels=3)
    assert math.isfinite(rep.ratio) and rep.form_value > 0
    assert rep.cubes > 0
    with pytest.raises(ValueError):
        propagator(0, 0.1, 0.5, f)


def test_scaled_cube_cells():
    from sparsepdo.dyadic import DyadicCube, GridShift
    lat = Lattice(1, 8.0, 256)
    Q = DyadicCube(GridShift((0,)), 1, (1,))  # [2, 4)
    sq = ScaledCube(Q, 0.5, 4.0)
    cells = sq.cells(lat)[0]
    x = lat.x_axis()[cells]
    # dilation about the domain center: center 3 -> 3.5, halfwidth 0.5
    assert x.min() >= 3.0 - 1e-9 and x.max() < 4.0


def test_negative_band_piece_decay():
    """The alpha < 0 regime: annulus pieces below frequency 1, with windowed
    norms decaying geometrically beyond the kernel's core scale."""
    lat = Lattice(1, 128.0, 2**12)
    m = model_multiplier(-1.0, -0.5, chi_width=lat.dxi)
    with pytest.raises(ValueError):
        negative_band_piece(m, 1, lat)
    from sparsepdo.pdo import OperatorMatrix, default_cutoff
    cut = default_cutoff()
    x = lat.x_axis()
    z = np.abs(np.where(x > lat.L / 2, x - lat.L, x))
    op = negative_band_piece(m, -1, lat)  # |xi| ~ 1/2: kernel core near |z| ~ 4
    assert opnorm(op, 2, 2).value > 0
    norms = []
    for l in (3, 4, 5):
        windowed = OperatorMatrix(lat, "w", "circulant", kernel=op.kernel * cut.psi_tilde(z / 2.0**l))
        norms.append(opnorm(windowed, 2, 2).value)
    drops = [math.log2(norms[i] / norms[i + 1]) for i in range(len(norms) - 1)]
    assert min(drops) > 0.5
