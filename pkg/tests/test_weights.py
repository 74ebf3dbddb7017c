"""Muckenhoupt/reverse-Hoelder characteristics and weighted consequences."""

import math
from fractions import Fraction as Fr

import numpy as np
import pytest

from sparsepdo.dyadic import CubeFamily, DyadicCube, GridShift, SparseCollection, certify_sparse
from sparsepdo.func import GridFunction, Lattice
from sparsepdo.presets import symbol_preset
from sparsepdo.sparse import domain_tiling, make_test_function
from sparsepdo.weights import (Weight, ap_characteristic, ap_rh_equivalence_check,
                               coifman_fefferman_check, corollary_endpoints,
                               fefferman_stein_check, rh_characteristic, weak_type_11_check,
                               weight_preset, weighted_sparse_bound_check)

LAT = Lattice(1, 8.0, 512)


def test_constant_weight_characteristics():
    one = weight_preset(LAT, "const")
    for p in (1.0, 1.5, 2.0, 4.0):
        assert abs(ap_characteristic(one, p) - 1.0) < 1e-12
    for q in (1.0, 2.0, 3.0):
        assert abs(rh_characteristic(one, q) - 1.0) < 1e-12


def test_ap_lower_bound_and_equality_iff_constant():
    w = weight_preset(LAT, "power:a=0.5")
    assert ap_characteristic(w, 2.0) > 1.0 + 1e-6
    assert ap_characteristic(weight_preset(LAT, "const"), 2.0) <= 1.0 + 1e-12


def test_ap_monotone_in_p():
    w = weight_preset(LAT, "power:a=0.5")
    vals = [ap_characteristic(w, p) for p in (1.5, 2.0, 3.0, 4.0)]
    assert all(vals[i + 1] <= vals[i] + 1e-12 for i in range(len(vals) - 1))
    cb = weight_preset(LAT, "checkerboard:lambda=4")
    vals = [ap_characteristic(cb, p) for p in (1.5, 2.0, 3.0)]
    assert all(vals[i + 1] <= vals[i] + 1e-12 for i in range(len(vals) - 1))


def test_rh_at_one_is_one():
    for preset in ("const", "power:a=0.5", "checkerboard:lambda=3", "spike:width=0.25"):
        assert rh_characteristic(weight_preset(LAT, preset), 1.0) == 1.0


def test_power_weight_divergence_detected_by_refinement():
    vals = []
    for N in (2**8, 2**9, 2**10):
        w = weight_preset(Lattice(1, 8.0, N), "power:a=1.4")
        vals.append(ap_characteristic(w, 2.0))
    assert vals[1] / vals[0] > 1.15 and vals[2] / vals[1] > 1.15
    stable = []
    for N in (2**8, 2**9, 2**10):
        w = weight_preset(Lattice(1, 8.0, N), "power:a=0.5")
        stable.append(ap_characteristic(w, 2.0))
    assert stable[2] / stable[1] < 1.05


def test_checkerboard_small_lattice_brute_force():
    lat = Lattice(1, 8.0, 16)
    lam = 5.0
    w = weight_preset(lat, f"checkerboard:lambda={lam}")
    got = ap_characteristic(w, 2.0)
    # exhaustive over all shifted cubes
    x = lat.x_axis()
    vals = w.values
    best = 0.0
    for k in range(round(math.log2(lat.dx)), 4):
        side = 2.0**k
        sgn = -1 if k % 2 else 1
        for v in (0, 1, 2):
            off = sgn * v / 3.0
            for m in range(math.floor(-off) - 1, math.ceil(8.0 / side - off) + 1):
                cells = np.nonzero((x >= side * (m + off) - 1e-12) & (x < side * (m + 1 + off) - 1e-12))[0]
                if cells.size:
                    best = max(best, vals[cells].mean() * (1.0 / vals[cells]).mean())
    assert abs(got - best) < 1e-12


def test_ap_infinite_on_vanishing_weight():
    vals = np.ones(512)
    vals[100:120] = 0.0
    w = Weight(GridFunction(LAT, vals))
    assert ap_characteristic(w, 2.0) == math.inf


def test_equivalence_trivial_weight():
    rep = ap_rh_equivalence_check(weight_preset(LAT, "const"), 2.0, 1.0, 4.0)
    assert rep.lhs_holds and rep.rhs_holds
    assert abs(rep.lhs_ap - 1) < 1e-12 and abs(rep.lhs_rh - 1) < 1e-12 and abs(rep.rhs_ap - 1) < 1e-12


def test_equivalence_exponent_guard():
    with pytest.raises(ValueError):
        ap_rh_equivalence_check(weight_preset(LAT, "const"), 2.0, 3.0, 4.0)


def test_equivalence_degenerate_r_close_to_p():
    rep = ap_rh_equivalence_check(weight_preset(LAT, "power:a=0.3"), 2.0, 1.9, 4.0)
    assert rep.lhs_holds == rep.rhs_holds


def test_weighted_bound_trivial_instance():
    Q = DyadicCube(GridShift((0,)), 0, (3,))
    vals = np.zeros(512)
    vals[Q.cells(LAT)] = 1.0
    f = GridFunction(LAT, vals)
    S = SparseCollection(CubeFamily([Q]), 1.0)
    res = weighted_sparse_bound_check(S, f, f, weight_preset(LAT, "const"), 1.0, 4.0, 2.0)
    assert abs(res.lhs - 1.0) < 1e-12
    assert abs(res.rhs - 1.0) < 1e-12
    assert abs(res.ratio - 1.0) < 1e-12
    assert res.alpha == 1.5


def test_alpha_formula_limits():
    # r=1, p=2: alpha = max(1, (s-1)/(s-2)) -> 1 as s grows
    rng = np.random.default_rng(0)
    f = make_test_function(LAT, rng)
    S = certify_sparse(domain_tiling(LAT, 0, GridShift((0,))), 0.5)
    for s, expect in ((4.0, 1.5), (102.0, max(1.0, 101.0 / 100.0))):
        res = weighted_sparse_bound_check(S, f, f, weight_preset(LAT, "const"), 1.0, s, 2.0)
        assert abs(res.alpha - expect) < 1e-12


def test_weighted_bound_scale_invariance():
    rng = np.random.default_rng(1)
    f = make_test_function(LAT, rng)
    g = make_test_function(LAT, rng)
    S = certify_sparse(domain_tiling(LAT, -1, GridShift((0,))), 0.5)
    w = weight_preset(LAT, "power:a=0.5")
    w5 = Weight(GridFunction(LAT, 5.0 * w.values))
    r1 = weighted_sparse_bound_check(S, f, g, w, 1.0, 4.0, 2.0).ratio
    r2 = weighted_sparse_bound_check(S, f, g, w5, 1.0, 4.0, 2.0).ratio
    assert abs(r1 - r2) < 1e-12 * r1


def test_corollary_endpoints_exact():
    assert corollary_endpoints(Fr(-1, 2), 0, 1) == ("r_e", Fr(2))
    assert corollary_endpoints(Fr(-1, 4), 0, 1) == ("s_e", Fr(4))
    assert corollary_endpoints(-1, 0, 1) == ("r_e", Fr(1))
    assert corollary_endpoints(Fr(-1, 4), Fr(1, 2), 1) == ("r_e", Fr(2))
    with pytest.raises(ValueError):
        corollary_endpoints(Fr(-3, 2), 0, 1)
    with pytest.raises(ValueError):
        corollary_endpoints(0, 0, 1)


def test_fefferman_stein_bounded_and_spike():
    lat = Lattice(1, 8.0, 256)
    a = symbol_preset(lat, "oscillatory:m=-1/2,rho=1/2")
    rng = np.random.default_rng(2)
    ratios = []
    w1 = weight_preset(lat, "const")
    spike = weight_preset(lat, "spike:width=0.1")
    for _ in range(10):
        f = make_test_function(lat, rng)
        ratios.append(fefferman_stein_check(a, f, w1, 2.0, ("gamma", 2.0)))
        ratios.append(fefferman_stein_check(a, f, spike, 2.0, ("gamma", 2.0)))
        ratios.append(fefferman_stein_check(a, f, spike, 2.0, ("iterated", 0.0)))
    assert all(math.isfinite(r) for r in ratios)
    assert max(ratios) / np.median(ratios) < 20


def test_coifman_fefferman_bounded():
    lat = Lattice(1, 8.0, 256)
    a = symbol_preset(lat, "oscillatory:m=-1/2,rho=1/2")  # order -n(1-rho)
    rng = np.random.default_rng(3)
    ratios = []
    for aexp in (-0.3, 0.0, 0.5, 0.9):
        w = weight_preset(lat, f"power:a={aexp}")
        for _ in range(3):
            f = make_test_function(lat, rng)
            ratios.append(coifman_fefferman_check(a, f, w, 2.0))
    # sign-oscillating input
    x = lat.x_axis()
    osc = GridFunction(lat, np.sign(np.sin(8 * x)) * np.exp(-((x - 4) ** 2)))
    ratios.append(coifman_fefferman_check(a, osc, weight_preset(lat, "const"), 2.0))
    assert all(math.isfinite(r) for r in ratios)
    assert max(ratios) < 10


def test_weak_type_11():
    lat = Lattice(1, 8.0, 512)
    a = symbol_preset(lat, "oscillatory:m=-1/2,rho=0")  # m < -n(1-rho)/2
    rng = np.random.default_rng(4)
    consts = [weak_type_11_check(a, make_test_function(lat, rng)) for _ in range(10)]
    # spike input
    vals = np.zeros(512)
    vals[256] = 1.0
    consts.append(weak_type_11_check(a, GridFunction(lat, vals)))
    assert all(math.isfinite(c) for c in consts)
    assert max(consts) < 20


def test_weight_preset_validation():
    with pytest.raises(ValueError):
        weight_preset(LAT, "unknown:x=1")
    w = weight_preset(LAT, "power:a=0.5")
    assert np.all(w.values > 0)  # center sits off-lattice
    with pytest.raises(ValueError):
        Weight(GridFunction(LAT, -np.ones(512)))
    with pytest.raises(ValueError):
        Weight(GridFunction(LAT, np.zeros(512)))
