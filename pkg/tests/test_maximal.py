"""Maximal operators, the grand maximal function, pointwise domination."""

import math

import numpy as np
import pytest

from sparsepdo.dyadic import carleson_constant, certify_sparse, SparseCollection
from sparsepdo.func import GridFunction, Lattice, lp_norm
from sparsepdo.maximal import (MaximalKind, grand_maximal, grand_maximal_weak_type, hl_max,
                               maximal, pointwise_dominate, weak_type_constant)
from sparsepdo.presets import symbol_preset
from sparsepdo.sparse import make_test_function

LAT = Lattice(1, 8.0, 512)


def test_kind_validation():
    with pytest.raises(ValueError):
        MaximalKind("nope")
    with pytest.raises(ValueError):
        MaximalKind("Lp", p=0.5)
    with pytest.raises(ValueError):
        MaximalKind("grand")


def test_max_of_constant():
    c = GridFunction(LAT, np.full(512, 3.0))
    assert np.abs(maximal(c, MaximalKind("HL")).values.real - 3.0).max() < 1e-13


def test_maximal_dominates_function_and_jensen():
    rng = np.random.default_rng(0)
    f = GridFunction(LAT, rng.random(512))
    m = maximal(f, MaximalKind("HL")).values.real
    assert np.all(m >= np.abs(f.values) - 1e-12)
    mp = maximal(f, MaximalKind("Lp", p=2.0)).values.real
    assert np.all(mp >= m - 1e-12)
    mg = maximal(f, MaximalKind("power_gamma", gamma=3.0)).values.real
    assert np.all(mg >= m - 1e-12)


def test_sublinearity():
    rng = np.random.default_rng(1)
    f = GridFunction(LAT, rng.random(512))
    g = GridFunction(LAT, rng.random(512))
    msum = maximal(GridFunction(LAT, f.values + g.values), MaximalKind("HL")).values.real
    assert np.all(msum <= maximal(f, MaximalKind("HL")).values.real
                  + maximal(g, MaximalKind("HL")).values.real + 1e-12)


def test_indicator_lower_bound_matches_brute():
    lat = Lattice(1, 8.0, 64)
    from sparsepdo.dyadic import DyadicCube, GridShift
    Q = DyadicCube(GridShift((0,)), 0, (3,))
    vals = np.zeros(64)
    vals[Q.cells(lat)] = 1.0
    f = GridFunction(lat, vals)
    fast = hl_max(f.values, lat)
    x = lat.x_axis()
    brute = np.zeros(64)
    for k in range(round(math.log2(lat.dx)), 4):
        side = 2.0**k
        sgn = -1 if k % 2 else 1
        for v in (0, 1, 2):
            off = sgn * v / 3.0
            for m in range(math.floor(-off) - 1, math.ceil(8.0 / side - off) + 1):
                cells = np.nonzero((x >= side * (m + off) - 1e-12) & (x < side * (m + 1 + off) - 1e-12))[0]
                if cells.size:
                    brute[cells] = np.maximum(brute[cells], np.abs(f.values[cells]).mean())
    assert np.abs(fast - brute).max() < 1e-14


def test_hl_weak_11_uniform_in_N():
    consts = []
    for N in (2**8, 2**9, 2**10):
        lat = Lattice(1, 8.0, N)
        vals = np.zeros(N)
        vals[N // 2] = 1.0  # spike
        m = hl_max(vals, lat)
        consts.append(weak_type_constant(m, lat, 1.0, lp_norm(GridFunction(lat, vals), 1)))
    assert max(consts) / min(consts) < 1.5
    assert max(consts) < 10


def test_m_of_m_not_bounded_by_m():
    """M(Mf) <= C Mf fails: for a spike the iterated maximal gains a log."""
    ratios = []
    for N in (2**8, 2**10):
        lat = Lattice(1, 8.0, N)
        vals = np.zeros(N)
        vals[N // 2] = 1.0
        m1 = hl_max(vals, lat)
        m2 = hl_max(m1, lat)
        ratios.append(float(np.max(m2 / np.maximum(m1, 1e-300))))
    assert ratios[1] > ratios[0] * 1.2  # grows with refinement


def test_grand_maximal_zero_and_monotone_side():
    lat = Lattice(1, 8.0, 256)
    a = symbol_preset(lat, "oscillatory:m=-1/2,rho=1/2")
    zero = GridFunction(lat, np.zeros(256))
    assert np.abs(grand_maximal(a, zero).values).max() == 0.0


def test_grand_maximal_weak_type_report():
    lat = Lattice(1, 8.0, 256)
    a = symbol_preset(lat, "oscillatory:m=-1/2,rho=1/2")
    rng = np.random.default_rng(2)
    trials = [make_test_function(lat, rng) for _ in range(5)]
    rep = grand_maximal_weak_type(a, 1.25, trials)
    assert math.isfinite(rep.weak_constant) and rep.weak_constant > 0
    assert math.isfinite(rep.majorant_constant) and rep.majorant_constant < 10
    assert math.isfinite(rep.bigcube_constant)
    assert 1.0 < rep.p_used < 1.25 and 1.0 < rep.s_used < 1.25


def test_pointwise_zero_input_empty():
    lat = Lattice(1, 8.0, 256)
    a = symbol_preset(lat, "oscillatory:m=-1/2,rho=1/2")
    vals = np.zeros(256)
    vals[100:140] = 1.0
    res = pointwise_dominate(a, GridFunction(lat, vals), 1.25)
    assert res.ratio > 0 and math.isfinite(res.ratio)
    assert len(res.collection.family) >= 1


def test_pointwise_requires_r_above_one():
    lat = Lattice(1, 8.0, 256)
    a = symbol_preset(lat, "oscillatory:m=-1/2,rho=1/2")
    with pytest.raises(ValueError):
        pointwise_dominate(a, GridFunction(lat, np.ones(256)), 1.0)


def test_pointwise_collection_certifies_at_half():
    lat = Lattice(1, 8.0, 512)
    a = symbol_preset(lat, "xdep:m=-1/2,rho=1/2")
    rng = np.random.default_rng(3)
    for _ in range(3):
        f = make_test_function(lat, rng)
        res = pointwise_dominate(a, f, 1.5)
        coll = certify_sparse(res.collection.family, 0.5)
        assert isinstance(coll, SparseCollection)
        assert carleson_constant(res.collection.family) <= 2
        assert not res.truncated
