"""Cube geometry, packing, and sparse certification."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsepdo.dyadic import (Ball, CertifyFailure, CubeFamily, DyadicCube, GridShift,
                              SparseCollection, carleson_constant, certify_sparse,
                              certificate_lines, children, family_from_lines,
                              family_to_lines, one_third_trick_cover, parent)
from sparsepdo.func import Lattice

SHIFTS = [GridShift((v,)) for v in (0, 1, 2)]


def test_children_tile_parent_1d():
    Q = DyadicCube(GridShift((0,)), 0, (0,))
    ch = children(Q)
    assert len(ch) == 2
    assert ch[0].k == -1 and {c.m for c in ch} == {(0,), (1,)}
    assert ch[0].lo(0) == Q.lo(0) and ch[1].hi(0) == Q.hi(0)
    assert ch[0].hi(0) == ch[1].lo(0)


def test_children_2d_count_and_shift():
    Q = DyadicCube(GridShift((1, 2)), 2, (0, 3))
    ch = children(Q)
    assert len(ch) == 4
    assert all(c.shift == Q.shift for c in ch)
    total = sum(c.measure for c in ch)
    assert total == Q.measure
    assert all(parent(c) == Q for c in ch)


@given(st.integers(-6, 6), st.integers(-40, 40), st.sampled_from([0, 1, 2]))
@settings(max_examples=200, deadline=None)
def test_children_preserve_shift_and_tile(k, m, v):
    Q = DyadicCube(GridShift((v,)), k, (m,))
    ch = children(Q)
    assert all(c.shift.v == (v,) for c in ch)
    los = sorted(c.lo(0) for c in ch)
    assert los[0] == Q.lo(0)
    assert max(c.hi(0) for c in ch) == Q.hi(0)
    assert sum(c.measure for c in ch) == Q.measure
    assert all(parent(c) == Q for c in ch)


@given(st.integers(-4, 4), st.integers(-20, 20), st.integers(-20, 20), st.sampled_from([0, 1, 2]))
@settings(max_examples=200, deadline=None)
def test_equal_scale_disjoint(k, m1, m2, v):
    if m1 == m2:
        return
    a = DyadicCube(GridShift((v,)), k, (m1,))
    b = DyadicCube(GridShift((v,)), k, (m2,))
    # exact rational endpoints: intervals are disjoint
    assert a.hi(0) <= b.lo(0) or b.hi(0) <= a.lo(0)


def test_one_third_cover_interior_ball():
    Q = one_third_trick_cover(Ball((0.5,), 0.1))
    assert Q.lo(0) <= Fraction(2, 5) and Q.hi(0) >= Fraction(3, 5)
    assert float(Q.sidelength) <= 1.0


def test_one_third_cover_boundary_point():
    # ball straddling a standard-grid boundary forces a shifted grid at fine scale
    B = Ball((0.5,), 0.01)
    Q = one_third_trick_cover(B)
    assert Q.lo(0) <= Fraction(49, 100) and Q.hi(0) >= Fraction(51, 100)
    assert float(Q.sidelength) <= 24 * B.radius
    # exhaustive check over the shifts at scales k in [-8, 2]: some cube contains B
    found = []
    for k in range(-8, 3):
        for v in (0, 1, 2):
            side = Fraction(2) ** k
            sgn = -1 if k % 2 else 1
            off = Fraction(sgn * v, 3)
            m = math.floor((Fraction(49, 100)) / side - off)
            c = DyadicCube(GridShift((v,)), k, (m,))
            if c.lo(0) <= Fraction(49, 100) and c.hi(0) >= Fraction(51, 100):
                found.append(c)
    assert Q in found
    assert min(f.k for f in found) == Q.k  # returned cube is at the smallest scale found


@given(st.floats(0.01, 10.0), st.floats(-20.0, 20.0))
@settings(max_examples=200, deadline=None)
def test_one_third_cover_contains(radius, center):
    Q = one_third_trick_cover(Ball((center,), radius))
    assert Q.lo(0) <= Fraction(center) - Fraction(radius)
    assert Q.hi(0) >= Fraction(center) + Fraction(radius)
    assert float(Q.sidelength) <= 24 * radius


def test_one_third_cover_whole_domain():
    Q = one_third_trick_cover(Ball((4.0,), 4.0 * (1 - 1e-9)))
    assert Q.lo(0) <= 0 and Q.hi(0) >= Fraction(8) * (1 - Fraction(1, 10**9))
    assert float(Q.sidelength) <= 24 * 4.0


def test_carleson_disjoint_is_one():
    fam = CubeFamily([DyadicCube(GridShift((0,)), 0, (i,)) for i in range(5)])
    assert carleson_constant(fam) == 1


def test_carleson_parent_children_two():
    Q = DyadicCube(GridShift((1,)), 0, (0,))
    fam = CubeFamily([Q] + children(Q))
    assert carleson_constant(fam) == 2


def test_carleson_empty_family_rejected():
    with pytest.raises(ValueError, match="empty family"):
        carleson_constant(CubeFamily([]))


def _complete_tree(depth):
    root = DyadicCube(GridShift((0,)), 0, (0,))
    fam = [root]
    level = [root]
    for _ in range(depth):
        nxt = []
        for q in level:
            nxt.extend(children(q))
        fam.extend(nxt)
        level = nxt
    return CubeFamily(fam)


def test_complete_tree_packing_grows():
    fam = _complete_tree(4)
    assert carleson_constant(fam) == 5
    res = certify_sparse(fam, 0.6)
    assert isinstance(res, CertifyFailure)
    assert len(res.chain) == 5  # nested witness chain of the overpacked root
    assert res.best_eta <= 0.21


def test_certify_disjoint_full_witness():
    fam = CubeFamily([DyadicCube(GridShift((2,)), -1, (i,)) for i in range(4)])
    res = certify_sparse(fam, 0.9)
    assert isinstance(res, SparseCollection)
    res.validate()
    # witness is the whole cube
    for q in fam:
        assert sum((b[0][1] - b[0][0]) for b in res.witness[q]) == 2 ** (q.k - res.witness_scale)


def test_certify_chain_six_levels_at_half():
    chain = [DyadicCube(GridShift((0,)), 0, (0,))]
    for _ in range(6):
        chain.append(children(chain[-1])[0])
    res = certify_sparse(CubeFamily(chain), 0.5)
    assert isinstance(res, SparseCollection)
    res.validate()


def test_certify_flow_fallback_splits_cells():
    # greedy leaves the parent empty; exact assignment shares children cells
    Q = DyadicCube(GridShift((0,)), 0, (0,))
    fam = CubeFamily([Q] + children(Q))
    res = certify_sparse(fam, 0.45)
    assert isinstance(res, SparseCollection)
    res.validate()
    assert isinstance(certify_sparse(fam, 0.6), CertifyFailure)


def _random_family(rng) -> CubeFamily:
    v = int(rng.integers(0, 3))
    cubes = set()
    for _ in range(int(rng.integers(1, 20))):
        k = int(rng.integers(-4, 2))
        m = int(rng.integers(-8, 8))
        cubes.add(DyadicCube(GridShift((v,)), k, (m,)))
    return CubeFamily(cubes)


def test_certify_vs_carleson_both_directions():
    """certify success at eta implies packing <= 1/eta; packing <= L implies
    certification at c/L with c = 1/2 (cell-rounding margin documented)."""
    rng = np.random.default_rng(0)
    for _ in range(40):
        fam = _random_family(rng)
        pack = carleson_constant(fam)
        for eta in (0.3, 0.55, 0.8):
            res = certify_sparse(fam, eta)
            if isinstance(res, SparseCollection):
                res.validate()
                assert pack <= Fraction(1) / Fraction(*(float(eta)).as_integer_ratio()) + Fraction(1, 1000)
        res = certify_sparse(fam, 0.5 / float(pack))
        assert isinstance(res, SparseCollection)


def test_certify_matches_scipy_flow_oracle():
    """Exact feasibility agrees with an independent max-flow solver."""
    maximum_flow = pytest.importorskip("scipy.sparse.csgraph").maximum_flow
    from scipy.sparse import csr_matrix

    def oracle(fam: CubeFamily, eta: float) -> bool:
        k_min = fam.min_scale - 4
        cubes = list(fam)
        cells = {}
        for q in cubes:
            lo = q.descendant_lo_index(k_min)[0]
            w = 2 ** (q.k - k_min)
            cells[q] = range(lo, lo + w)
        all_cells = sorted({c for rng_ in cells.values() for c in rng_})
        cid = {c: i for i, c in enumerate(all_cells)}
        nq, nc = len(cubes), len(all_cells)
        src, snk = nq + nc, nq + nc + 1
        rows, cols, caps = [], [], []
        demand = 0
        for i, q in enumerate(cubes):
            d = math.ceil(len(cells[q]) * Fraction(*float(eta).as_integer_ratio()))
            demand += d
            rows.append(src); cols.append(i); caps.append(d)
            for c in cells[q]:
                rows.append(i); cols.append(nq + cid[c]); caps.append(1)
        for c in all_cells:
            rows.append(nq + cid[c]); cols.append(snk); caps.append(1)
        graph = csr_matrix((caps, (rows, cols)), shape=(nq + nc + 2, nq + nc + 2))
        return maximum_flow(graph, src, snk).flow_value >= demand

    rng = np.random.default_rng(7)
    for _ in range(25):
        fam = _random_family(rng)
        if len(fam) > 12:
            continue
        for eta in (0.35, 0.5, 0.75):
            ours = isinstance(certify_sparse(fam, eta), SparseCollection)
            assert ours == oracle(fam, eta)


def test_cube_cells_clip_to_domain():
    lat = Lattice(1, 8.0, 64)
    q = DyadicCube(GridShift((1,)), 2, (-1,))  # [-8/3, 4/3): clipped
    cells = q.cells(lat)[0]
    assert cells[0] == 0
    assert lat.x_axis()[cells[-1]] < float(q.hi(0))


def test_serialization_roundtrip():
    fam = _random_family(np.random.default_rng(3))
    lines = family_to_lines(fam)
    fam2 = family_from_lines(lines)
    assert fam.cubes == fam2.cubes
    res = certify_sparse(fam, 0.2)
    if isinstance(res, SparseCollection):
        lines = certificate_lines(res)
        assert lines[0].startswith("#")
        assert all("->" in ln for ln in lines[1:])
