"""Hardy-Littlewood and variant maximal operators, the grand maximal function,
and stopping-time pointwise sparse domination.

All cube suprema range over the three shifted dyadic grids, scales from one
lattice cell up to the full domain, with cubes clipped to the sampled torus.
The grand maximal function applies the operator to the input truncated
outside the tripled cube and takes the lattice max over the cube.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dyadic import CubeFamily, DyadicCube, GridShift, SparseCollection, certify_sparse
from .func import GridFunction, Lattice, lp_norm
from .pdo import apply_T
from .sparse import sparse_operator
from .symbol import Symbol

__all__ = [
    "MaximalKind",
    "maximal",
    "grand_maximal",
    "pointwise_dominate",
    "PointwiseResult",
    "grand_maximal_weak_type",
    "WeakTypeReport",
    "weak_type_constant",
]


@dataclass(frozen=True)
class MaximalKind:
    tag: str                      # HL | Lp | power_gamma | iterated | grand
    p: float = 1.0
    gamma: float = 1.0
    iterations: int = 1
    operator: Optional[Symbol] = None

    def __post_init__(self):
        if self.tag not in ("HL", "Lp", "power_gamma", "iterated", "grand"):
            raise ValueError(f"unknown maximal kind {self.tag}")
        if self.p < 1 or self.gamma <= 0 or self.iterations < 1:
            raise ValueError("invalid maximal parameters")
        if self.tag == "grand" and self.operator is None:
            raise ValueError("grand maximal kind requires an operator handle")


def _shift_offsets(lat: Lattice, k: int):
    side = 2.0**k
    sgn = -1 if k % 2 else 1
    shifts = [(v,) for v in (0, 1, 2)] if lat.n == 1 else [(v1, v2) for v1 in (0, 1, 2) for v2 in (0, 1, 2)]
    return side, [(GridShift(s), tuple(sgn * c / 3.0 for c in s)) for s in shifts]


def _scale_range(lat: Lattice):
    k_cell = round(math.log2(lat.dx))
    k_root = math.ceil(math.log2(lat.L))
    return range(k_cell, k_root + 1)


def hl_max(vals: np.ndarray, lat: Lattice) -> np.ndarray:
    """sup over all three-shift dyadic cubes containing x of the |vals| average."""
    a = np.abs(vals).astype(np.float64)
    out = np.zeros_like(a)
    axes_x = [lat.x_axis()] * lat.n
    for k in _scale_range(lat):
        side, shifted = _shift_offsets(lat, k)
        for _, off in shifted:
            ids = []
            for i in range(lat.n):
                ids.append(np.floor(axes_x[i] / side - off[i]).astype(np.int64))
            if lat.n == 1:
                qid = ids[0] - ids[0].min()
                nq = qid.max() + 1
                sums = np.bincount(qid, weights=a, minlength=nq)
                counts = np.bincount(qid, minlength=nq)
                avg = sums / counts
                out = np.maximum(out, avg[qid])
            else:
                q0 = ids[0] - ids[0].min()
                q1 = ids[1] - ids[1].min()
                w = q1.max() + 1
                qid = (q0[:, None] * w + q1[None, :]).ravel()
                nq = qid.max() + 1
                sums = np.bincount(qid, weights=a.ravel(), minlength=nq)
                counts = np.bincount(qid, minlength=nq)
                avg = sums / counts
                out = np.maximum(out, avg[qid].reshape(lat.shape()))
    return out


def maximal(f: GridFunction, kind: MaximalKind) -> GridFunction:
    lat = f.lattice
    if kind.tag == "HL":
        return GridFunction(lat, hl_max(f.values, lat))
    if kind.tag == "Lp":
        return GridFunction(lat, hl_max(np.abs(f.values) ** kind.p, lat) ** (1.0 / kind.p))
    if kind.tag == "power_gamma":
        return GridFunction(lat, hl_max(np.abs(f.values) ** kind.gamma, lat) ** (1.0 / kind.gamma))
    if kind.tag == "iterated":
        out = np.abs(f.values)
        for _ in range(kind.iterations):
            out = hl_max(out, lat)
        return GridFunction(lat, out)
    return grand_maximal(kind.operator, f)


def _tripled_range(lat: Lattice, lo: float, side: float):
    """Cell index range of [lo - side, lo + 2 side) clipped to the domain (1-D)."""
    i0 = max(0, math.ceil((lo - side) / lat.dx - 1e-12))
    i1 = min(lat.N, math.ceil((lo + 2 * side) / lat.dx - 1e-12))
    return i0, i1


def grand_maximal(a: Symbol, f: GridFunction, min_side: float = 0.0,
                  chunk: int = 64) -> GridFunction:
    """``sup_{Q ni x} max_{z in Q} |T_a(f chi_{outside 3Q})(z)|`` over shifted
    dyadic cubes (1-D).  ``min_side`` restricts to cubes of at least that
    sidelength (the large-cube regime)."""
    lat = f.lattice
    if lat.n != 1:
        raise NotImplementedError("grand maximal implemented for n = 1")
    x = lat.x_axis()
    out = np.zeros(lat.N)
    for k in _scale_range(lat):
        side, shifted = _shift_offsets(lat, k)
        if side < min_side:
            continue
        for _, off in shifted:
            qid = np.floor(x / side - off[0]).astype(np.int64)
            breaks = np.flatnonzero(np.diff(qid)) + 1
            seg_starts = np.concatenate([[0], breaks])
            seg_ends = np.concatenate([breaks, [lat.N]])
            segs = list(zip(qid[seg_starts], seg_starts, seg_ends))
            for start in range(0, len(segs), chunk):
                batch = segs[start:start + chunk]
                rows = np.tile(f.values, (len(batch), 1))
                for row, (q, _, _) in enumerate(batch):
                    lo = side * (q + off[0])
                    i0, i1 = _tripled_range(lat, lo, side)
                    rows[row, i0:i1] = 0.0
                rows_out = _apply_symbol_rows(a, lat, rows)
                for row, (_, c0, c1) in enumerate(batch):
                    out[c0:c1] = np.maximum(out[c0:c1], np.abs(rows_out[row]).max())
    return GridFunction(lat, out)


def _apply_symbol_rows(a: Symbol, lat: Lattice, rows: np.ndarray) -> np.ndarray:
    """Row-batched T_a for structured symbols."""
    mult = np.asarray(a.xi_part(lat.xi_axis()), dtype=np.complex128)
    out = np.fft.ifft(mult[None, :] * np.fft.fft(rows, axis=1), axis=1)
    if not a.x_independent:
        out = np.asarray(a.x_part(lat.x_axis()), dtype=np.complex128)[None, :] * out
    return out


def weak_type_constant(vals: np.ndarray, lat: Lattice, r: float, source_norm: float) -> float:
    """``sup_lambda lambda |{vals > lambda}|^{1/r} / source_norm`` over the
    empirical levels."""
    a = np.sort(np.abs(vals).ravel())[::-1]
    counts = np.arange(1, a.size + 1) * lat.cell_volume
    vals_sup = a * counts ** (1.0 / r)
    return float(vals_sup.max() / source_norm) if source_norm > 0 else 0.0


# ---------------------------------------------------------------------------
# pointwise sparse domination (stopping time, v = 0 grid)
# ---------------------------------------------------------------------------

def _local_maxes(a: Symbol, f_loc: np.ndarray, lat: Lattice, cells: slice,
                 r: float) -> tuple[np.ndarray, np.ndarray]:
    """On the cell-aligned cube given by ``cells``: the localized grand maximal
    of f_loc and the localized L^r maximal, both as arrays over the cube.
    Subcube scan stops at the 8-cell floor, matching the recursion floor of
    the stopping construction."""
    i0, i1 = cells.start, cells.stop
    width = i1 - i0
    mt = np.zeros(width)
    mr = np.zeros(width)
    fr = np.abs(f_loc) ** r
    levels = int(round(math.log2(width)))
    for lev in range(levels + 1):
        w = width >> lev  # subcube cell count at this level
        if w < 8:
            break
        starts = i0 + np.arange(width // w) * w
        # L^r part: block averages
        block_avg = np.add.reduceat(fr[i0:i1], np.arange(0, width, w)) / w
        mr_lev = np.repeat(block_avg, w)
        mr = np.maximum(mr, mr_lev)
        # grand part: T applied to f outside each tripled subcube
        rows = np.tile(f_loc, (len(starts), 1))
        for row, st in enumerate(starts):
            lo3 = max(0, st - w)
            hi3 = min(lat.N, st + 2 * w)
            rows[row, lo3:hi3] = 0.0
        rows_out = _apply_symbol_rows(a, lat, rows)
        seg = np.abs(rows_out[:, :])
        for row, st in enumerate(starts):
            local = seg[row, st:st + w].max()
            mt[st - i0:st - i0 + w] = np.maximum(mt[st - i0:st - i0 + w], local)
    return mt, mr ** (1.0 / r)


@dataclass
class PointwiseResult:
    collection: SparseCollection
    ratio: float
    kappa_used: float
    truncated: bool
    operator_values: np.ndarray = field(repr=False)
    sparse_values: np.ndarray = field(repr=False)


def pointwise_dominate(a: Symbol, f: GridFunction, r: float,
                       kappa: Optional[float] = None, max_depth: int = 12,
                       eta: float = 0.5) -> PointwiseResult:
    """Stopping-time sparse collection with ``max_x |T_a f| / A_{r,S} f``.

    Starting from the domain root cube, the exceptional set where either the
    locally-truncated grand maximal or the local L^r maximal of ``f chi_3Q``
    exceeds ``kappa <f>_{r,3Q}`` is covered by maximal dyadic subcubes carrying
    more than half their measure of it; those are added and recursed.  kappa
    defaults to four times the empirical weak-type constant at the root and is
    doubled locally whenever the exceptional set would exceed a quarter of the
    cube, which forces the classical eta = 1/2 witness structure.
    """
    if r <= 1:
        raise ValueError("pointwise domination needs r > 1")
    lat = f.lattice
    if lat.n != 1:
        raise NotImplementedError("pointwise domination implemented for n = 1")
    k_root = round(math.log2(lat.L))
    if abs(2.0**k_root - lat.L) > 1e-9:
        raise ValueError("domain length must be a power of two")
    k_cell = round(math.log2(lat.dx))
    shift = GridShift((0,))
    Tf = apply_T(a, f)

    if kappa is None:
        mt_root, _ = _local_maxes(a, f.values, lat, slice(0, lat.N), r)
        base = weak_type_constant(mt_root, lat, r, lp_norm(f, r))
        kappa = 4.0 * max(1.0, base)

    selected: list[DyadicCube] = []
    truncated = False
    kappa_max = kappa

    def process(k: int, m: int, depth: int):
        nonlocal truncated, kappa_max
        width = 2 ** (k - k_cell)
        st = m * width
        cube = DyadicCube(shift, k, (m,))
        selected.append(cube)
        if depth >= max_depth:
            truncated = True
            return
        if width < 16:
            return
        lo3 = max(0, st - width)
        hi3 = min(lat.N, st + 2 * width)
        f_loc = np.zeros(lat.N, dtype=np.complex128)
        f_loc[lo3:hi3] = f.values[lo3:hi3]
        favg = float(np.mean(np.abs(f_loc[lo3:hi3]) ** r) ** (1.0 / r))
        if favg == 0.0:
            return
        mt, mr = _local_maxes(a, f_loc, lat, slice(st, st + width), r)
        kap = kappa
        for _ in range(40):
            exceptional = (mt > kap * favg) | (mr > kap * favg)
            if exceptional.mean() <= 0.25:
                break
            kap *= 2.0
        kappa_max = max(kappa_max, kap)
        if not exceptional.any():
            return
        # maximal dyadic subcubes holding more than half their cells of E;
        # stop at the 8-cell lattice floor
        def cover(kk: int, mm: int):
            w = 2 ** (kk - k_cell)
            s = mm * w - st
            frac = exceptional[s:s + w].mean()
            if frac == 0.0:
                return
            if frac > 0.5:
                process(kk, mm, depth + 1)
                return
            if w <= 8:
                return
            cover(kk - 1, 2 * mm)
            cover(kk - 1, 2 * mm + 1)

        cover(k - 1, 2 * m)
        cover(k - 1, 2 * m + 1)

    process(k_root, 0, 0)
    family = CubeFamily(selected)
    coll = certify_sparse(family, eta)
    if not isinstance(coll, SparseCollection):
        raise AssertionError(f"stopping family failed sparseness: best eta {coll.best_eta}")
    A = sparse_operator(coll, f, r)
    Avals = A.values.real
    mask = Avals > 0
    ratio = float(np.max(np.abs(Tf.values[mask]) / Avals[mask])) if mask.any() else 0.0
    return PointwiseResult(coll, ratio, kappa_max, truncated, Tf.values, Avals)


# ---------------------------------------------------------------------------
# weak type report
# ---------------------------------------------------------------------------

@dataclass
class WeakTypeReport:
    weak_constant: float
    majorant_constant: float
    bigcube_constant: float
    operator_norm_s: float
    p_used: float
    s_used: float


def grand_maximal_weak_type(a: Symbol, r: float, trial_fns: list[GridFunction],
                            big_side: Optional[float] = None) -> WeakTypeReport:
    """Empirical weak-(r,r) constant of the grand maximal function plus the
    four-term pointwise majorant constant

        M_T f <= C (M f + M_p f + M_s(T_a f) + ||T_a||_s M_s f),

    with p close to 1 as dictated by the symbol's regularity and 1 < s < r.
    Also checks the large-cube regime (sidelength above ``big_side``, default
    L/16) against the plain maximal function alone.
    """
    if r <= 1:
        raise ValueError("need r > 1")
    if not trial_fns:
        raise ValueError("need at least one trial function")
    lat = trial_fns[0].lattice
    rho = a.params.rho
    p = 1.0 + (1.0 - rho) / 4.0
    s = 1.0 + (r - 1.0) / 2.0
    big = lat.L / 16.0 if big_side is None else big_side
    mult = np.abs(np.asarray(a.xi_part(lat.xi_axis())))
    norm2 = float(mult.max())
    kern = np.fft.ifft(np.asarray(a.xi_part(lat.xi_axis()), dtype=complex)) / lat.dx
    norm1 = float(np.sum(np.abs(kern)) * lat.dx)
    if not a.x_independent:
        xmax = float(np.max(np.abs(a.x_part(lat.x_axis()))))
        norm2 *= xmax
        norm1 *= xmax
    norm_s = max(norm1, norm2)

    weak_c = 0.0
    maj_c = 0.0
    big_c = 0.0
    for f in trial_fns:
        mtf = grand_maximal(a, f).values.real
        weak_c = max(weak_c, weak_type_constant(mtf, lat, r, lp_norm(f, r)))
        absf = np.abs(f.values)
        mf = hl_max(absf, lat)
        mpf = hl_max(absf**p, lat) ** (1.0 / p)
        tf = apply_T(a, f).values
        mstf = hl_max(np.abs(tf) ** s, lat) ** (1.0 / s)
        msf = hl_max(absf**s, lat) ** (1.0 / s)
        majorant = mf + mpf + mstf + norm_s * msf
        pos = majorant > 1e-14 * majorant.max()
        if pos.any():
            maj_c = max(maj_c, float(np.max(mtf[pos] / majorant[pos])))
        mtf_big = grand_maximal(a, f, min_side=big).values.real
        posb = mf > 1e-14 * mf.max()
        if posb.any():
            big_c = max(big_c, float(np.max(mtf_big[posb] / mf[posb])))
    return WeakTypeReport(weak_c, maj_c, big_c, norm_s, p, s)
