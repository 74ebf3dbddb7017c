"""Bilinear sparse forms, the exponent trapezoid, the checkerboard sparse
constructor, and the domination / sharpness experiments.

Exponent pairs live in the ``(1/r, 1/s')`` plane.  The admissible region for a
symbol of order ``m`` and regularity ``rho`` in dimension ``n`` is the union of
two constraint systems (and their swaps under exchanging the roles of the two
form exponents):

    A:  1 <= r <= s <= 2        and  m < -n(1-rho)(1/r - 1/2),
    B:  1 <= r <= 2 <= s <= r'  and  m < -n(1-rho)(1/r - 1/s).

Range constraints are closed, the order constraints are open; the ``margin``
knob pushes test points away from the open boundary (where the domination
constant blows up) by a fixed amount in ``(1/r, 1/s')`` units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .dyadic import (CubeFamily, DyadicCube, GridShift, SparseCollection,
                     ancestor_index, carleson_constant, certify_sparse)
from .func import GridFunction, Lattice, inner, local_average, lp_norm
from .pdo import DecompParams, OperatorMatrix, apply_T, default_cutoff, spatial_piece
from .symbol import Symbol, model_bessel, model_oscillatory

__all__ = [
    "ExponentPair",
    "Region",
    "region_vertices",
    "in_region",
    "in_closed_region",
    "admissible_pair",
    "sparse_form",
    "SparseFormResult",
    "sparse_operator",
    "sparse_from_decaying",
    "DecayingCertificate",
    "domain_tiling",
    "dominate",
    "DominateResult",
    "sharpness_probe",
    "SharpnessPoint",
    "best_single_cube",
    "make_test_function",
]


def _frac_exact(x) -> Fraction:
    """Exact conversion (floats taken at their binary value)."""
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class ExponentPair:
    """The pair (r, s') indexing a bilinear sparse form; s' is the dual of s."""

    r: float
    s_prime: float

    def __post_init__(self):
        if not (self.r >= 1 and self.s_prime >= 1):
            raise ValueError("exponents must be >= 1")

    @property
    def u(self) -> float:
        return 0.0 if self.r == math.inf else 1.0 / self.r

    @property
    def v(self) -> float:
        return 0.0 if self.s_prime == math.inf else 1.0 / self.s_prime

    @property
    def s(self) -> float:
        if self.s_prime == 1:
            return math.inf
        if self.s_prime == math.inf:
            return 1.0
        return self.s_prime / (self.s_prime - 1.0)


@dataclass
class Region:
    m: Fraction
    rho: Fraction
    n: int
    vertices: list[tuple[Fraction, Fraction]]
    case: int


def region_vertices(m, rho, n: int) -> Region:
    """Vertices of the admissible trapezoid, exactly, in the (1/r, 1/s') plane.

    Case 1 (``m <= -n(1-rho)/2``): (1,0), (1,c), (c,1), (0,1) with
    ``c = -m/(n(1-rho))``.  Case 2 (``-n(1-rho)/2 < m < 0``): the inner
    trapezoid with corners on the duality line at ``(1/2 +- c, 1/2 -+ c)``.
    """
    m = _frac_exact(m)
    rho = _frac_exact(rho)
    if m >= 0:
        raise ValueError("order m must be negative")
    if not (0 <= rho < 1):
        raise ValueError("rho must lie in [0, 1)")
    half = Fraction(1, 2)
    c = -m / (n * (1 - rho))
    if m <= -n * (1 - rho) * half:
        verts = [(Fraction(1), Fraction(0)), (Fraction(1), c), (c, Fraction(1)), (Fraction(0), Fraction(1))]
        case = 1
    else:
        verts = [(half + c, half - c), (half + c, half), (half, half + c), (half - c, half + c)]
        case = 2
    return Region(m, rho, n, verts, case)


def _system_holds(u: Fraction, v: Fraction, m: Fraction, coeff: Fraction,
                  margin: Fraction, closed: bool) -> bool:
    """One-sided constraint systems at the point (u, v) = (1/r, 1/s').

    ``coeff = n(1-rho)``.  Range constraints are closed; the order constraint
    is strict unless ``closed`` (then the closure is tested), with ``margin``
    subtracted from the admissible extent in coordinate units.
    """
    one, half = Fraction(1), Fraction(1, 2)

    def order_ok(excess: Fraction) -> bool:
        # requires m < -coeff * excess (strict), with margin slack in (u,v) units
        lhs = m + coeff * (excess + margin)
        return lhs <= 0 if closed else lhs < 0

    # A: 1 <= r <= s <= 2
    if u <= one and v <= half and u + v >= one:
        if order_ok(u - half):
            return True
    # B: 1 <= r <= 2 <= s <= r'
    if half <= u <= one and v >= half and v <= u:
        if order_ok(u + v - one):
            return True
    return False


def admissible_pair(pt: ExponentPair, m, coeff, margin=0, closed: bool = False) -> bool:
    """Both constraint systems and their swaps, for order ``m`` and boundary
    coefficient ``coeff`` (``n(1-rho)`` for symbols, ``n|alpha|`` for
    oscillatory multipliers).  Exact on rational inputs."""
    u, v = _frac_exact(pt.u), _frac_exact(pt.v)
    m, coeff, mg = _frac_exact(m), _frac_exact(coeff), _frac_exact(margin)
    return (_system_holds(u, v, m, coeff, mg, closed)
            or _system_holds(v, u, m, coeff, mg, closed))


def in_region(pt: ExponentPair, R: Region, margin: float = 0.0) -> bool:
    """Membership in the open admissible region (with margin), including the
    dual-swapped systems."""
    if margin < 0:
        raise ValueError("margin must be >= 0")
    return admissible_pair(pt, R.m, R.n * (1 - R.rho), margin, closed=False)


def in_closed_region(pt: ExponentPair, R: Region) -> bool:
    return admissible_pair(pt, R.m, R.n * (1 - R.rho), 0, closed=True)


# ---------------------------------------------------------------------------
# sparse forms and operators
# ---------------------------------------------------------------------------

def _cube_measure(Q: DyadicCube, lat: Lattice) -> float:
    return Q.cell_count(lat) * lat.cell_volume


@dataclass
class SparseFormResult:
    value: float
    collection: SparseCollection
    terms: dict[DyadicCube, float] = field(repr=False)


def sparse_form(S: SparseCollection, f: GridFunction, g: GridFunction,
                r: float, s_prime: float) -> SparseFormResult:
    """``sum_Q |Q| <f>_{r,Q} <g>_{s',Q}`` over the collection, cell quadrature."""
    if r < 1 or s_prime < 1:
        raise ValueError("form exponents must be >= 1")
    terms = {}
    for Q in S.family:
        mq = _cube_measure(Q, f.lattice)
        if mq == 0.0:
            raise ValueError(f"cube {Q} lies outside the sampled domain")
        terms[Q] = mq * local_average(f, Q, r) * local_average(g, Q, s_prime)
    return SparseFormResult(float(sum(terms.values())), S, terms)


def sparse_operator(S: SparseCollection, f: GridFunction, r: float) -> GridFunction:
    """``sum_Q <f>_{r,Q} chi_Q``."""
    out = np.zeros(f.lattice.shape(), dtype=np.float64)
    for Q in S.family:
        idx = Q.cells(f.lattice)
        if idx[0].size == 0:
            continue
        out[idx] += local_average(f, Q, r)
    return GridFunction(f.lattice, out)


# ---------------------------------------------------------------------------
# checkerboard constructor
# ---------------------------------------------------------------------------

@dataclass
class DecayingCertificate:
    weighted_sum: float
    form_value: float
    C_empirical: float
    C_bound: float
    levels: list[tuple[int, int, float]]  # (level, scale, weight)


def sparse_from_decaying(scale_families: dict[int, CubeFamily], weights: dict[int, float],
                         f: GridFunction, g: GridFunction, r: float, s_prime: float,
                         eta: float = 0.45) -> tuple[SparseCollection, DecayingCertificate]:
    """Checkerboard selection collapsing a weighted stack of tilings to one
    sparse collection.

    Input levels (keys in ascending order) must be disjoint tilings at strictly
    decreasing scales with geometrically decaying weights.  Level ``t`` keeps
    one cube per ancestor ``t`` dyadic generations up, the one maximizing
    ``<f>_r <g>_{s'}`` (ties: smallest index), giving selection density
    ``2^{-tn}`` and hence Carleson constant at most 2 in 1-D.  The certified
    domination constant satisfies ``C <= max_t weight_t 2^{tn} / weight_0``
    after normalizing; both the empirical and the a-priori constant are
    reported.
    """
    levels = sorted(scale_families)
    if not levels:
        raise ValueError("no levels given")
    prev_w = None
    prev_scale = None
    for t in levels:
        fam = scale_families[t]
        if len(fam) == 0:
            raise ValueError(f"level {t} family is empty")
        scales = {q.k for q in fam}
        if len(scales) != 1:
            raise ValueError(f"level {t} is not a single-scale tiling")
        scale = scales.pop()
        if prev_scale is not None and scale >= prev_scale:
            raise ValueError("levels must have strictly decreasing scales")
        prev_scale = scale
        w = weights[t]
        if w <= 0:
            raise ValueError("weights must be positive")
        if prev_w is not None and w >= prev_w:
            raise ValueError("non-decaying weights")
        prev_w = w
    shift = scale_families[levels[0]].cubes[0].shift
    n = shift.n

    selected: list[DyadicCube] = []
    weighted_sum = 0.0
    levels_out = []
    avg_cache: dict[DyadicCube, float] = {}

    def term(Q: DyadicCube) -> float:
        if Q not in avg_cache:
            mq = _cube_measure(Q, f.lattice)
            avg_cache[Q] = mq * local_average(f, Q, r) * local_average(g, Q, s_prime) if mq else 0.0
        return avg_cache[Q]

    for t_pos, t in enumerate(levels):
        fam = scale_families[t]
        scale = fam.cubes[0].k
        w = weights[t]
        levels_out.append((t, scale, w))
        weighted_sum += w * sum(term(Q) for Q in fam)
        groups: dict[tuple, list[DyadicCube]] = {}
        for Q in fam:
            groups.setdefault(ancestor_index(Q, scale + t_pos), []).append(Q)
        for _, members in sorted(groups.items()):
            best = max(sorted(members, key=lambda q: q.m), key=term)
            selected.append(best)

    S_family = CubeFamily(selected)
    res = certify_sparse(S_family, eta)
    if not isinstance(res, SparseCollection):
        raise AssertionError(f"checkerboard output failed sparseness at eta={eta}: best {res.best_eta}")
    form = sparse_form(res, f, g, r, s_prime)
    w0 = weights[levels[0]]
    c_bound = max(weights[t] * 2.0 ** (t_pos * n) for t_pos, t in enumerate(levels)) / w0
    c_emp = weighted_sum / form.value if form.value > 0 else 0.0
    cert = DecayingCertificate(weighted_sum, form.value, c_emp, c_bound, levels_out)
    return res, cert


def domain_tiling(lat: Lattice, k: int, shift: GridShift) -> CubeFamily:
    """All cubes of ``D_shift`` at scale ``k`` meeting the sampled domain."""
    side = Fraction(2) ** k
    cubes = []
    sgn = -1 if k % 2 else 1
    ranges = []
    for i in range(lat.n):
        off = Fraction(sgn * shift.v[i], 3)
        m_lo = math.floor(Fraction(0) / side - off)
        m_hi = math.ceil(Fraction(lat.L) / side - off)
        ranges.append(range(m_lo, m_hi))
    if lat.n == 1:
        for m0 in ranges[0]:
            q = DyadicCube(shift, k, (m0,))
            if q.cells(lat)[0].size:
                cubes.append(q)
    else:
        for m0 in ranges[0]:
            for m1 in ranges[1]:
                q = DyadicCube(shift, k, (m0, m1))
                if q.cells(lat)[0].size:
                    cubes.append(q)
    return CubeFamily(cubes)


# ---------------------------------------------------------------------------
# domination experiment
# ---------------------------------------------------------------------------

def make_test_function(lat: Lattice, rng: np.random.Generator,
                       max_modulation: float = 12.0) -> GridFunction:
    """Seeded bump-modulated Gaussian, compactly supported to 1e-12.

    The modulation cap is an absolute frequency (not lattice-relative) so a
    fixed seed draws the same physical function on every refinement.
    """
    c = lat.L * rng.uniform(0.38, 0.62)
    sigma = lat.L * rng.uniform(0.015, 0.04)
    omega = rng.uniform(0, max_modulation)
    phase = rng.uniform(0, 2 * math.pi)
    xs = lat.x_mesh()
    r2 = sum((x - c) ** 2 for x in xs)
    vals = np.exp(-r2 / (2 * sigma**2)) * np.exp(1j * (omega * xs[0] + phase))
    vals = np.where(np.abs(vals) < 1e-12, 0.0, vals)
    return GridFunction(lat, vals)


def _theta_exponent(m: float, rho: float, n: int, pt: ExponentPair, eps: float) -> float:
    """log2 per-j weight of the stacked tiling sums, from the two branch bounds."""
    u, v = pt.u, pt.v
    inv_s = 1.0 - v
    gap = u - inv_s  # 1/r - 1/s
    if pt.s <= 2.0:
        return m + n * gap * (1.0 - rho + eps) + (n * (1.0 - rho) / 2.0) * (2.0 * inv_s - 1.0)
    return m + n * gap * (1.0 - rho + eps)


@dataclass
class DominateResult:
    pairing: float
    sparse_value: float
    ratio: float
    collection: SparseCollection
    certificate: DecayingCertificate
    carleson: float
    in_region: bool


def dominate(a: Symbol, f: GridFunction, g: GridFunction, pt: ExponentPair,
             params: DecompParams, shift: GridShift | None = None,
             margin: float = 0.02, eta: float = 0.45) -> DominateResult:
    """Full-operator pairing against the checkerboard sparse form.

    Builds per-scale tilings at sidelength ``2^(floor(j(eps - rho)) + offset)``
    (offset lattice-adapted so the smallest cubes hold >= 8 cells per axis),
    adds coarser tail scales with their own decaying weights, merges levels
    that land on one scale, pads weights up to a strictly decreasing envelope
    (padding only weakens the certificate, never the domination), and reports
    ``|<T_a f, g>| / Lambda_S(f, g)``.
    """
    lat = f.lattice
    m, rho, n = a.params.m, a.params.rho, lat.n
    R = region_vertices(m, rho, n)
    pt_inside = in_region(pt, R, margin)

    pairing = abs(inner(apply_T(a, f), g))

    k_root = round(math.log2(lat.L))
    if abs(2.0**k_root - lat.L) > 1e-9:
        raise ValueError("domain length must be a power of two for dyadic tilings")
    eps = params.epsilon
    raw = [math.floor(j * (eps - rho)) for j in range(params.j_max + 1)]
    if params.l_offset is not None:
        off = params.l_offset
    else:
        off = math.ceil(math.log2(8 * lat.dx)) - min(raw)
    theta = min(_theta_exponent(m, rho, n, pt, eps), -0.05)

    scale_w: dict[int, float] = {}
    for j in range(params.j_max + 1):
        k = min(raw[j] + off, k_root)
        scale_w[k] = scale_w.get(k, 0.0) + 2.0 ** (theta * j)
        # tail pieces (l > j*eps) live on all coarser scales up to the domain
        for dl in range(1, k_root - k + 1):
            scale_w[k + dl] = scale_w.get(k + dl, 0.0) + 2.0 ** (theta * j - dl)

    scales = sorted(scale_w, reverse=True)
    suffix_max = [0.0] * len(scales)
    acc = 0.0
    for t in range(len(scales) - 1, -1, -1):
        acc = max(acc, scale_w[scales[t]])
        suffix_max[t] = acc
    weights: dict[int, float] = {}
    families: dict[int, CubeFamily] = {}
    sh = shift or GridShift((0,) * n)
    for t, k in enumerate(scales):
        weights[t] = suffix_max[t] * (1 + 1e-6) ** (len(scales) - t)
        families[t] = domain_tiling(lat, k, sh)

    S, cert = sparse_from_decaying(families, weights, f, g, pt.r, pt.s_prime, eta=eta)
    form = sparse_form(S, f, g, pt.r, pt.s_prime)
    if form.value > 0:
        ratio = pairing / form.value
    else:
        ratio = 0.0 if pairing == 0 else math.inf
    return DominateResult(pairing, form.value, ratio, S, cert,
                          float(carleson_constant(S.family)), pt_inside)


# ---------------------------------------------------------------------------
# sharpness probe
# ---------------------------------------------------------------------------

class _RestrictedOp:
    """chi_A T chi_B as an apply/adjoint pair for the norm iteration."""

    def __init__(self, op: OperatorMatrix, mask_in: np.ndarray, mask_out: np.ndarray):
        self.op = op
        self.mask_in = mask_in
        self.mask_out = mask_out
        self.lattice = op.lattice

    def apply_values(self, v):
        return self.mask_out * self.op.apply_values(self.mask_in * v)

    def apply_adjoint_values(self, v):
        return self.mask_in * self.op.apply_adjoint_values(self.mask_out * v)


def _restricted_norm_lower(op: _RestrictedOp, r: float, s: float, seed: int,
                           restarts: int = 3, iters: int = 40) -> tuple[float, np.ndarray]:
    """Certified lower bound for the restricted L^r -> L^s norm plus the
    extremizing input (dual-exponent power iteration with a bump seed)."""
    lat = op.lattice
    cell = lat.cell_volume
    rng = np.random.default_rng(seed)
    rp = math.inf if r == 1.0 else r / (r - 1.0)

    def norm(v, p):
        a = np.abs(v)
        return float(a.max()) if p == math.inf else float((np.sum(a**p) * cell) ** (1 / p))

    best_ratio, best_f = 0.0, None
    starts = [op.mask_in.astype(np.complex128)]
    for _ in range(restarts):
        starts.append(op.mask_in * (rng.standard_normal(lat.shape()) + 1j * rng.standard_normal(lat.shape())))
    for v0 in starts:
        nv = norm(v0, r)
        if nv == 0:
            continue
        v = v0 / nv
        for _ in range(iters):
            gv = op.apply_values(v)
            ng = norm(gv, s)
            if ng == 0:
                break
            if s == math.inf:
                h = np.zeros_like(gv)
                iarg = np.unravel_index(np.argmax(np.abs(gv)), gv.shape)
                h[iarg] = np.exp(1j * np.angle(gv[iarg]))
            else:
                h = np.abs(gv) ** (s - 1.0) * np.exp(1j * np.angle(gv))
            b = op.apply_adjoint_values(h)
            if rp == math.inf:
                w = np.zeros_like(b)
                iarg = np.unravel_index(np.argmax(np.abs(b)), b.shape)
                w[iarg] = np.exp(1j * np.angle(b[iarg]))
            else:
                w = np.abs(b) ** (rp - 1.0) * np.exp(1j * np.angle(b))
            nw = norm(w, r)
            if nw == 0:
                break
            v = w / nw
        ratio = norm(op.apply_values(v), s)
        if ratio > best_ratio:
            best_ratio, best_f = ratio, v
    return best_ratio, best_f


def best_single_cube(f: GridFunction, g: GridFunction, r: float, s_prime: float,
                     support_lo: float, support_hi: float) -> tuple[float, DyadicCube]:
    """Largest single-cube form value over shifted dyadic cubes containing
    ``[support_lo, support_hi]`` (1-D), scales up to one above the domain."""
    lat = f.lattice
    k_root = round(math.log2(lat.L))
    diam = support_hi - support_lo
    k_lo = math.ceil(math.log2(max(diam, 2 * lat.dx)))
    best_val, best_cube = -1.0, None
    for k in range(k_lo, k_root + 2):
        side = Fraction(2) ** k
        sgn = -1 if k % 2 else 1
        for v in (0, 1, 2):
            off = Fraction(sgn * v, 3)
            mi = math.floor(Fraction(support_lo) / side - off)
            q = DyadicCube(GridShift((v,)), k, (mi,))
            if q.lo(0) <= Fraction(support_lo) and Fraction(support_hi) <= q.hi(0):
                if q.cells(lat)[0].size == 0:
                    continue
                val = _cube_measure(q, lat) * local_average(f, q, r) * local_average(g, q, s_prime)
                if val > best_val:
                    best_val, best_cube = val, q
    if best_cube is None:
        raise RuntimeError("no admissible single cube found")
    return best_val, best_cube


@dataclass
class SharpnessPoint:
    j: int
    l: int
    pairing: float
    single_cube: float
    ratio: float


def sharpness_probe(m: float, rho: float, n: int, pt: ExponentPair,
                    j_list: list[int], lat: Lattice,
                    params: Optional[DecompParams] = None,
                    seed: int = 0) -> list[SharpnessPoint]:
    """Lower-bound ratios outside the admissible region.

    For each ``j``: take the branch's model symbol (oscillatory for
    ``s <= 2``, smooth-decay otherwise), restrict ``T^{j,l}`` to inputs on a
    small ball and outputs on the separated annulus at the window scale, run
    the dual-exponent iteration for a certified ``L^r -> L^s`` lower bound,
    pair its extremizer against the exact dual function on the annulus, and
    divide by the best single-cube sparse form containing both supports.
    ``l`` scans a short window around the critical scale and the best ratio
    is reported.
    """
    if n != 1:
        raise NotImplementedError("sharpness probe implemented for n = 1")
    R = region_vertices(m, rho, n)
    if in_closed_region(pt, R):
        raise ValueError("probe requires exterior point")
    params = params or DecompParams(j_max=max(j_list))
    eps = params.epsilon
    r, s, s_prime = pt.r, pt.s, pt.s_prime
    branch_osc = s <= 2.0
    a = model_oscillatory(m, rho, chi_width=lat.dxi) if branch_osc else model_bessel(m)
    rho_eff = a.params.rho
    cut = default_cutoff()
    xc = lat.L / 2
    x = lat.x_axis()
    dist = np.abs(np.where(x - xc > lat.L / 2, x - xc - lat.L,
                           np.where(x - xc < -lat.L / 2, x - xc + lat.L, x - xc)))

    out = []
    for j in j_list:
        best = None
        l_c = math.ceil(j * eps)
        for l in range(-l_c - 1, l_c + 2):
            scale = 2.0 ** (l - j * rho_eff)
            if scale < 4 * lat.dx or scale > lat.L / 4:
                continue
            op = spatial_piece(a, j, l, lat, cut)
            rf = scale / 16.0
            mask_in = (dist <= rf).astype(np.float64)
            mask_out = ((dist >= scale / 2) & (dist <= 2 * scale)).astype(np.float64)
            if mask_in.sum() < 2 or mask_out.sum() < 2:
                continue
            rop = _RestrictedOp(op, mask_in, mask_out)
            norm_low, fvals = _restricted_norm_lower(rop, r, s, seed + 131 * j + l)
            if fvals is None or norm_low == 0.0:
                continue
            fj = GridFunction(lat, fvals * mask_in)
            Tf = rop.apply_values(fvals)
            if s == math.inf:
                gv = np.zeros_like(Tf)
                iarg = np.argmax(np.abs(Tf))
                gv[iarg] = np.exp(1j * np.angle(Tf[iarg]))
            else:
                gv = np.abs(Tf) ** (s - 1.0) * np.exp(1j * np.angle(Tf))
            gj = GridFunction(lat, gv * mask_out)
            ns = lp_norm(gj, s_prime)
            if ns == 0:
                continue
            gj = GridFunction(lat, gj.values / ns)
            pairing = abs(inner(GridFunction(lat, Tf), gj))
            lo = float(xc - 2 * scale)
            hi = float(xc + 2 * scale)
            denom, _ = best_single_cube(fj, gj, r, s_prime, lo, hi)
            ratio = pairing / denom if denom > 0 else math.inf
            cand = SharpnessPoint(j, l, pairing, denom, ratio)
            if best is None or cand.ratio > best.ratio:
                best = cand
        if best is None:
            raise ValueError(f"no representable window scale at j={j}")
        out.append(best)
    return out
