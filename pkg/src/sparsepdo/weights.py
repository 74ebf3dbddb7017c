"""Muckenhoupt and reverse Hoelder characteristics and the weighted
consequences of sparse domination.

Ball suprema are replaced by exhaustive scans over the three shifted dyadic
grids intersected with the domain (scales from one cell to the full torus);
the balls-versus-cubes discrepancy is a dimensional constant absorbed into
every recorded characteristic.  On a finite lattice every supremum is finite,
so class membership is detected by stability of the characteristic under
lattice refinement rather than by literal finiteness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
import numpy as np

from .func import GridFunction, Lattice, lp_norm
from .maximal import MaximalKind, hl_max, maximal
from .pdo import apply_T
from .sparse import SparseCollection, sparse_form
from .symbol import Symbol

__all__ = [
    "Weight",
    "WeightCharacteristics",
    "ap_characteristic",
    "rh_characteristic",
    "ap_rh_equivalence_check",
    "EquivalenceReport",
    "weighted_sparse_bound_check",
    "WeightedBoundResult",
    "corollary_endpoints",
    "fefferman_stein_check",
    "coifman_fefferman_check",
    "weak_type_11_check",
    "weight_preset",
]


@dataclass
class Weight:
    w: GridFunction

    def __post_init__(self):
        vals = self.w.values.real
        if np.any(vals < 0) or np.any(np.abs(self.w.values.imag) > 0):
            raise ValueError("weights must be nonnegative real")
        if not np.any(vals > 0):
            raise ValueError("weight is identically zero")

    @property
    def values(self) -> np.ndarray:
        return self.w.values.real

    @property
    def lattice(self) -> Lattice:
        return self.w.lattice


@dataclass
class WeightCharacteristics:
    p: float
    ap: float
    rh: dict[float, float]


def _scan_cubes(lat: Lattice, arrays: list[np.ndarray], reduce_fn) -> float:
    """Exhaustive scan over three-shift dyadic cubes: ``reduce_fn`` maps the
    tuple of per-cube averages (one per input array) to a number; the max over
    all cubes is returned."""
    k_cell = round(math.log2(lat.dx))
    k_root = math.ceil(math.log2(lat.L))
    best = -math.inf
    axes = lat.x_axis()
    for k in range(k_cell, k_root + 1):
        side = 2.0**k
        sgn = -1 if k % 2 else 1
        for v in (0, 1, 2) if lat.n == 1 else [0]:
            offs = [sgn * v / 3.0] * lat.n if lat.n == 1 else None
            if lat.n == 1:
                qid = np.floor(axes / side - offs[0]).astype(np.int64)
                qid -= qid.min()
                nq = qid.max() + 1
                counts = np.bincount(qid, minlength=nq)
                avgs = [np.bincount(qid, weights=arr, minlength=nq) / counts for arr in arrays]
                vals = reduce_fn(*avgs)
                best = max(best, float(np.max(vals)))
            else:
                for v2 in (0, 1, 2):
                    q0 = np.floor(axes / side - sgn * v / 3.0).astype(np.int64)
                    q1 = np.floor(axes / side - sgn * v2 / 3.0).astype(np.int64)
                    q0 -= q0.min()
                    q1 -= q1.min()
                    w_ = q1.max() + 1
                    qid = (q0[:, None] * w_ + q1[None, :]).ravel()
                    nq = qid.max() + 1
                    counts = np.bincount(qid, minlength=nq)
                    avgs = [np.bincount(qid, weights=arr.ravel(), minlength=nq) / counts for arr in arrays]
                    vals = reduce_fn(*avgs)
                    best = max(best, float(np.max(vals)))
    return best


def ap_characteristic(w: Weight, p: float) -> float:
    """``[w]_{A_p}`` as an exact supremum over the scanned cube family.

    ``p = 1`` uses the maximal-function characterization ``sup Mw / w``.
    Cubes where the dual average diverges (w vanishing somewhere, p > 1)
    contribute infinity.
    """
    if p < 1:
        raise ValueError("need p >= 1")
    lat = w.lattice
    vals = w.values
    if p == 1.0:
        mw = hl_max(vals, lat)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(vals > 0, mw / vals, math.inf)
        return float(np.max(ratio))
    pp = p / (p - 1.0)
    with np.errstate(divide="ignore"):
        dual = np.where(vals > 0, vals ** (1.0 - pp), math.inf)

    def reduce_fn(avg_w, avg_dual):
        with np.errstate(invalid="ignore", over="ignore"):
            return avg_w * avg_dual ** (p - 1.0)

    return _scan_cubes(lat, [vals, dual], reduce_fn)


def rh_characteristic(w: Weight, q: float) -> float:
    """``[w]_{RH_q} = sup <w>_{q,Q} / <w>_Q``; exactly 1 at q = 1."""
    if q < 1:
        raise ValueError("need q >= 1")
    if q == 1.0:
        return 1.0
    lat = w.lattice
    vals = w.values

    def reduce_fn(avg_w, avg_wq):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(avg_w > 0, avg_wq ** (1.0 / q) / avg_w, 1.0)

    return _scan_cubes(lat, [vals, vals**q], reduce_fn)


@dataclass
class EquivalenceReport:
    lhs_ap: float
    lhs_rh: float
    rhs_ap: float
    lhs_holds: bool
    rhs_holds: bool
    exponents: tuple[float, float, float]  # (p/r, (s/p)', rhs index)


def ap_rh_equivalence_check(w: Weight, p: float, r: float, s: float,
                            cap: float = 1e8) -> EquivalenceReport:
    """Both sides of the weight-class equivalence
    ``w in A_{p/r} cap RH_{(s/p)'}  <=>  w^{(s/p)'} in A_{(s/p)'(p/r-1)+1}``,
    with finiteness thresholded at ``cap`` on this lattice.  Lattice-refinement
    stability (the sharper finiteness test) is layered on top by the caller.
    """
    if not (r < p < s):
        raise ValueError("need r < p < s")
    q1 = p / r
    sp = (s / p) / (s / p - 1.0)  # (s/p)'
    lhs_ap = ap_characteristic(w, q1)
    lhs_rh = rh_characteristic(w, sp)
    rhs_index = sp * (q1 - 1.0) + 1.0
    w_pow = Weight(GridFunction(w.lattice, w.values**sp))
    rhs_ap = ap_characteristic(w_pow, rhs_index)
    return EquivalenceReport(lhs_ap, lhs_rh, rhs_ap,
                             lhs_holds=(lhs_ap < cap and lhs_rh < cap),
                             rhs_holds=(rhs_ap < cap),
                             exponents=(q1, sp, rhs_index))


@dataclass
class WeightedBoundResult:
    lhs: float
    rhs: float
    ratio: float
    alpha: float
    ap: float
    rh: float


def weighted_sparse_bound_check(S: SparseCollection, f: GridFunction, g: GridFunction,
                                w: Weight, r: float, s: float, p: float) -> WeightedBoundResult:
    """Compare the sparse form against the weighted bound

        Lambda_{S,r,s'}(f,g) <= C ([w]_{A_{p/r}} [w]_{RH_{(s/p)'}})^alpha
                                 ||f||_{L^p(w)} ||g||_{L^{p'}(w^{1-p'})},

    ``alpha = max(1/(p-r), (s-1)/(s-p))``; returns both sides and their ratio.
    """
    if not (r < p < s):
        raise ValueError("need r < p < s")
    s_prime = s / (s - 1.0)
    form = sparse_form(S, f, g, r, s_prime)
    alpha = max(1.0 / (p - r), (s - 1.0) / (s - p))
    ap = ap_characteristic(w, p / r)
    rh = rh_characteristic(w, (s / p) / (s / p - 1.0))
    if not (math.isfinite(ap) and math.isfinite(rh)):
        raise ValueError("infinite weight characteristic")
    lat = f.lattice
    pp = p / (p - 1.0)
    norm_f = float((np.sum(np.abs(f.values) ** p * w.values) * lat.cell_volume) ** (1.0 / p))
    dual_w = np.where(w.values > 0, w.values ** (1.0 - pp), 0.0)
    norm_g = float((np.sum(np.abs(g.values) ** pp * dual_w) * lat.cell_volume) ** (1.0 / pp))
    rhs = (ap * rh) ** alpha * norm_f * norm_g
    ratio = form.value / rhs if rhs > 0 else math.inf
    return WeightedBoundResult(form.value, rhs, ratio, alpha, ap, rh)


def corollary_endpoints(m, rho, n: int):
    """Endpoint exponents of the weighted corollary, exactly.

    Returns ``("r_e", -n(1-rho)/m)`` when ``-n(1-rho) <= m <= -n(1-rho)/2``
    (``r_e = 1`` at the left end, the full A_p range case) and
    ``("s_e", 2n(1-rho)/(n(1-rho)+2m))`` when ``-n(1-rho)/2 < m < 0``.
    """
    m = Fraction(m) if not isinstance(m, Fraction) else m
    rho = Fraction(rho) if not isinstance(rho, Fraction) else rho
    c = n * (1 - rho)
    if not (-c <= m < 0):
        raise ValueError("order outside (-n(1-rho), 0)")
    if m <= -c / 2:
        return ("r_e", -c / m)
    return ("s_e", 2 * c / (c + 2 * m))


def fefferman_stein_check(a: Symbol, f: GridFunction, w: Weight, p: float,
                          controller: tuple[str, float]) -> float:
    """Ratio of ``int |T_a f|^p w`` to ``int |f|^p (M w)`` with the controlling
    maximal operator ``M = M_gamma`` (``("gamma", g)``) or the iterated
    composition ``M^(floor(p)+1)`` (``("iterated", 0)``)."""
    lat = f.lattice
    kind, val = controller
    if kind == "gamma":
        mw = maximal(w.w, MaximalKind("power_gamma", gamma=val)).values.real
    elif kind == "iterated":
        mw = maximal(w.w, MaximalKind("iterated", iterations=int(math.floor(p)) + 1)).values.real
    else:
        raise ValueError("controller must be ('gamma', g) or ('iterated', _)")
    tf = apply_T(a, f).values
    lhs = float(np.sum(np.abs(tf) ** p * w.values) * lat.cell_volume)
    rhs = float(np.sum(np.abs(f.values) ** p * mw) * lat.cell_volume)
    return lhs / rhs if rhs > 0 else math.inf


def coifman_fefferman_check(a: Symbol, f: GridFunction, w: Weight, p: float) -> float:
    """``||T_a f||_{L^p(w)} / ||M f||_{L^p(w)}`` for symbols at the order
    ``-n(1-rho)`` endpoint (caller's responsibility) and A_infinity weights."""
    lat = f.lattice
    tf = apply_T(a, f).values
    mf = hl_max(np.abs(f.values), lat)
    lhs = float((np.sum(np.abs(tf) ** p * w.values) * lat.cell_volume) ** (1.0 / p))
    rhs = float((np.sum(mf**p * w.values) * lat.cell_volume) ** (1.0 / p))
    return lhs / rhs if rhs > 0 else math.inf


def weak_type_11_check(a: Symbol, f: GridFunction) -> float:
    """Empirical weak (1,1) constant ``sup_t t |{|T_a f| > t}| / ||f||_1``."""
    lat = f.lattice
    tf = np.sort(np.abs(apply_T(a, f).values).ravel())[::-1]
    counts = np.arange(1, tf.size + 1) * lat.cell_volume
    n1 = lp_norm(f, 1)
    return float(np.max(tf * counts) / n1) if n1 > 0 else 0.0


def weight_preset(lat: Lattice, spec: str) -> Weight:
    """Presets: ``const``, ``power:a=..``, ``checkerboard:lambda=..``,
    ``spike:width=..``.  Power weights are centered half a cell off the domain
    midpoint so the singularity never sits on a sample."""
    name, _, args = spec.partition(":")
    kv = {}
    if args:
        for item in args.split(","):
            key, _, val = item.partition("=")
            kv[key.strip()] = float(val)
    xs = lat.x_mesh()
    if name == "const":
        vals = np.ones(lat.shape())
    elif name == "power":
        aexp = kv.get("a", 0.5)
        c = lat.L / 2.0 + lat.dx / 2.0
        d2 = sum((np.minimum(np.abs(x - c), lat.L - np.abs(x - c))) ** 2 for x in xs)
        vals = np.sqrt(d2) ** aexp
    elif name == "checkerboard":
        lam = kv.get("lambda", 4.0)
        idx = sum(np.indices(lat.shape()))
        vals = np.where(idx % 2 == 0, 1.0, lam)
    elif name == "spike":
        width = kv.get("width", lat.L / 64.0)
        c = lat.L / 2.0
        d = np.sqrt(sum((np.minimum(np.abs(x - c), lat.L - np.abs(x - c))) ** 2 for x in xs))
        vals = np.where(d <= width / 2.0, 1.0, 1e-6)
    else:
        raise ValueError(f"unknown weight preset {name!r}")
    return Weight(GridFunction(lat, vals))
