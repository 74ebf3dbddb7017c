"""Oscillatory Fourier multipliers: model multipliers, the pointwise
derivative (Miyachi) and subdyadic Hoermander condition checkers, oscillatory
convolution kernels, and the dispersive propagator with rescaled sparse
reports.

The model is ``m(xi) = |xi|^{-beta} exp(i |xi|^alpha)`` supported on
``{|xi|^alpha >= 1}`` (so low frequencies for ``alpha < 0``); the admissible
exponent pairs are those of the symbol region under the translation
``-m <-> |beta|``, ``n(1-rho) <-> n|alpha|``, together with the sign gate
``alpha * beta > 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .dyadic import DyadicCube
from .func import GridFunction, Lattice, dft, inner, inverse_dft, lp_norm
from .pdo import OperatorMatrix, _structured, default_cutoff
from .sparse import ExponentPair, admissible_pair
from .symbol import ClassParams, Symbol, smooth_indicator

__all__ = [
    "MultiplierParams",
    "model_multiplier",
    "miyachi_check",
    "subdyadic_check",
    "ConditionReport",
    "theorem_region_direct",
    "oscillatory_kernel_transfer",
    "KernelTransferResult",
    "oscillatory_kernel",
    "propagate",
    "sobolev_factor",
    "propagator",
    "PropagatorReport",
    "ScaledCube",
    "negative_band_piece",
]

_EPS = float(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class MultiplierParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha == 0:
            raise ValueError("alpha = 0 (fractional-integral regime) is out of scope")

    @property
    def sign_ok(self) -> bool:
        return self.alpha * self.beta > 0


def model_multiplier(alpha: float, beta: float, chi_width: float = 0.5) -> Symbol:
    """``|xi|^{-beta} exp(i|xi|^alpha)`` cut to ``{|xi|^alpha >= 1}``.

    For ``alpha < 0`` the support is the unit ball and the relevant behaviour
    sits at low frequencies.  The support indicator is smoothed over
    ``chi_width``; the value at ``xi = 0`` is 0 by the ``|xi|^{-beta}`` factor
    (``beta < 0`` whenever the sign gate holds with ``alpha < 0``).
    """
    params = MultiplierParams(alpha, beta)

    def xi_part(xi):
        if isinstance(xi, tuple):
            r = np.sqrt(sum(np.asarray(c, dtype=np.float64) ** 2 for c in xi))
        else:
            r = np.abs(np.asarray(xi, dtype=np.float64))
        rs = np.where(r > 0, r, 1.0)
        chi = smooth_indicator((r - 1.0) if alpha > 0 else (1.0 - r), chi_width)
        with np.errstate(over="ignore"):
            phase = np.exp(1j * np.minimum(rs**alpha, 1e15))
            amp = rs ** (-beta)
        out = chi * amp * phase
        return np.where(r > 0, out, 0.0)

    # declared class data via the translation rho = 1 - alpha (clamped for bookkeeping)
    rho_eff = min(max(1.0 - alpha, 0.0), 1.0)
    sym = Symbol(ClassParams(min(-abs(beta), -1e-9), rho_eff, 0.0),
                 f"multiplier:alpha={alpha},beta={beta}", xi_part)
    return sym


# ---------------------------------------------------------------------------
# derivative condition checkers
# ---------------------------------------------------------------------------

_STENCILS = {
    0: ([0], [1.0]),
    1: ([-1, 1], [-0.5, 0.5]),
    2: ([-1, 0, 1], [1.0, -2.0, 1.0]),
    3: ([-2, -1, 1, 2], [-0.5, 1.0, -1.0, 0.5]),
    4: ([-2, -1, 0, 1, 2], [1.0, -4.0, 6.0, -4.0, 1.0]),
}


def _xi_derivative(sym: Symbol, order: int, xi: np.ndarray, scale: np.ndarray) -> np.ndarray:
    """Central difference of the given order with per-point step ``~scale``."""
    if order > 4:
        raise ValueError("derivative order capped at 4")
    h = _EPS ** (1.0 / (order + 2)) * scale
    offs, wts = _STENCILS[order]
    acc = np.zeros_like(xi, dtype=np.complex128)
    for o, w in zip(offs, wts):
        acc += w * sym.eval(0.0, xi + o * h)
    return acc / h**order


@dataclass
class ConditionEntry:
    order: int
    constant: float
    band_maxima: list[float]
    growth_slope: float
    uniform: bool


@dataclass
class ConditionReport:
    entries: list[ConditionEntry]
    passed: bool

    def entry(self, order: int) -> ConditionEntry:
        for e in self.entries:
            if e.order == order:
                return e
        raise KeyError(order)


def _band_sweep(sym: Symbol, alpha: float, beta: float, max_order: int,
                bands: list[tuple[float, float]], per_band: int,
                slope_tol: float, l2_ball: Optional[float]) -> ConditionReport:
    raw = {}
    for order in range(max_order + 1):
        maxima = []
        for lo, hi in bands:
            if l2_ball is None:
                # pointwise sup: geometric samples plus mid-band anchors so
                # isolated features cannot slip between samples
                xi = np.concatenate([np.geomspace(lo, hi, per_band),
                                     lo * np.array([1.25, 1.5, 1.75])])
                xi = np.concatenate([xi, -xi])
                scale = np.minimum(np.abs(xi) ** (1.0 - alpha), np.abs(xi)) * 0.5
                d = _xi_derivative(sym, order, xi, scale)
                weight = np.abs(xi) ** (beta - order * (alpha - 1.0))
                maxima.append(float(np.max(np.abs(d) * weight)))
            else:
                # L^2 means over balls of radius ~ l2_ball*|center|^(1-alpha),
                # each ball sampled uniformly at its own resolution
                best = 0.0
                for c in np.geomspace(lo, hi, 8):
                    rad = l2_ball * c ** (1.0 - alpha)
                    xi = np.linspace(c - rad, c + rad, 257)
                    xi = xi[np.abs(xi) > 1e-12]
                    scale = np.minimum(np.abs(xi) ** (1.0 - alpha), np.abs(xi)) * 0.5
                    d = _xi_derivative(sym, order, xi, scale)
                    mean = math.sqrt(float(np.mean(np.abs(d) ** 2)))
                    best = max(best, mean * c ** (beta - order * (alpha - 1.0)))
                maxima.append(best)
        raw[order] = maxima
    floor = 1e-4 * max(max(raw[0]), 1e-300)
    entries = []
    for order, maxima in raw.items():
        cmax = max(maxima)
        if len(maxima) >= 2 and cmax > floor:
            ix = np.arange(len(maxima), dtype=float)
            slope = float(np.polyfit(ix, np.log2(np.maximum(maxima, floor)), 1)[0])
        else:
            slope = 0.0
        growth = cmax / max(maxima[0], floor)
        uniform = cmax <= floor or not (slope > slope_tol and growth > 1.5)
        entries.append(ConditionEntry(order, cmax, maxima, slope, uniform))
    return ConditionReport(entries, all(e.uniform for e in entries))


def _support_bands(alpha: float, lo: float, hi: float) -> list[tuple[float, float]]:
    if alpha > 0:
        lo = max(lo, 2.0)
    else:
        hi = min(hi, 0.5)
    if not (0 < lo < hi):
        raise ValueError("frequency range misses the multiplier support")
    n_bands = max(2, int(math.floor(math.log2(hi / lo))))
    edges = np.geomspace(lo, hi, n_bands + 1)
    return list(zip(edges[:-1], edges[1:]))


def miyachi_check(sym: Symbol, alpha: float, beta: float, max_order: int = 3,
                  freq_range: tuple[float, float] = (2.0**-8, 2.0**9),
                  slope_tol: float = 0.12) -> ConditionReport:
    """Pointwise derivative bounds ``|D^g m| <= C |xi|^{-beta + g(alpha-1)}``
    measured over dyadic bands of the support; growth across bands fails."""
    bands = _support_bands(alpha, *freq_range)
    return _band_sweep(sym, alpha, beta, max_order, bands, 48, slope_tol, None)


def subdyadic_check(sym: Symbol, alpha: float, beta: float, max_order: int = 3,
                    freq_range: tuple[float, float] = (2.0**-8, 2.0**9),
                    slope_tol: float = 0.12, ball_frac: float = 0.25) -> ConditionReport:
    """Subdyadic Hoermander condition: weighted L^2 means of ``D^g m`` over
    balls of radius ``~ dist(B,0)^{1-alpha}`` instead of pointwise sups."""
    bands = _support_bands(alpha, *freq_range)
    return _band_sweep(sym, alpha, beta, max_order, bands, 192, slope_tol, ball_frac)


def theorem_region_direct(alpha, beta, pt: ExponentPair) -> bool:
    """Literal transcription of the oscillatory-multiplier admissibility:
    ``alpha*beta > 0`` and ``|beta| > n|alpha| (1/r - 1/2)`` for
    ``1 <= r <= s <= 2``, or ``|beta| > n|alpha| (1/r - 1/s)`` for
    ``1 <= r <= 2 <= s <= r'`` (or the swapped pair); n = 1.  Exact on
    rational inputs."""
    alpha = Fraction(alpha) if not isinstance(alpha, Fraction) else alpha
    beta = Fraction(beta) if not isinstance(beta, Fraction) else beta
    if alpha * beta <= 0:
        return False
    return admissible_pair(pt, -abs(beta), abs(alpha), 0, closed=False)


# ---------------------------------------------------------------------------
# oscillatory kernels
# ---------------------------------------------------------------------------

def oscillatory_kernel(lat: Lattice, a_param: float, b_param: float) -> GridFunction:
    """``exp(i|x|^a) / (1+|x|)^b`` sampled on the torus (periodic distance)."""
    x = lat.x_axis()
    z = np.abs(np.where(x > lat.L / 2, x - lat.L, x))
    vals = np.exp(1j * z**a_param) / (1.0 + z) ** b_param
    return GridFunction(lat, vals)


@dataclass
class KernelTransferResult:
    alpha: Fraction
    beta: Fraction
    sign_ok: bool
    envelope_constant: Optional[float]
    envelope_slope: Optional[float]
    envelope_ok: Optional[bool]


def oscillatory_kernel_transfer(a_param, b_param, n: int = 1,
                                lat: Optional[Lattice] = None,
                                band: tuple[float, float] = (2.0**3, 2.0**7)) -> KernelTransferResult:
    """Multiplier exponents of the kernel ``exp(i|x|^a)/(1+|x|)^b``:
    ``alpha = a/(a-1)``, ``beta = (n a/2 - n + b)/(a-1)``, exactly.

    When a lattice is supplied, the far part of the kernel (the unit-scale
    bump removed) is transformed and its modulus compared against the
    ``C |xi|^{-beta}`` envelope over ``band``; the fitted excess slope and the
    measured constant are reported.
    """
    a = Fraction(a_param) if not isinstance(a_param, Fraction) else a_param
    b = Fraction(b_param) if not isinstance(b_param, Fraction) else b_param
    if a <= 0 or a == 1:
        raise ValueError("kernel exponent a must be positive and != 1 (a = 1 is out of scope)")
    if b < n * (1 - a / 2):
        raise ValueError("need b >= n(1 - a/2)")
    alpha = a / (a - 1)
    beta = (Fraction(n) * a / 2 - n + b) / (a - 1)
    sign_ok = alpha * beta > 0
    env_c = env_slope = env_ok = None
    if lat is not None:
        # the torus must hold the stationary points of every band frequency
        # (|x| up to band_hi / a for a = 2) inside its untapered quarter
        K = oscillatory_kernel(lat, float(a), float(b))
        cut = default_cutoff()
        x = lat.x_axis()
        z = np.abs(np.where(x > lat.L / 2, x - lat.L, x))
        taper = cut.psi(z / (lat.L / 4.0))
        K_far = GridFunction(lat, K.values * (1.0 - cut.psi(z / 2.0)) * taper)
        Khat = dft(K_far).values
        xi = lat.xi_modulus()
        mask = (xi >= band[0]) & (xi <= band[1])
        ratios = np.abs(Khat[mask]) * xi[mask] ** float(beta)
        env_c = float(ratios.max())
        # fit |Khat| ~ xi^-beta: excess slope beyond -beta should be ~ 0
        logxi = np.log2(xi[mask])
        logv = np.log2(np.maximum(np.abs(Khat[mask]), 1e-300))
        slope = float(np.polyfit(logxi, logv, 1)[0])
        env_slope = slope + float(beta)
        env_ok = abs(env_slope) < 0.25 and math.isfinite(env_c)
    return KernelTransferResult(alpha, beta, sign_ok, env_c, env_slope, env_ok)


# ---------------------------------------------------------------------------
# dispersive propagator
# ---------------------------------------------------------------------------

def propagate(alpha: float, t: float, f: GridFunction) -> GridFunction:
    """``exp(i t (-Lap)^{alpha/2}) f`` applied spectrally (exact on the lattice)."""
    if t <= 0:
        raise ValueError("time must be positive")
    lat = f.lattice
    xim = lat.xi_modulus()
    return inverse_dft(GridFunction(lat, np.exp(1j * t * xim**alpha) * dft(f).values))


def sobolev_factor(f: GridFunction, t: float, alpha: float, beta: float) -> GridFunction:
    """``(I - t^{2/alpha} Lap)^{beta/2} f`` via ``(1 + t^{2/alpha}|xi|^2)^{beta/2}``."""
    lat = f.lattice
    xim = lat.xi_modulus()
    mult = (1.0 + t ** (2.0 / alpha) * xim**2) ** (beta / 2.0)
    return inverse_dft(GridFunction(lat, mult * dft(f).values))


@dataclass(frozen=True)
class ScaledCube:
    """Image of a dyadic cube under the global ``lam``-dilation about the
    domain center (1-D): sidelength and position both scale, which is what the
    time-rescaling of the dispersive bound produces."""

    base: DyadicCube
    lam: float
    center: float

    def cells(self, lat: Lattice):
        c0 = float((self.base.lo(0) + self.base.hi(0)) / 2)
        c = self.center + self.lam * (c0 - self.center)
        half = self.lam * float(self.base.sidelength) / 2.0
        i0 = max(0, math.ceil((c - half) / lat.dx))
        i1 = min(lat.N, math.ceil((c + half) / lat.dx))
        return (np.arange(i0, max(i0, i1)),)

    def cell_count(self, lat: Lattice) -> int:
        return int(self.cells(lat)[0].size)


@dataclass
class PropagatorReport:
    u: GridFunction = field(repr=False)
    l2_in: float
    l2_out: float
    pairing: float
    form_value: float
    ratio: float
    lam: float
    cubes: int


def propagator(alpha: int, t: float, beta: float, f: GridFunction,
               g: Optional[GridFunction] = None, pt: ExponentPair = ExponentPair(1.5, 1.5),
               levels: int = 4, seed: int = 0) -> PropagatorReport:
    """Evolve ``f`` and evaluate the time-rescaled sparse form

        sum_Q |t^{1/a} Q| <(I - t^{2/a} Lap)^{b/2} f>_{r, t^{1/a}Q} <g>_{s', t^{1/a}Q}

    over a checkerboard selection from ``levels`` dyadic scales dilated by
    ``t^{1/alpha}``; reports the pairing/form ratio.
    """
    if alpha < 1 or int(alpha) != alpha:
        raise ValueError("alpha must be a positive integer")
    lat = f.lattice
    from .sparse import make_test_function  # local import to avoid cycle at module load
    if g is None:
        g = make_test_function(lat, np.random.default_rng(seed))
    u = propagate(alpha, t, f)
    fs = sobolev_factor(f, t, alpha, beta)
    lam = t ** (1.0 / alpha)
    k_root = round(math.log2(lat.L))
    from .dyadic import GridShift
    from .func import local_average
    from .sparse import domain_tiling

    pairing = abs(inner(u, g))
    form = 0.0
    count = 0
    base_k = k_root - 1
    for lev in range(levels):
        k = base_k - lev
        scale = lam * 2.0**k
        if scale < 8 * lat.dx or scale > lat.L:
            continue
        fam = domain_tiling(lat, k, GridShift((0,)))
        groups: dict[tuple, list] = {}
        for Q in fam:
            from .dyadic import ancestor_index
            groups.setdefault(ancestor_index(Q, k + lev), []).append(Q)
        for _, members in sorted(groups.items()):
            best_val = -1.0
            for Q in sorted(members, key=lambda q: q.m):
                sq = ScaledCube(Q, lam, lat.L / 2.0)
                nc = sq.cell_count(lat)
                if nc == 0:
                    continue
                val = nc * lat.cell_volume * local_average(fs, sq, pt.r) * local_average(g, sq, pt.s_prime)
                if val > best_val:
                    best_val = val
            if best_val >= 0:
                form += best_val
                count += 1
    ratio = pairing / form if form > 0 else (0.0 if pairing == 0 else math.inf)
    return PropagatorReport(u, lp_norm(f, 2), lp_norm(u, 2), pairing, form, ratio, lam, count)


def negative_band_piece(sym: Symbol, j: int, lat: Lattice) -> OperatorMatrix:
    """Low-frequency annulus piece ``psi_tilde(2^-j xi)`` for ``j < 0``
    (the alpha < 0 regime lives below frequency 1)."""
    if j >= 0:
        raise ValueError("negative-band pieces require j < 0")
    cut = default_cutoff()
    xim = lat.xi_modulus()
    window = cut.psi_tilde(xim / 2.0**j)
    vals = np.asarray(sym.xi_part(lat.xi_mesh() if lat.n == 2 else lat.xi_axis()), dtype=np.complex128)
    return _structured(sym, lat, vals * window, f"T^{j}[{sym.label}]")
