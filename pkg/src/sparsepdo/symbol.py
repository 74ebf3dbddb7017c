"""Symbol classes, model symbols, and finite-difference seminorm verification.

A symbol carries declared class parameters ``(m, rho, delta)`` meaning that
mixed derivatives should obey

    |d_x^nu d_xi^sigma a(x, xi)| <= C (1 + |xi|)^(m - rho*|sigma| + delta*|nu|).

The checker measures the constants by central finite differences with steps
adapted both to the derivative order (roundoff vs truncation balance) and to
the symbol's frequency variation scale ``(1+|xi|)^rho``, and flags growth of
the measured constant across dyadic frequency bands as a class violation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "ClassParams",
    "Symbol",
    "model_oscillatory",
    "model_bessel",
    "model_x_dependent",
    "seminorm_check",
    "mixed_derivative",
    "SeminormEntry",
    "SeminormReport",
    "smooth_indicator",
]

_EPS = float(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class ClassParams:
    m: float
    rho: float
    delta: float

    def __post_init__(self):
        if not (0 <= self.rho <= 1 and 0 <= self.delta <= 1):
            raise ValueError("rho and delta must lie in [0, 1]")

    def embeds_in(self, other: "ClassParams") -> bool:
        """Class embedding: larger order, smaller rho, larger delta only enlarges the class."""
        return self.m <= other.m and self.rho >= other.rho and self.delta <= other.delta


@dataclass
class Symbol:
    """Evaluatable symbol ``a(x, xi)`` with declared class parameters.

    ``xi_part``/``x_part`` hold a separable factorization when one exists;
    operators use it for fast application.  ``eval(x, xi)`` broadcasts numpy
    arrays.  In 2-D, ``x`` and ``xi`` are tuples of mesh components.
    """

    params: ClassParams
    label: str
    xi_part: Callable = field(repr=False)
    x_part: Optional[Callable] = field(default=None, repr=False)

    @property
    def x_independent(self) -> bool:
        return self.x_part is None

    def eval(self, x, xi):
        out = np.asarray(self.xi_part(xi), dtype=np.complex128)
        if self.x_part is not None:
            out = np.asarray(self.x_part(x), dtype=np.complex128) * out
        return out

    __call__ = eval


def _bump_h(t):
    """exp(-1/t) for t > 0, else 0; the standard smooth cutoff building block."""
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_indicator(u, width: float):
    """C^inf step: 0 for u <= 0, 1 for u >= width, monotone in between."""
    t = np.clip(np.asarray(u, dtype=np.float64) / width, 0.0, 1.0)
    a = _bump_h(t)
    b = _bump_h(1.0 - t)
    return a / (a + b + 1e-300)


def _modulus(xi):
    if isinstance(xi, tuple):
        return np.sqrt(sum(np.asarray(c, dtype=np.float64) ** 2 for c in xi))
    return np.abs(np.asarray(xi, dtype=np.float64))


def model_oscillatory(m: float, rho: float, chi_width: float = 0.5) -> Symbol:
    """x-independent ``exp(i|xi|^(1-rho)) (1+|xi|)^m`` cut to ``{|xi|^(1-rho) >= 1}``.

    The sharp support indicator is smoothed over ``chi_width`` in ``|xi|``
    (pass the lattice frequency spacing to align the transition with one bin).
    For ``rho = 1`` the cutoff condition is vacuous and the phase is constant.
    """
    e = 1.0 - rho

    def xi_part(xi):
        r = _modulus(xi)
        amp = (1.0 + r) ** m
        if e == 0.0:
            chi = 1.0
            phase = np.exp(1j * np.ones_like(r))
        else:
            with np.errstate(divide="ignore", over="ignore"):
                re = np.where(r > 0, r, 1e-300) ** e
            # support {r^e >= 1}: r >= 1 for e > 0, r <= 1 for e < 0
            chi = smooth_indicator((r - 1.0) if e > 0 else (1.0 - r), chi_width)
            phase = np.exp(1j * np.minimum(re, 1e15))
        return chi * amp * phase

    return Symbol(ClassParams(m, rho, 0.0), f"oscillatory:m={m},rho={rho}", xi_part)


def model_bessel(m: float) -> Symbol:
    """Radial smooth symbol ``(1+|xi|^2)^(m/2)``; lies in the rho = 1 class."""

    def xi_part(xi):
        r = _modulus(xi)
        return (1.0 + r**2) ** (m / 2.0)

    return Symbol(ClassParams(m, 1.0, 0.0), f"bessel:m={m}", xi_part)


def model_x_dependent(m: float, rho: float, L: float, chi_width: float = 0.5) -> Symbol:
    """Genuinely x-dependent instance ``(2 + sin(2 pi x / L)) * oscillatory``.

    The x factor has bounded derivatives of all orders, so the symbol stays in
    the delta = 0 class of its oscillatory factor.
    """
    base = model_oscillatory(m, rho, chi_width)

    def x_part(x):
        xs = x[0] + x[1] if isinstance(x, tuple) else np.asarray(x, dtype=np.float64)
        return 2.0 + np.sin(2.0 * np.pi * xs / L)

    return Symbol(base.params, f"xdep:m={m},rho={rho}", base.xi_part, x_part)


# --- finite differences ------------------------------------------------------

_STENCILS = {
    0: ([0], [1.0]),
    1: ([-1, 1], [-0.5, 0.5]),
    2: ([-1, 0, 1], [1.0, -2.0, 1.0]),
    3: ([-2, -1, 1, 2], [-0.5, 1.0, -1.0, 0.5]),
    4: ([-2, -1, 0, 1, 2], [1.0, -4.0, 6.0, -4.0, 1.0]),
}


def _fd_step(order_total: int) -> float:
    # balances O(h^2) truncation against eps/h^order roundoff
    return _EPS ** (1.0 / (order_total + 2))


def mixed_derivative(a: Symbol, nu: int, sigma: int, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Central-difference ``d_x^nu d_xi^sigma a`` at all (x, xi) pairs (1-D symbols)."""
    if nu + sigma > 4:
        raise ValueError("total derivative order capped at 4")
    hx = _fd_step(nu + sigma)
    hxi = _fd_step(nu + sigma) * (1.0 + np.abs(xi)) ** a.params.rho
    if hx < 1e-14 or np.any(hxi < 1e-14):
        raise ValueError("finite-difference step underflow")
    offs_x, w_x = _STENCILS[nu]
    offs_xi, w_xi = _STENCILS[sigma]
    x = np.asarray(x, dtype=np.float64)[:, None]
    xi = np.asarray(xi, dtype=np.float64)[None, :]
    acc = np.zeros(np.broadcast_shapes(x.shape, xi.shape), dtype=np.complex128)
    for ox, wx in zip(offs_x, w_x):
        for oxi, wxi in zip(offs_xi, w_xi):
            acc += wx * wxi * a.eval(x + ox * hx, xi + oxi * hxi)
    return acc / (hx**nu * hxi**sigma)


@dataclass
class SeminormEntry:
    nu: int
    sigma: int
    constant: float
    band_maxima: list[float]
    growth_slope: float
    uniform: bool


@dataclass
class SeminormReport:
    entries: list[SeminormEntry]
    passed: bool

    def entry(self, nu: int, sigma: int) -> SeminormEntry:
        for e in self.entries:
            if (e.nu, e.sigma) == (nu, sigma):
                return e
        raise KeyError((nu, sigma))


def seminorm_check(a: Symbol, max_order: int, freq_range: tuple[float, float],
                   x_samples: Sequence[float] = (0.0, 0.7, 1.3, 2.9, 4.1, 5.6),
                   per_band: int = 8, slope_tol: float = 0.12) -> SeminormReport:
    """Measure the class constants of ``a`` over dyadic bands of ``freq_range``.

    For every (nu, sigma) with nu + sigma <= max_order the sup of
    ``|d^nu_x d^sigma_xi a| * (1+|xi|)^(-m + rho*sigma - delta*nu)`` is taken
    over the sample set, per dyadic band.  An entry fails (non-uniform) when
    the per-band maxima grow like a positive power of the band frequency:
    fitted log2 slope above ``slope_tol`` and total growth above 1.5x.
    """
    if max_order > 4:
        raise ValueError("max_order capped at 4")
    lo, hi = freq_range
    if not (0 < lo < hi):
        raise ValueError("need 0 < xi_min < xi_max")
    n_bands = max(1, int(math.floor(math.log2(hi / lo))))
    p = a.params
    raw = {}
    for nu in range(max_order + 1):
        for sigma in range(max_order + 1 - nu):
            band_maxima = []
            for b in range(n_bands):
                xi = np.geomspace(lo * 2.0**b, lo * 2.0 ** (b + 1), per_band)
                xi = np.concatenate([xi, -xi])
                d = mixed_derivative(a, nu, sigma, np.asarray(x_samples), xi)
                weight = (1.0 + np.abs(xi)[None, :]) ** (-p.m + p.rho * sigma - p.delta * nu)
                band_maxima.append(float(np.max(np.abs(d) * weight)))
            raw[(nu, sigma)] = band_maxima
    floor = 1e-4 * max(max(raw[(0, 0)]), 1e-300)
    entries = []
    for (nu, sigma), band_maxima in raw.items():
        cmax = max(band_maxima)
        if n_bands >= 2 and cmax > floor:
            ix = np.arange(n_bands, dtype=float)
            vals = np.log2(np.maximum(band_maxima, floor))
            slope = float(np.polyfit(ix, vals, 1)[0])
        else:
            slope = 0.0
        total_growth = cmax / max(band_maxima[0], floor)
        # entries at the FD noise floor are numerically zero, not violations
        uniform = cmax <= floor or not (slope > slope_tol and total_growth > 1.5)
        entries.append(SeminormEntry(nu, sigma, cmax, band_maxima, slope, uniform))
    return SeminormReport(entries, passed=all(e.uniform for e in entries))
