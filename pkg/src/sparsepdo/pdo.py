"""Discretized pseudodifferential operators, their frequency and spatial pieces,
kernels, and L^r -> L^s operator-norm estimation.

The operator acts on grid functions by quadrature over the frequency lattice,

    (T_a f)(x) = (2 pi)^{-n} sum_xi a(x, xi) fhat(xi) exp(i x.xi) dxi^n,

which for the constant symbol is exactly the identity (see sparsepdo.func for
the transform normalization).  Operator pieces are represented structurally:
x-independent symbols give circulant (convolution) operators whose endpoint
norms are computed exactly from the kernel; separable symbols a(x,xi) =
b(x) c(xi) give diag-times-circulant operators; anything else falls back to a
dense matrix on the sample space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .func import GridFunction, Lattice, dft, inverse_dft
from .symbol import Symbol, _bump_h

__all__ = [
    "CutoffPair",
    "DecompParams",
    "OperatorMatrix",
    "default_cutoff",
    "apply_T",
    "apply_T_direct",
    "frequency_piece",
    "spatial_piece",
    "low_piece_sum",
    "kernel_l1",
    "opnorm",
    "OpNormResult",
    "decay_fit",
    "DecayFit",
]


@dataclass(frozen=True)
class CutoffPair:
    """Radial cutoff ``psi`` (1 on the unit ball, supported in its double) and
    the annulus bump ``psi_tilde(t) = psi(t) - psi(2t)``."""

    psi: Callable = field(repr=False)

    def psi_tilde(self, t):
        return self.psi(t) - self.psi(2.0 * np.asarray(t, dtype=np.float64))

    def partition_values(self, t, j_top: int):
        """psi(t) + sum_{0<j<=J} psi_tilde(2^-j t); telescopes to psi(2^-J t)."""
        t = np.asarray(t, dtype=np.float64)
        out = self.psi(t)
        for j in range(1, j_top + 1):
            out = out + self.psi_tilde(t / 2.0**j)
        return out


def default_cutoff() -> CutoffPair:
    def psi(t):
        t = np.abs(np.asarray(t, dtype=np.float64))
        num = _bump_h(2.0 - t)
        den = num + _bump_h(t - 1.0)
        return num / np.where(den > 0, den, 1.0)

    return CutoffPair(psi)


@dataclass
class DecompParams:
    """Scale-split parameter, frequency range, spatial piece range, and the
    lattice-adapted offset standing in for a fixed large sidelength
    bump.  ``l_range = None`` means every representable spatial scale."""

    epsilon: float = 0.1
    j_max: int = 6
    l_offset: Optional[int] = None
    l_range: Optional[tuple[int, int]] = None

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.l_range is not None and self.l_range[0] > self.l_range[1]:
            raise ValueError("empty l range")

    def l_values(self, j: int, rho: float, lat: Lattice) -> list[int]:
        """Representable spatial piece indices at band j (clipped to l_range)."""
        lo = math.ceil(j * rho + math.log2(2 * lat.dx))
        hi = math.floor(j * rho + math.log2(lat.L / 2))
        if self.l_range is not None:
            lo, hi = max(lo, self.l_range[0]), min(hi, self.l_range[1])
        return list(range(lo, hi + 1))


def check_band(lat: Lattice, j: int) -> None:
    if j < 0:
        raise ValueError("frequency piece index must be >= 0")
    if 2.0 ** (j + 1) > lat.nyquist:
        raise ValueError(f"frequency band 2^{j + 1} exceeds lattice Nyquist {lat.nyquist:.1f}")


def _signed_distance(lat: Lattice) -> np.ndarray:
    """Periodic signed displacement of each lattice point from 0, per axis mesh."""
    z = lat.x_axis()
    z = np.where(z > lat.L / 2, z - lat.L, z)
    if lat.n == 1:
        return np.abs(z)
    z1, z2 = np.meshgrid(z, z, indexing="ij")
    return np.hypot(z1, z2)


@dataclass
class OperatorMatrix:
    """Sample-space linear operator with structure-aware norm computation.

    kind 'circulant': ``Tf = K * f`` (torus convolution, quadrature weights in
    the apply); 'diag_circulant': ``Tf = b . (K * f)``; 'dense': ``Tf = M f``
    with quadrature folded into ``M``.
    """

    lattice: Lattice
    tag: str
    kind: str
    kernel: Optional[np.ndarray] = field(default=None, repr=False)
    diag: Optional[np.ndarray] = field(default=None, repr=False)
    matrix: Optional[np.ndarray] = field(default=None, repr=False)

    # -- application ---------------------------------------------------------
    def apply_values(self, v: np.ndarray) -> np.ndarray:
        lat = self.lattice
        if self.kind == "dense":
            return self.matrix @ v.ravel() if lat.n == 1 else (self.matrix @ v.ravel()).reshape(lat.shape())
        conv = np.fft.ifftn(np.fft.fftn(self.kernel) * np.fft.fftn(v)) * lat.cell_volume
        if self.kind == "diag_circulant":
            conv = self.diag * conv
        return conv

    def apply_adjoint_values(self, v: np.ndarray) -> np.ndarray:
        lat = self.lattice
        if self.kind == "dense":
            return self.matrix.conj().T @ v.ravel() if lat.n == 1 else (self.matrix.conj().T @ v.ravel()).reshape(lat.shape())
        if self.kind == "diag_circulant":
            v = np.conj(self.diag) * v
        flipped = np.conj(_flip(self.kernel))
        return np.fft.ifftn(np.fft.fftn(flipped) * np.fft.fftn(v)) * lat.cell_volume

    def apply(self, f: GridFunction) -> GridFunction:
        return GridFunction(self.lattice, self.apply_values(f.values))

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if self.kind != other.kind or self.kind not in ("circulant", "diag_circulant"):
            return OperatorMatrix(self.lattice, f"{self.tag}+{other.tag}", "dense",
                                  matrix=self.to_dense() + other.to_dense())
        if self.kind == "diag_circulant" and not np.array_equal(self.diag, other.diag):
            return OperatorMatrix(self.lattice, f"{self.tag}+{other.tag}", "dense",
                                  matrix=self.to_dense() + other.to_dense())
        return OperatorMatrix(self.lattice, f"{self.tag}+{other.tag}", self.kind,
                              kernel=self.kernel + other.kernel, diag=self.diag)

    # -- structure -----------------------------------------------------------
    def multiplier(self) -> np.ndarray:
        if self.kind != "circulant":
            raise ValueError("multiplier defined for circulant operators only")
        return np.fft.fftn(self.kernel) * self.lattice.cell_volume

    def to_dense(self) -> np.ndarray:
        lat = self.lattice
        if self.kind == "dense":
            return self.matrix
        if lat.n != 1:
            raise NotImplementedError("dense materialization is 1-D only; use matrix-free paths")
        if lat.size > 4096:
            raise MemoryError("dense materialization capped at 4096 samples")
        idx = (np.arange(lat.N)[:, None] - np.arange(lat.N)[None, :]) % lat.N
        M = self.kernel[idx] * lat.cell_volume
        if self.kind == "diag_circulant":
            M = self.diag[:, None] * M
        return M

    def abs_kernel(self) -> np.ndarray:
        return np.abs(self.kernel)


def _flip(K: np.ndarray) -> np.ndarray:
    """Index negation z -> -z on the periodic lattice."""
    out = K
    for ax in range(K.ndim):
        out = np.roll(np.flip(out, axis=ax), 1, axis=ax)
    return out


# --- constructors ------------------------------------------------------------

def _multiplier_values(a: Symbol, lat: Lattice, extra: Optional[np.ndarray] = None) -> np.ndarray:
    vals = np.asarray(a.xi_part(lat.xi_mesh() if lat.n == 2 else lat.xi_axis()), dtype=np.complex128)
    if extra is not None:
        vals = vals * extra
    return vals


def _kernel_from_multiplier(lat: Lattice, mult: np.ndarray) -> np.ndarray:
    return np.fft.ifftn(mult) / lat.cell_volume


def _structured(a: Symbol, lat: Lattice, mult: np.ndarray, tag: str) -> OperatorMatrix:
    kernel = _kernel_from_multiplier(lat, mult)
    if a.x_independent:
        return OperatorMatrix(lat, tag, "circulant", kernel=kernel)
    diag = np.asarray(a.x_part(lat.x_mesh() if lat.n == 2 else lat.x_axis()), dtype=np.complex128)
    return OperatorMatrix(lat, tag, "diag_circulant", kernel=kernel, diag=diag)


def apply_T(a: Symbol, f: GridFunction) -> GridFunction:
    """Full operator application; exact multiplier route for (separably)
    structured symbols, which covers every model symbol in this package."""
    lat = f.lattice
    xi = lat.xi_mesh() if lat.n == 2 else lat.xi_axis()
    out = inverse_dft(GridFunction(lat, np.asarray(a.xi_part(xi), dtype=np.complex128) * dft(f).values))
    if not a.x_independent:
        x = lat.x_mesh() if lat.n == 2 else lat.x_axis()
        out = GridFunction(lat, np.asarray(a.x_part(x), dtype=np.complex128) * out.values)
    return out


def apply_T_direct(a: Symbol, f: GridFunction) -> GridFunction:
    """Brute-force N^2 quadrature oracle for apply_T (1-D, small N only)."""
    lat = f.lattice
    if lat.n != 1 or lat.N > 1024:
        raise ValueError("direct oracle restricted to 1-D lattices with N <= 1024")
    x = lat.x_axis()
    xi = lat.xi_axis()
    fhat = dft(f).values
    A = a.eval(x[:, None], xi[None, :])
    phases = np.exp(1j * x[:, None] * xi[None, :])
    out = (A * phases * fhat[None, :]).sum(axis=1) * lat.dxi / (2.0 * math.pi)
    return GridFunction(lat, out)


def frequency_piece(a: Symbol, j: int, lat: Lattice, cutoff: Optional[CutoffPair] = None) -> OperatorMatrix:
    """The operator localized to the dyadic frequency band ``|xi| ~ 2^j``
    (``j = 0`` keeps the full low-frequency ball)."""
    check_band(lat, j)
    cut = cutoff or default_cutoff()
    xim = lat.xi_modulus()
    window = cut.psi(xim) if j == 0 else cut.psi_tilde(xim / 2.0**j)
    mult = _multiplier_values(a, lat, window)
    return _structured(a, lat, mult, f"T^{j}[{a.label}]")


def _spatial_window(lat: Lattice, scale: float, cut: CutoffPair, center_bump: bool) -> np.ndarray:
    if scale < 2 * lat.dx or scale > lat.L / 2:
        raise ValueError(f"unrepresentable spatial scale {scale:.3g} on this lattice")
    dist = _signed_distance(lat)
    return cut.psi(dist / scale) if center_bump else cut.psi_tilde(dist / scale)


def spatial_piece(a: Symbol, j: int, l: int, lat: Lattice,
                  cutoff: Optional[CutoffPair] = None, center_bump: bool = False) -> OperatorMatrix:
    """Kernel of the j-th band operator windowed to distances ``|x-y| ~ 2^(l - j rho)``.

    With ``center_bump=True`` the window is the full bump at that scale, i.e.
    this piece absorbs the sum over all smaller l (the lattice stand-in for
    the infinite sum over spatial scales below the representable floor).
    """
    cut = cutoff or default_cutoff()
    piece = frequency_piece(a, j, lat, cut)
    scale = 2.0 ** (l - j * a.params.rho)
    window = _spatial_window(lat, scale, cut, center_bump)
    return OperatorMatrix(lat, f"T^{j},{l}[{a.label}]", piece.kind,
                          kernel=piece.kernel * window, diag=piece.diag)


def low_piece_sum(a: Symbol, j: int, l_cut: int, lat: Lattice,
                  cutoff: Optional[CutoffPair] = None) -> OperatorMatrix:
    """``sum_{l <= l_cut} T_a^{j,l}``: the band kernel under the bump at scale
    ``2^(l_cut - j rho)`` (the annuli below telescope into the bump)."""
    op = spatial_piece(a, j, l_cut, lat, cutoff, center_bump=True)
    op.tag = f"T^{j},l<={l_cut}[{a.label}]"
    return op


def kernel_l1(a: Symbol, j: int, lat: Lattice, cutoff: Optional[CutoffPair] = None) -> float:
    """sup over x of the L^1 (quadrature) mass of the band kernel K_j(x, .)."""
    piece = frequency_piece(a, j, lat, cutoff)
    base = float(np.sum(np.abs(piece.kernel))) * lat.cell_volume
    if piece.kind == "diag_circulant":
        return float(np.max(np.abs(piece.diag))) * base
    return base


# --- operator norms ----------------------------------------------------------

@dataclass
class OpNormResult:
    value: float          # best available value (estimate)
    lower: float          # certified lower bound (achieved by an explicit input)
    bound_kind: str       # 'exact', 'lower', or 'estimate'

    def __float__(self):
        return self.value


def _dual_exponent(p: float) -> float:
    if p == 1.0:
        return math.inf
    if p == math.inf:
        return 1.0
    return p / (p - 1.0)


def _quad_norm(v: np.ndarray, p: float, cell: float) -> float:
    a = np.abs(v)
    if p == math.inf:
        return float(a.max())
    return float((np.sum(a**p) * cell) ** (1.0 / p))


def _norm22(A: OperatorMatrix) -> OpNormResult:
    if A.kind == "circulant":
        v = float(np.max(np.abs(A.multiplier())))
        return OpNormResult(v, v, "exact")
    if A.kind == "dense":
        v = float(np.linalg.svd(A.matrix, compute_uv=False)[0])
        return OpNormResult(v, v, "exact")
    if A.lattice.size <= 2048:
        v = float(np.linalg.svd(A.to_dense(), compute_uv=False)[0])
        return OpNormResult(v, v, "exact")
    est, low = _power_iteration_22(A)
    return OpNormResult(est, low, "lower")


def _power_iteration_22(A: OperatorMatrix, iters: int = 120, tol: float = 1e-12):
    rng = np.random.default_rng(7)
    shape = A.lattice.shape()
    v = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    v /= np.linalg.norm(v)
    prev = 0.0
    for _ in range(iters):
        w = A.apply_adjoint_values(A.apply_values(v))
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0, 0.0
        v = w / nw
        if abs(nw - prev) < tol * max(nw, 1.0):
            break
        prev = nw
    low = float(np.linalg.norm(A.apply_values(v)) / np.linalg.norm(v))
    return low, low


def _abs_structure(A: OperatorMatrix):
    """(|b|, |K|) for structured kinds, else None."""
    if A.kind == "circulant":
        return np.ones(A.lattice.shape()), np.abs(A.kernel)
    if A.kind == "diag_circulant":
        return np.abs(A.diag), np.abs(A.kernel)
    return None


def _column_power_sums(absb: np.ndarray, absK: np.ndarray, power: float) -> np.ndarray:
    """For each column j: sum_i |b_i|^p |K_{i-j}|^p, via FFT correlation."""
    u = np.fft.fftn(absb**power)
    v = np.fft.fftn(absK**power)
    out = np.fft.ifftn(u * np.conj(v)).real
    return np.maximum(out, 0.0)


def opnorm(A: OperatorMatrix, r: float, s: float,
           restarts: int = 8, iters: int = 40, seed: int = 0) -> OpNormResult:
    """Operator norm L^r -> L^s with quadrature-weighted norms.

    Exact for (2,2), for r = 1 (column extremizers), and for s = inf (row
    extremizers).  Anything else runs a dual-exponent nonlinear power
    iteration from ``restarts`` random starts and reports the best achieved
    ratio, which is a certified lower bound.
    """
    if not (r == math.inf or r >= 1) or not (s == math.inf or s >= 1):
        raise ValueError("exponents must be >= 1 (or inf)")
    lat = A.lattice
    cell = lat.cell_volume
    if r == 2.0 and s == 2.0:
        return _norm22(A)

    struct = _abs_structure(A)
    if r == 1.0:
        # column extremizers: sup_j ||M[:, j]||_s(quad) / ||delta_j||_1
        if struct is not None:
            absb, absK = struct
            if s == math.inf:
                v = float(absb.max() * absK.max())
            else:
                sums = _column_power_sums(absb, absK, s)
                v = float((sums.max() * cell) ** (1.0 / s))
        else:
            M = np.abs(A.matrix)
            if s == math.inf:
                v = float(M.max() / cell)
            else:
                v = float(((M**s).sum(axis=0).max() * cell) ** (1.0 / s) / cell)
        return OpNormResult(v, v, "exact")
    if s == math.inf:
        # row extremizers: sup_i ||kernel row||_{r'}(quad), Hoelder-sharp
        rp = _dual_exponent(r)
        if struct is not None:
            absb, absK = struct
            v = float(absb.max() * (np.sum(absK**rp) * cell) ** (1.0 / rp))
        else:
            M = np.abs(A.matrix) / cell
            v = float((((M**rp).sum(axis=1) * cell) ** (1.0 / rp)).max())
        return OpNormResult(v, v, "exact")

    # general (r, s): Boyd-style dual-exponent fixed point
    rng = np.random.default_rng(seed)
    rp = _dual_exponent(r)
    best = 0.0
    for _ in range(max(1, restarts)):
        v = rng.standard_normal(lat.shape()) + 1j * rng.standard_normal(lat.shape())
        nv = _quad_norm(v, r, cell)
        if nv == 0:
            continue
        v = v / nv
        for _ in range(iters):
            g = A.apply_values(v)
            ng = _quad_norm(g, s, cell)
            if ng == 0:
                break
            h = np.abs(g) ** (s - 1.0) * np.exp(1j * np.angle(g))
            b = A.apply_adjoint_values(h)
            if rp == math.inf:
                w = np.zeros_like(b)
                w[np.unravel_index(np.argmax(np.abs(b)), b.shape)] = np.exp(1j * np.angle(b.flat[np.argmax(np.abs(b))]))
            else:
                w = np.abs(b) ** (rp - 1.0) * np.exp(1j * np.angle(b))
            nw = _quad_norm(w, r, cell)
            if nw == 0:
                break
            v = w / nw
        ratio = _quad_norm(A.apply_values(v), s, cell)
        best = max(best, float(ratio))
    return OpNormResult(best, best, "lower")


@dataclass
class DecayFit:
    slope: float
    intercept: float
    residual: float
    label: str = ""


def decay_fit(a: Optional[Symbol], norms: dict[int, float]) -> DecayFit:
    """Least-squares fit of log2(norm) against j; residual is the RMS misfit."""
    if len(norms) < 4:
        raise ValueError("need at least 4 scale points for a decay fit")
    js = np.array(sorted(norms), dtype=float)
    if np.allclose(js, js[0]):
        raise ValueError("degenerate j set")
    vals = np.log2(np.array([max(norms[int(j)], 1e-300) for j in js]))
    coeffs, res = np.polyfit(js, vals, 1, full=True)[:2]
    rms = math.sqrt(res[0] / len(js)) if len(res) else 0.0
    return DecayFit(float(coeffs[0]), float(coeffs[1]), rms, a.label if a is not None else "")
