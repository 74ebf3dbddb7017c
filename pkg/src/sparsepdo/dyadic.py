"""Shifted dyadic grids, cube geometry, Carleson packing and sparse certification.

The three universal shifted grids in each dimension are

    D_v = { 2^k [ m + (-1)^k v/3, m + 1 + (-1)^k v/3 ) : k, m integers },   v in {0,1,2},

products per axis in 2-D.  The scale-alternating sign is what makes each D_v
an honest dyadic grid (each cube is the disjoint union of 2^n children of the
same grid); without it cubes at different scales fail to nest.  All endpoint
geometry is done in exact rational arithmetic, all nesting in exact integer
index arithmetic, so containment and disjointness are never subject to
floating-point error.

Measures are bookkept in units of the family's finest scale: every member of
a one-grid family is an exact union of its scale-``k_min`` descendants, which
play the role of witness cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

__all__ = [
    "GridShift",
    "DyadicCube",
    "CubeFamily",
    "SparseCollection",
    "CertifyFailure",
    "Ball",
    "children",
    "parent",
    "one_third_trick_cover",
    "carleson_constant",
    "certify_sparse",
    "family_to_lines",
    "family_from_lines",
    "certificate_lines",
]


@dataclass(frozen=True, order=True)
class GridShift:
    v: tuple[int, ...]

    def __post_init__(self):
        if len(self.v) not in (1, 2) or any(c not in (0, 1, 2) for c in self.v):
            raise ValueError(f"shift must lie in {{0,1,2}}^n, n in {{1,2}}, got {self.v}")

    @property
    def n(self) -> int:
        return len(self.v)


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


@dataclass(frozen=True, order=True)
class DyadicCube:
    """Cube ``prod_i 2^k [m_i + s_k v_i/3, m_i + 1 + s_k v_i/3)``, ``s_k = (-1)^k``."""

    shift: GridShift
    k: int
    m: tuple[int, ...]

    def __post_init__(self):
        if len(self.m) != self.shift.n:
            raise ValueError("index dimension does not match shift dimension")

    @property
    def n(self) -> int:
        return self.shift.n

    @property
    def sidelength(self) -> Fraction:
        return Fraction(2) ** self.k

    @property
    def measure(self) -> Fraction:
        return self.sidelength**self.n

    def lo(self, axis: int) -> Fraction:
        return Fraction(2) ** self.k * (self.m[axis] + Fraction(_sign(self.k) * self.shift.v[axis], 3))

    def hi(self, axis: int) -> Fraction:
        return self.lo(axis) + self.sidelength

    def contains_point(self, x) -> bool:
        pt = x if isinstance(x, (tuple, list)) else (x,)
        return all(self.lo(i) <= Fraction(pt[i]) < self.hi(i) for i in range(self.n))

    def contains_cube(self, other: "DyadicCube") -> bool:
        """Exact containment; requires the same grid for index arithmetic."""
        if other.shift != self.shift:
            return all(self.lo(i) <= other.lo(i) and other.hi(i) <= self.hi(i) for i in range(self.n))
        if other.k > self.k:
            return False
        return ancestor_index(other, self.k) == self.m

    def descendant_lo_index(self, scale: int) -> tuple[int, ...]:
        """Index of the lowest-corner descendant at ``scale <= k``."""
        if scale > self.k:
            raise ValueError("descendant scale must not exceed cube scale")
        idx = list(self.m)
        for kk in range(self.k, scale, -1):
            s = _sign(kk)
            idx = [2 * mi + s * vi for mi, vi in zip(idx, self.shift.v)]
        return tuple(idx)

    def cells(self, lattice) -> tuple[np.ndarray, ...]:
        """Sample indices of the lattice falling in this cube, clipped to the domain."""
        dx = Fraction(lattice.L) / lattice.N
        axes = []
        for i in range(self.n):
            i0 = max(0, math.ceil(self.lo(i) / dx))
            i1 = min(lattice.N, math.ceil(self.hi(i) / dx))
            axes.append(np.arange(i0, max(i0, i1)))
        if self.n == 1:
            return (axes[0],)
        return np.ix_(axes[0], axes[1])

    def cell_count(self, lattice) -> int:
        idx = self.cells(lattice)
        return int(np.prod([a.size for a in (idx if self.n == 1 else (idx[0].ravel(), idx[1].ravel()))]))


def children(Q: DyadicCube) -> list[DyadicCube]:
    """The 2^n cubes of scale k-1 tiling ``Q`` (same shift)."""
    s = _sign(Q.k)
    per_axis = [(2 * mi + s * vi, 2 * mi + s * vi + 1) for mi, vi in zip(Q.m, Q.shift.v)]
    out = []
    if Q.n == 1:
        for a in per_axis[0]:
            out.append(DyadicCube(Q.shift, Q.k - 1, (a,)))
    else:
        for a in per_axis[0]:
            for b in per_axis[1]:
                out.append(DyadicCube(Q.shift, Q.k - 1, (a, b)))
    return out


def parent(Q: DyadicCube) -> DyadicCube:
    s = _sign(Q.k)
    idx = tuple((mi + s * vi) // 2 for mi, vi in zip(Q.m, Q.shift.v))
    return DyadicCube(Q.shift, Q.k + 1, idx)


def ancestor_index(Q: DyadicCube, scale: int) -> tuple[int, ...]:
    if scale < Q.k:
        raise ValueError("ancestor scale must be >= cube scale")
    cur = Q
    while cur.k < scale:
        cur = parent(cur)
    return cur.m


@dataclass(frozen=True)
class Ball:
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")


def one_third_trick_cover(ball: Ball) -> DyadicCube:
    """Smallest found shifted dyadic cube containing the closed ball.

    Scans scales upward from the diameter scale and the three shifts per axis;
    the classical one-third trick guarantees a hit once ``2^k >= 6 * radius``,
    so the returned sidelength is at most ``C_n * radius`` with ``C_n = 24``
    (typically <= 12).
    """
    center = ball.center if isinstance(ball.center, (tuple, list)) else (ball.center,)
    n = len(center)
    c = [Fraction(x) for x in center]
    r = Fraction(ball.radius)
    k0 = math.ceil(math.log2(2 * ball.radius))
    for k in range(k0, k0 + 8):
        side = Fraction(2) ** k
        s = _sign(k)
        # per-axis admissible shifts, combined lexicographically
        axis_opts = []
        for i in range(n):
            opts = []
            for v in (0, 1, 2):
                off = Fraction(s * v, 3)
                m = (c[i] - r) / side - off
                mi = math.floor(m)
                if side * (mi + off) <= c[i] - r and c[i] + r <= side * (mi + 1 + off):
                    opts.append((v, mi))
            axis_opts.append(opts)
        if all(axis_opts):
            first = [opts[0] for opts in axis_opts]
            shift = GridShift(tuple(v for v, _ in first))
            return DyadicCube(shift, k, tuple(m for _, m in first))
    raise RuntimeError("one-third cover search failed; should be impossible")


@dataclass
class CubeFamily:
    """Finite duplicate-free set of cubes sharing one grid shift."""

    cubes: tuple[DyadicCube, ...]

    def __init__(self, cubes: Iterable[DyadicCube]):
        cubes = tuple(sorted(set(cubes)))
        if cubes:
            shift = cubes[0].shift
            if any(q.shift != shift for q in cubes):
                raise ValueError("all cubes in a family must share one grid shift")
        self.cubes = cubes

    def __len__(self):
        return len(self.cubes)

    def __iter__(self):
        return iter(self.cubes)

    @property
    def min_scale(self) -> int:
        return min(q.k for q in self.cubes)


def _family_tree(F: CubeFamily):
    """For each cube, the maximal strictly-smaller family cubes inside it."""
    by_scale: dict[int, dict[tuple, DyadicCube]] = {}
    for q in F:
        by_scale.setdefault(q.k, {})[q.m] = q
    scales = sorted(by_scale)
    tree_children: dict[DyadicCube, list[DyadicCube]] = {q: [] for q in F}
    for q in F:
        cur = q
        for k in scales:
            if k <= q.k:
                continue
            idx = ancestor_index(cur, k)
            cur = DyadicCube(q.shift, k, idx)
            hit = by_scale[k].get(idx)
            if hit is not None:
                tree_children[hit].append(q)
                break
    return tree_children


def carleson_constant(F: CubeFamily) -> Fraction:
    """Exact sup over Q in F of (sum of |Q'| over family cubes Q' inside Q) / |Q|."""
    if len(F) == 0:
        raise ValueError("empty family")
    by_scale: dict[int, set[tuple]] = {}
    for q in F:
        by_scale.setdefault(q.k, set()).add(q.m)
    scales = sorted(by_scale)
    packed: dict[DyadicCube, Fraction] = {q: q.measure for q in F}
    for q in F:
        cur_idx, cur_k = q.m, q.k
        for k in scales:
            if k <= q.k:
                continue
            cur = DyadicCube(q.shift, cur_k, cur_idx)
            cur_idx = ancestor_index(cur, k)
            cur_k = k
            if cur_idx in by_scale[k]:
                packed[DyadicCube(q.shift, k, cur_idx)] += q.measure
    return max(packed[q] / q.measure for q in F)


# --- witness bookkeeping in finest-scale integer boxes ----------------------

Boxes = list[tuple[tuple[int, int], ...]]  # per-axis half-open index ranges


def _cube_box(q: DyadicCube, k_min: int) -> tuple[tuple[int, int], ...]:
    lo = q.descendant_lo_index(k_min)
    w = 2 ** (q.k - k_min)
    return tuple((a, a + w) for a in lo)


def _box_measure(box) -> int:
    out = 1
    for a, b in box:
        out *= b - a
    return out


def _box_subtract(box, hole) -> Boxes:
    """box minus hole, as disjoint boxes (guillotine split per axis)."""
    clipped = []
    for (a, b), (ha, hb) in zip(box, hole):
        lo, hi = max(a, ha), min(b, hb)
        if lo >= hi:
            return [box]
        clipped.append((lo, hi))
    pieces = []
    cur = list(box)
    for ax, ((a, b), (lo, hi)) in enumerate(zip(box, clipped)):
        if a < lo:
            pieces.append(tuple(cur[:ax]) + ((a, lo),) + tuple(cur[ax + 1:]))
        if hi < b:
            pieces.append(tuple(cur[:ax]) + ((hi, b),) + tuple(cur[ax + 1:]))
        cur[ax] = (lo, hi)
    return pieces


def _region_subtract(region: Boxes, hole) -> Boxes:
    out: Boxes = []
    for box in region:
        out.extend(_box_subtract(box, hole))
    return out


def _carve_box(box, amount: int) -> tuple[Boxes, Boxes]:
    """Split ``amount`` cells off one box, row-major.  Requires 0 < amount < measure."""
    (a, b) = box[0]
    if len(box) == 1:
        return [((a, a + amount),)], [((a + amount, b),)]
    row_m = _box_measure(box[1:])
    rows, rem = divmod(amount, row_m)
    taken: Boxes = []
    rest: Boxes = []
    if rows:
        taken.append(((a, a + rows),) + box[1:])
    if rem:
        t2, r2 = _carve_box(box[1:], rem)
        taken.extend(((a + rows, a + rows + 1),) + t for t in t2)
        rest.extend(((a + rows, a + rows + 1),) + r for r in r2)
        rows += 1
    if a + rows < b:
        rest.append(((a + rows, b),) + box[1:])
    return taken, rest


def _carve(region: Boxes, amount: int) -> tuple[Boxes, Boxes]:
    """Split off boxes of total measure ``amount`` (leftmost-first, deterministic)."""
    taken: Boxes = []
    rest: Boxes = []
    for box in sorted(region):
        mb = _box_measure(box)
        if amount <= 0:
            rest.append(box)
        elif mb <= amount:
            taken.append(box)
            amount -= mb
        else:
            t, r = _carve_box(box, amount)
            taken.extend(t)
            rest.extend(r)
            amount = 0
    return taken, rest


@dataclass
class SparseCollection:
    """A cube family with certified density ``eta`` and optional witness sets.

    Witnesses are unions of scale-``witness_scale`` dyadic cells (integer index
    boxes).  When present they are pairwise disjoint, contained in their cube,
    and of measure at least ``eta`` times the cube's.
    """

    family: CubeFamily
    eta: float
    witness: Optional[dict[DyadicCube, Boxes]] = field(default=None, repr=False)
    witness_scale: Optional[int] = None

    def validate(self) -> None:
        if not (0 < self.eta <= 1):
            raise ValueError("eta must lie in (0,1]")
        if self.witness is None:
            return
        seen: Boxes = []
        for q in self.family:
            boxes = self.witness[q]
            qbox = _cube_box(q, self.witness_scale)
            total = 0
            for box in boxes:
                if any(b[0] < c[0] or b[1] > c[1] for b, c in zip(box, qbox)):
                    raise AssertionError(f"witness box {box} escapes its cube {q}")
                total += _box_measure(box)
            if Fraction(total, _box_measure(qbox)) < Fraction(*float(self.eta).as_integer_ratio()):
                raise AssertionError(f"witness of {q} smaller than eta fraction")
            for box in boxes:
                for other in seen:
                    if all(max(a, c) < min(b, d) for (a, b), (c, d) in zip(box, other)):
                        raise AssertionError("witness boxes overlap")
            seen.extend(boxes)


@dataclass
class CertifyFailure:
    """Greedy and exact assignment both failed; carries the worst-packed chain."""

    eta: float
    best_eta: float
    chain: list[DyadicCube]

    def __bool__(self):
        return False


def _dinic_maxflow(n_nodes, edges, source, sink):
    """Integer max-flow (Dinic).  edges: list of [u, v, cap]; returns (flow, edge flows)."""
    graph = [[] for _ in range(n_nodes)]
    cap = []
    for u, v, c in edges:
        graph[u].append((v, len(cap)))
        cap.append(c)
        graph[v].append((u, len(cap)))
        cap.append(0)
    flow = 0
    while True:
        level = [-1] * n_nodes
        level[source] = 0
        queue = [source]
        for u in queue:
            for v, eid in graph[u]:
                if cap[eid] > 0 and level[v] < 0:
                    level[v] = level[u] + 1
                    queue.append(v)
        if level[sink] < 0:
            break
        it = [0] * n_nodes

        def dfs(u, pushed):
            if u == sink:
                return pushed
            while it[u] < len(graph[u]):
                v, eid = graph[u][it[u]]
                if cap[eid] > 0 and level[v] == level[u] + 1:
                    got = dfs(v, min(pushed, cap[eid]))
                    if got:
                        cap[eid] -= got
                        cap[eid ^ 1] += got
                        return got
                it[u] += 1
            return 0

        while True:
            pushed = dfs(source, 1 << 62)
            if not pushed:
                break
            flow += pushed
    flows = [cap[2 * i + 1] for i in range(len(edges))]
    return flow, flows


def certify_sparse(F: CubeFamily, eta: float, cell_scale: int | None = None):
    """Construct explicit witness sets of density ``eta`` for the family.

    Greedy pass first: each cube keeps its portion not covered by smaller
    family members (largest cubes first, ties by index; the sets this produces
    are disjoint by construction).  If some cube is left with less than an
    ``eta`` fraction, falls back to an exact assignment of witness cells via
    integer max-flow over the atom decomposition, which succeeds precisely
    when an ``eta``-witness exists at the cell resolution.  Witness cells are
    dyadic subcubes at ``cell_scale`` (default: four levels below the finest
    family scale, so densities are resolved to 1/16 per axis).  Returns a
    :class:`SparseCollection` or a :class:`CertifyFailure` carrying the most
    overpacked nested chain.
    """
    if not (0 < eta < 1):
        raise ValueError("eta must lie in (0,1)")
    if len(F) == 0:
        raise ValueError("empty family")
    k_min = F.min_scale - 4 if cell_scale is None else min(cell_scale, F.min_scale)
    tree = _family_tree(F)
    boxes = {q: _cube_box(q, k_min) for q in F}
    cells = {q: _box_measure(boxes[q]) for q in F}
    eta_fr = Fraction(*float(eta).as_integer_ratio())

    free_region: dict[DyadicCube, Boxes] = {}
    avail: dict[DyadicCube, int] = {}
    for q in F:
        region = [boxes[q]]
        for child in tree[q]:
            region = _region_subtract(region, boxes[child])
        free_region[q] = region
        avail[q] = sum(_box_measure(b) for b in region)

    greedy_eta = min(Fraction(avail[q], cells[q]) for q in F)
    if greedy_eta >= eta_fr:
        witness = {q: sorted(free_region[q]) for q in F}
        coll = SparseCollection(F, float(eta), witness, k_min)
        return coll

    # exact assignment: cubes draw mass from their own free atom and those of
    # all family descendants
    order = sorted(F, key=lambda q: (-q.k, q.m))
    qid = {q: i for i, q in enumerate(order)}
    expanded: dict[DyadicCube, list[DyadicCube]] = {}

    def collect(q):
        if q in expanded:
            return expanded[q]
        out = [q]
        for child in tree[q]:
            out.extend(collect(child))
        expanded[q] = out
        return out

    nq = len(order)
    source, sink = 2 * nq, 2 * nq + 1
    edges = []
    demand_total = 0
    for q in order:
        d = math.ceil(cells[q] * eta_fr)
        demand_total += d
        edges.append([source, qid[q], d])
    for q in order:
        for dqube in collect(q):
            edges.append([qid[q], nq + qid[dqube], 1 << 60])
    for q in order:
        edges.append([nq + qid[q], sink, avail[q]])
    flow, eflows = _dinic_maxflow(2 * nq + 2, edges, source, sink)

    if flow < demand_total:
        worst = max(F, key=lambda q: _packing_ratio(F, q))
        chain = [worst]
        cur = worst
        while tree[cur]:
            cur = max(tree[cur], key=lambda c: c.measure)
            chain.append(cur)
        best = _best_eta_flow(F, tree, boxes, cells, avail, order, qid, collect)
        return CertifyFailure(eta=eta, best_eta=best, chain=chain)

    # extract witness boxes from the flow, carving atoms deterministically
    atom_free = {q: sorted(free_region[q]) for q in order}
    witness: dict[DyadicCube, Boxes] = {q: [] for q in order}
    eidx = nq  # first cube->atom edge index
    for q in order:
        for dqube in collect(q):
            amt = eflows[eidx]
            eidx += 1
            if amt > 0:
                taken, rest = _carve(atom_free[dqube], amt)
                witness[q].extend(taken)
                atom_free[dqube] = rest
    coll = SparseCollection(F, float(eta), witness, k_min)
    return coll


def _packing_ratio(F: CubeFamily, q: DyadicCube) -> Fraction:
    total = Fraction(0)
    for other in F:
        if q.contains_cube(other):
            total += other.measure
    return total / q.measure


def _best_eta_flow(F, tree, boxes, cells, avail, order, qid, collect) -> float:
    """Largest feasible eta, by bisection over the exact flow test."""
    lo, hi = 0.0, 1.0
    nq = len(order)
    source, sink = 2 * nq, 2 * nq + 1
    for _ in range(20):
        mid = 0.5 * (lo + hi)
        eta_fr = Fraction(*mid.as_integer_ratio())
        edges = []
        demand = 0
        for q in order:
            d = math.ceil(cells[q] * eta_fr)
            demand += d
            edges.append([source, qid[q], d])
        for q in order:
            for dq in collect(q):
                edges.append([qid[q], nq + qid[dq], 1 << 60])
        for q in order:
            edges.append([nq + qid[q], sink, avail[q]])
        flow, _ = _dinic_maxflow(2 * nq + 2, edges, source, sink)
        if flow >= demand:
            lo = mid
        else:
            hi = mid
    return lo


# --- text serialization ------------------------------------------------------

def family_to_lines(F: CubeFamily) -> list[str]:
    """One cube per line: ``shift k m1 [m2]`` with the shift digits concatenated."""
    out = []
    for q in F:
        shift = "".join(str(c) for c in q.shift.v)
        out.append(" ".join([shift, str(q.k)] + [str(mi) for mi in q.m]))
    return out


def family_from_lines(lines: Iterable[str]) -> CubeFamily:
    cubes = []
    for line in lines:
        parts = line.split()
        if not parts:
            continue
        shift = GridShift(tuple(int(c) for c in parts[0]))
        k = int(parts[1])
        m = tuple(int(t) for t in parts[2:])
        cubes.append(DyadicCube(shift, k, m))
    return CubeFamily(cubes)


def certificate_lines(coll: SparseCollection) -> list[str]:
    """``cube -> cell-index ranges`` at the witness scale (row-major boxes)."""
    out = [f"# witness cells at scale {coll.witness_scale}"]
    for q in coll.family:
        shift = "".join(str(c) for c in q.shift.v)
        head = " ".join([shift, str(q.k)] + [str(mi) for mi in q.m])
        if coll.witness is None:
            out.append(f"{head} -> (measure only)")
            continue
        ranges = ";".join(
            ",".join(f"{a}-{b}" for a, b in box) for box in coll.witness[q]
        )
        out.append(f"{head} -> {ranges}")
    return out
