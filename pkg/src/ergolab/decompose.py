"""Grid-resolution attractor decomposition.

The map is replaced by an outer-approximation transition graph on grid
cells; attractors are terminal strongly connected components, and the
basin of an attractor is the set of cells whose only reachable terminal
component is that one.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from . import _rng
from .grid import GridPartition
from .io import write_csv
from .systems import Space, System

# inset used for the upper corner of half-open cells: the sample stays inside
_INSET = 1e-9


@dataclass(frozen=True, eq=False)
class TransitionGraph:
    grid: GridPartition
    adjacency: sparse.csr_matrix
    samples_per_cell: int
    padding: int

    @property
    def n_cells(self) -> int:
        return self.grid.n_cells

    def successors(self, cell: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[cell]:a.indptr[cell + 1]]

    def edges(self) -> np.ndarray:
        coo = self.adjacency.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return np.stack([coo.row[order], coo.col[order]], axis=1)

    def reachable(self, cell: int) -> np.ndarray:
        return np.sort(csgraph.breadth_first_order(self.adjacency, cell, directed=True,
                                                   return_predecessors=False))

    @cached_property
    def scc_labels(self) -> tuple[int, np.ndarray]:
        return csgraph.connected_components(self.adjacency, directed=True, connection="strong")

    def write_edges_csv(self, path):
        return write_csv(path, ["src", "dst"], self.edges().tolist())


def _cell_samples(grid: GridPartition, seed: int) -> np.ndarray:
    """Sample points per cell, shape (n_cells, s, d).

    Corners of the cell (upper corners inset unless the cell is closed on
    that side, i.e. the last cell of an interval factor), the centre, and
    ``2^d`` hash-jittered points.
    """
    d = grid.dim
    n = grid.n_cells
    lo = grid.lower_corners()
    w = grid.widths
    multi = grid.unravel(np.arange(n))
    shape = np.asarray(grid.shape)
    per = np.asarray(grid.space.periodic)
    closed_hi = (~per) & (multi == shape - 1)
    up = np.where(closed_hi, lo + w, lo + w * (1.0 - _INSET))

    corners = []
    for bits in range(2 ** d):
        sel = np.array([(bits >> (d - 1 - c)) & 1 for c in range(d)], dtype=bool)
        corners.append(np.where(sel, up, lo))
    pts = corners + [lo + 0.5 * w]
    cells = np.arange(n)
    for k in range(2 ** d):
        jit = np.stack([_rng.hash_uniform(seed, _rng.STREAM_JITTER, cells, k * d + c) for c in range(d)], axis=-1)
        pts.append(lo + jit * w)
    return np.stack(pts, axis=1)


def build_transition_graph(system: System, m, samples: int | None = None, padding: int = 1,
                           seed: int = 0) -> TransitionGraph:
    """Outer approximation of ``system`` on an ``m``-per-axis grid.

    ``samples`` (default: all corners + centre + ``2^d`` jittered points)
    caps the number of sample points per cell, taken in that order.
    """
    grid = GridPartition.of(system.space, m)
    if min(grid.shape) < 8:
        raise ValueError("resolution must be >= 8 per axis")
    if padding not in (0, 1):
        raise ValueError("padding must be 0 or 1")
    pts = _cell_samples(grid, seed)
    if samples is not None:
        if samples < 4:
            raise ValueError("need at least 4 samples per cell")
        pts = pts[:, :samples]
    n, s, d = pts.shape
    flat = pts.reshape(-1, d)
    images = system.apply(flat[:, 0] if d == 1 else flat)
    img_multi = grid.multi_of(images)
    targets = grid.dilate(img_multi, padding)  # (n*s, k)
    src = np.repeat(np.arange(n), s * targets.shape[1])
    dst = targets.reshape(-1)
    adj = sparse.csr_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(n, n))
    adj.data[:] = 1
    adj.sort_indices()
    return TransitionGraph(grid, adj, s, padding)


@dataclass(frozen=True, eq=False)
class AttractorReport:
    attractors: tuple[frozenset, ...]
    basins: tuple[frozenset, ...]
    undecided: frozenset
    omega: frozenset
    fat: tuple[bool, ...]
    inscribed_radius: tuple[float, ...]
    grid: GridPartition

    @property
    def count(self) -> int:
        return len(self.attractors)

    def labels(self) -> np.ndarray:
        """Per-cell basin label: attractor index, or -1 for undecided cells."""
        lab = np.full(self.grid.n_cells, -1, dtype=np.int64)
        for j, b in enumerate(self.basins):
            lab[list(b)] = j
        return lab

    def to_dict(self):
        return {"count": self.count, "m": list(self.grid.shape),
                "attractors": [sorted(a) for a in self.attractors],
                "fat": list(self.fat), "inscribed_radius": list(self.inscribed_radius),
                "basin_labels": self.labels().tolist(),
                "undecided": sorted(self.undecided), "omega": sorted(self.omega)}

    def write_raster_csv(self, path):
        return write_csv(path, ["cell", "label"], enumerate(self.labels().tolist()))


def _inscribed_half_width(cells: frozenset, grid: GridPartition) -> int:
    """Largest j such that some (2j+1)^d cube of cells lies in ``cells``."""
    mask = np.zeros(grid.n_cells, dtype=bool)
    mask[list(cells)] = True
    mask = mask.reshape(grid.shape)
    j = 0
    limit = max(grid.shape)
    while j < limit:
        nxt = mask
        # sequential axis erosions give the full Chebyshev erosion
        for ax, per in enumerate(grid.space.periodic):
            nxt = _erode_axis(nxt, ax, per)
        if not nxt.any():
            break
        if np.array_equal(nxt, mask):  # whole periodic space
            return limit
        mask = nxt
        j += 1
    return j


def _erode_axis(mask: np.ndarray, ax: int, per: bool) -> np.ndarray:
    out = mask.copy()
    for shift in (1, -1):
        if per:
            nb = np.roll(mask, shift, axis=ax)
        else:
            nb = np.ones_like(mask)
            src = [slice(None)] * mask.ndim
            dst = [slice(None)] * mask.ndim
            if shift == 1:
                src[ax], dst[ax] = slice(None, -1), slice(1, None)
            else:
                src[ax], dst[ax] = slice(1, None), slice(None, -1)
            nb[tuple(dst)] = mask[tuple(src)]
        out &= nb
    return out


def _has_block(cells: frozenset, grid: GridPartition, k: int) -> bool:
    """True if ``cells`` contains a full k^d block (wrap-aware on circle factors)."""
    mask = np.zeros(grid.n_cells, dtype=bool)
    mask[list(cells)] = True
    mask = mask.reshape(grid.shape)
    acc = mask.copy()
    for ax, per in enumerate(grid.space.periodic):
        cur = acc.copy()
        for s in range(1, k):
            if per:
                cur &= np.roll(acc, -s, axis=ax)
            else:
                sh = np.zeros_like(acc)
                src = [slice(None)] * acc.ndim
                dst = [slice(None)] * acc.ndim
                src[ax], dst[ax] = slice(s, None), slice(None, -s)
                sh[tuple(dst)] = acc[tuple(src)]
                cur &= sh
        acc = cur
    return bool(acc.any())


def attractors_and_basins(graph: TransitionGraph, fat_block: int = 2) -> AttractorReport:
    """Terminal SCCs, their basins, undecided cells and the nonwandering estimate."""
    n_comp, labels = graph.scc_labels
    cond, order = acyclic_condensation(graph)
    out_deg = np.diff(cond.indptr)
    terminal = np.flatnonzero(out_deg == 0)
    term_index = {int(c): i for i, c in enumerate(terminal)}

    # reachable terminal set per component, as bitmasks, in reverse topological order
    reach = [0] * n_comp
    for c in reversed(order):
        if c in term_index:
            reach[c] = 1 << term_index[c]
        else:
            r = 0
            for s in cond.indices[cond.indptr[c]:cond.indptr[c + 1]]:
                r |= reach[s]
            reach[c] = r

    members = [[] for _ in range(n_comp)]
    for cell, c in enumerate(labels):
        members[c].append(cell)
    attractors = tuple(frozenset(members[c]) for c in terminal)
    basins = [set() for _ in terminal]
    undecided = set()
    for c in range(n_comp):
        r = reach[c]
        if r == 0:
            raise AssertionError("component reaches no terminal component")
        if r & (r - 1):
            undecided.update(members[c])
        else:
            basins[r.bit_length() - 1].update(members[c])

    sizes = np.bincount(labels, minlength=n_comp)
    selfloop = graph.adjacency.diagonal() > 0
    omega = frozenset(np.flatnonzero((sizes[labels] > 1) | selfloop).tolist())

    grid = graph.grid
    fat = tuple(_has_block(a, grid, fat_block) for a in attractors)
    cap = 0.5 * grid.space.diameter
    radius = tuple(min(cap, (2 * _inscribed_half_width(a, grid) + 1) / (2.0 * max(grid.shape)))
                   for a in attractors)
    return AttractorReport(attractors, tuple(frozenset(b) for b in basins), frozenset(undecided),
                           omega, fat, radius, grid)


def acyclic_condensation(graph: TransitionGraph) -> tuple[sparse.csr_matrix, list[int]]:
    """Condensation (component graph) and a topological order of it.

    Raises AssertionError if the condensation has a cycle, which would mean
    the SCC labelling is wrong.
    """
    n_comp, labels = graph.scc_labels
    adj = graph.adjacency.tocoo()
    cross = labels[adj.row] != labels[adj.col]
    cond = sparse.csr_matrix((np.ones(int(cross.sum()), dtype=np.int8),
                              (labels[adj.row[cross]], labels[adj.col[cross]])), shape=(n_comp, n_comp))
    cond.data[:] = 1
    return cond, _topological_order(cond)


def _topological_order(cond: sparse.csr_matrix) -> list[int]:
    n = cond.shape[0]
    indeg = np.bincount(cond.indices, minlength=n)
    stack = [int(v) for v in np.flatnonzero(indeg == 0)[::-1]]
    order = []
    indeg = indeg.copy()
    while stack:
        v = stack.pop()
        order.append(v)
        for s in cond.indices[cond.indptr[v]:cond.indptr[v + 1]]:
            indeg[s] -= 1
            if indeg[s] == 0:
                stack.append(int(s))
    if len(order) != n:
        raise AssertionError("condensation has a cycle")
    return order


def strong_transitivity_check(graph: TransitionGraph) -> tuple[bool, tuple[int, int] | None]:
    """Whether every cell reaches every cell.

    On failure the witness is ``(source, target)``: the smallest cell whose
    forward-reachable set is incomplete and the largest cell it misses.
    """
    n_comp, _ = graph.scc_labels
    if n_comp == 1:
        return True, None
    for cell in range(graph.n_cells):
        r = graph.reachable(cell)
        if len(r) < graph.n_cells:
            missing = np.setdiff1d(np.arange(graph.n_cells), r)
            return False, (cell, int(missing[-1]))
    raise AssertionError("several SCCs but every cell reaches everything")


def large_omega_estimate(graph: TransitionGraph, cell: int) -> frozenset:
    """Cells on cycles reachable from ``cell``."""
    n_comp, labels = graph.scc_labels
    sizes = np.bincount(labels, minlength=n_comp)
    selfloop = graph.adjacency.diagonal() > 0
    r = graph.reachable(cell)
    on_cycle = (sizes[labels[r]] > 1) | selfloop[r]
    return frozenset(r[on_cycle].tolist())


def sensitive_dependence_estimate(system: System, A, m, n_max: int = 10, eps_grid: float | None = None,
                                  samples: int = 16, max_centres: int = 64) -> float:
    """Lower estimate of the sensitivity constant on the cell set ``A``.

    For each centre (cell midpoints of ``A``, at most ``max_centres`` of
    them evenly spread) the ball ``B_eps(x)`` is sampled on a uniform
    lattice with spacing ``eps/samples`` per axis, restricted to ``A``, and
    iterated ``n_max`` times; the largest diameter reached is recorded. The
    minimum over centres is returned.
    """
    grid = GridPartition.of(system.space, m)
    A = np.array(sorted(A), dtype=np.int64)
    if A.size == 0:
        raise ValueError("A must be nonempty")
    if eps_grid is None:
        eps_grid = 1.0 / max(grid.shape)
    full_A = np.zeros(grid.n_cells, dtype=bool)
    full_A[A] = True
    if A.size > max_centres:
        A = A[np.linspace(0, A.size - 1, max_centres).round().astype(int)]
    d = grid.dim
    ticks = np.arange(-samples, samples + 1) * (eps_grid / samples)
    offs = np.stack(np.meshgrid(*[ticks] * d, indexing="ij"), -1).reshape(-1, d)
    offs = offs[np.sqrt((offs ** 2).sum(axis=1)) < eps_grid + 1e-15]
    space = system.space
    best = np.inf
    for c in A:
        centre = grid.lower_corners([c])[0] + 0.5 * grid.widths
        pts = space.reduce(centre[None, :] + offs)
        pts = pts[full_A[grid.cell_of(pts)]]
        cur = pts[:, 0] if d == 1 else pts
        diam = _diameter(space, cur)
        for _ in range(n_max):
            cur = system.apply(cur)
            diam = max(diam, _diameter(space, cur))
        best = min(best, diam)
    return float(best)


def _diameter(space: Space, pts: np.ndarray) -> float:
    if len(pts) < 2:
        return 0.0
    if space.dim == 1:
        return float(space.distance(pts[:, None], pts[None, :]).max())
    return float(space.distance(pts[:, None, :], pts[None, :, :]).max())
