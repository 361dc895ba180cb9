"""Birkhoff averages, empirical measures and statistical spectra.

Finite-budget conventions used throughout:

* running averages are sampled on a geometric checkpoint schedule
  ``n_k = ceil(ratio^k)`` (always including the budget ``N``);
* "limsup"/"liminf" are the extrema over checkpoints ``n_k >= tail_start``
  (default ``ceil(sqrt(N))``);
* measures live on a uniform grid; integrals against them use cell
  midpoints.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .grid import GridPartition
from .io import write_csv
from .systems import OrbitTruncated, Space, System, orbit

MIN_TAIL_CHECKPOINTS = 20


class BudgetError(ValueError):
    """Budget too small for the requested estimate."""


class ContractError(ValueError):
    """Inputs violate an operation's preconditions (e.g. grid mismatch)."""


# ---------------------------------------------------------------------------
# schedules and orbits
# ---------------------------------------------------------------------------

def checkpoint_schedule(N: int, ratio: float = 1.05) -> np.ndarray:
    """Sorted unique checkpoints ``ceil(ratio^k) <= N``, plus ``N`` itself."""
    if N < 1:
        raise BudgetError("budget must be >= 1")
    if ratio <= 1.0:
        raise ValueError("checkpoint ratio must exceed 1")
    kmax = int(math.log(N) / math.log(ratio)) + 2
    pts = np.ceil(ratio ** np.arange(kmax)).astype(np.int64)
    pts = np.unique(np.append(pts[pts <= N], N))
    return pts


def default_tail_start(N: int) -> int:
    return int(math.ceil(math.sqrt(N)))


def orbit_points(system: System, x0, N: int) -> tuple[np.ndarray, str | None]:
    """Orbit plus truncation reason (``None`` if complete)."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", OrbitTruncated)
        pts = orbit(system, x0, N)
    reason = None
    for w in caught:
        if isinstance(w.message, OrbitTruncated):
            reason = w.message.reason
    return pts, reason


def _segment_sums(values: np.ndarray, cps: np.ndarray) -> np.ndarray:
    """Compensated running sums at each checkpoint."""
    partial = []
    out = np.empty(len(cps))
    prev = 0
    for i, n in enumerate(cps):
        partial.append(math.fsum(values[prev:n].tolist()))
        out[i] = math.fsum(partial)
        prev = n
    return out


# ---------------------------------------------------------------------------
# test functions and the weak-* metric
# ---------------------------------------------------------------------------

def harmonic(k: int, kind: str = "cos", coord: int | None = None, periodic: bool = True) -> Callable:
    """Rescaled harmonic ``(1 + cos(2 pi k x))/2`` (or ``sin``), range [0, 1].

    On interval coordinates (``periodic=False``) the frequency is halved,
    ``(1 + cos(pi k x))/2``, so that the family separates 0 from 1.
    """
    trig = {"cos": np.cos, "sin": np.sin}[kind]
    w = (2.0 if periodic else 1.0) * math.pi * k

    def fn(x):
        x = np.asarray(x, dtype=float)
        if coord is not None:
            x = x[..., coord]
        return 0.5 * (1.0 + trig(w * x))

    fn.__name__ = f"{kind}{k}" + ("" if coord is None else f"_x{coord}")
    return fn


@dataclass(frozen=True)
class TestFunctionFamily:
    """Ordered functions ``X -> [0, 1]`` with weights ``2^-n``, truncated at M."""

    __test__ = False  # not a pytest class

    functions: tuple[Callable, ...]
    names: tuple[str, ...]

    @classmethod
    def harmonics(cls, space: Space, M: int = 16) -> "TestFunctionFamily":
        """Default family: per frequency k, per coordinate, cos then sin."""
        if M < 1:
            raise ValueError("truncation order M must be >= 1")
        funcs = []
        k = 1
        while len(funcs) < M:
            for c, per in enumerate(space.periodic):
                coord = None if space.dim == 1 else c
                for kind in ("cos", "sin"):
                    funcs.append(harmonic(k, kind, coord, per))
            k += 1
        funcs = funcs[:M]
        return cls(tuple(funcs), tuple(f.__name__ for f in funcs))

    @classmethod
    def of(cls, functions: Sequence[Callable]) -> "TestFunctionFamily":
        return cls(tuple(functions), tuple(getattr(f, "__name__", f"f{i}") for i, f in enumerate(functions)))

    @property
    def M(self) -> int:
        return len(self.functions)

    @property
    def weights(self) -> np.ndarray:
        return 0.5 ** np.arange(1, self.M + 1)

    def table(self, points) -> np.ndarray:
        """Function values, shape (M, n_points)."""
        return np.stack([np.broadcast_to(f(points), np.shape(points)[:1]) for f in self.functions])


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Normalised histogram of orbit points on a uniform grid."""

    grid: GridPartition
    masses: np.ndarray
    n: int

    def __post_init__(self):
        if self.masses.shape != (self.grid.n_cells,):
            raise ContractError("mass vector does not match the grid")
        if np.any(self.masses < 0) or abs(self.masses.sum() - 1.0) > 1e-12:
            raise ContractError("masses must be nonnegative and sum to 1")

    @property
    def m(self) -> tuple[int, ...]:
        return self.grid.shape

    def support(self, mass_floor: float = 0.0) -> frozenset[int]:
        mask = self.masses >= mass_floor if mass_floor > 0 else self.masses > 0
        return frozenset(np.flatnonzero(mask).tolist())

    def integrals(self, family: TestFunctionFamily) -> np.ndarray:
        return family.table(self.grid.midpoints()) @ self.masses

    def to_dict(self):
        nz = np.flatnonzero(self.masses)
        return {"m": list(self.grid.shape), "n": self.n,
                "cells": nz.tolist(), "masses": self.masses[nz].tolist()}


def measure_distance(mu: EmpiricalMeasure, nu: EmpiricalMeasure,
                     family: TestFunctionFamily | None = None) -> float:
    """Truncated weak-* distance ``sum_n 2^-n |int phi_n dmu - int phi_n dnu|``."""
    if mu.grid != nu.grid:
        raise ContractError("measures live on different grids")
    if family is None:
        family = TestFunctionFamily.harmonics(mu.grid.space)
    diff = family.table(mu.grid.midpoints()) @ (mu.masses - nu.masses)
    return float(np.sum(family.weights * np.abs(diff)))


def _integral_distance(a: np.ndarray, b: np.ndarray, weights: np.ndarray) -> float:
    return float(np.sum(weights * np.abs(a - b)))


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OscillationReport:
    limsup: float
    liminf: float
    budget: int
    tail_start: int
    checkpoints: tuple[int, ...]
    averages: tuple[float, ...]
    truncated: str | None = None

    @property
    def gap(self) -> float:
        return self.limsup - self.liminf

    def to_dict(self):
        return {"limsup": self.limsup, "liminf": self.liminf, "gap": self.gap,
                "budget": self.budget, "tail_start": self.tail_start,
                "checkpoints": list(self.checkpoints), "averages": list(self.averages),
                "truncated": self.truncated}


@dataclass(frozen=True, eq=False)
class SpectrumEstimate:
    """Greedy clusters of tail checkpoint measures.

    ``representatives[i]`` is the first tail measure farther than ``eps_c``
    from all earlier representatives; ``hits[i]`` counts tail checkpoints
    assigned to it.
    """

    representatives: tuple[EmpiricalMeasure, ...]
    hits: tuple[int, ...]
    first_seen: tuple[int, ...]
    checkpoints: tuple[int, ...]
    tail_start: int
    eps_c: float
    burn_in: int
    distance_to_first: tuple[float, ...]
    family: TestFunctionFamily = field(repr=False)
    truncated: str | None = None

    def pairwise_distances(self) -> np.ndarray:
        k = len(self.representatives)
        ints = [r.integrals(self.family) for r in self.representatives]
        out = np.zeros((k, k))
        for i in range(k):
            for j in range(i + 1, k):
                out[i, j] = out[j, i] = _integral_distance(ints[i], ints[j], self.family.weights)
        return out

    def accumulating(self, min_hits: int = 2) -> list[int]:
        """Indices of representatives hit at least ``min_hits`` times in the tail."""
        return [i for i, h in enumerate(self.hits) if h >= min_hits]

    def to_dict(self):
        return {"n_representatives": len(self.representatives), "hits": list(self.hits),
                "first_seen": list(self.first_seen), "eps_c": self.eps_c,
                "tail_start": self.tail_start, "burn_in": self.burn_in,
                "pairwise_distances": self.pairwise_distances().tolist(),
                "representatives": [r.to_dict() for r in self.representatives],
                "truncated": self.truncated}


def write_checkpoint_csv(path, report: OscillationReport, spectrum: SpectrumEstimate | None = None):
    """One row per checkpoint: n, running average, distance to the first checkpoint measure."""
    dist = {}
    if spectrum is not None:
        dist = dict(zip(spectrum.checkpoints, spectrum.distance_to_first))
    rows = [(n, a, dist.get(n, "")) for n, a in zip(report.checkpoints, report.averages)]
    return write_csv(path, ["n", "average", "d_to_first"], rows)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def birkhoff_series(system: System, x0, phi: Callable, N: int, ratio: float = 1.05,
                    tail_start: int | None = None, points: np.ndarray | None = None) -> OscillationReport:
    """Running Birkhoff averages of ``phi`` with limsup/liminf estimates.

    ``points`` may carry a precomputed orbit of ``system`` from ``x0``.
    """
    if N < 2:
        raise BudgetError("birkhoff_series needs N >= 2")
    reason = None
    if points is None:
        points, reason = orbit_points(system, x0, N)
    points = points[:N]
    n_avail = len(points)
    if tail_start is None:
        tail_start = default_tail_start(N)
    cps = checkpoint_schedule(n_avail, ratio)
    vals = np.asarray(phi(points), dtype=float)
    avgs = _segment_sums(vals, cps) / cps
    tail = avgs[cps >= tail_start]
    if tail.size == 0:
        tail = avgs[-1:]
    return OscillationReport(float(tail.max()), float(tail.min()), N, tail_start,
                             tuple(int(c) for c in cps), tuple(float(a) for a in avgs), reason)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lo, hi)``; on circle coordinates it may wrap (lo < 0)."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    @classmethod
    def of(cls, lo, hi) -> "Box":
        return cls(tuple(np.atleast_1d(lo).astype(float).tolist()), tuple(np.atleast_1d(hi).astype(float).tolist()))

    def contains(self, space: Space, points) -> np.ndarray:
        p = np.asarray(points, dtype=float).reshape(-1, space.dim)
        inside = np.ones(len(p), dtype=bool)
        for c, per in enumerate(space.periodic):
            lo, hi = self.lo[c], self.hi[c]
            x = p[:, c]
            if per:
                inside &= True if hi - lo >= 1.0 else np.mod(x - lo, 1.0) < hi - lo
            else:
                inside &= (x >= lo) & ((x <= hi) if hi >= 1.0 else (x < hi))
        return inside


@dataclass(frozen=True)
class CellSet:
    grid: GridPartition
    cells: frozenset

    def contains(self, space: Space, points) -> np.ndarray:
        return np.isin(self.grid.cell_of(points), np.fromiter(self.cells, dtype=np.int64))


def visiting_frequency(system: System, x0, U: Box | CellSet, N: int, ratio: float = 1.05,
                       tail_start: int | None = None, points: np.ndarray | None = None) -> float:
    """Max over tail checkpoints of the fraction of orbit time spent in ``U``."""
    if points is None:
        points, _ = orbit_points(system, x0, N)
    points = points[:N]
    hits = U.contains(system.space, points).astype(np.int64)
    cps = checkpoint_schedule(len(points), ratio)
    counts = np.cumsum(hits)[cps - 1]
    freq = counts / cps
    ts = default_tail_start(N) if tail_start is None else tail_start
    tail = freq[cps >= ts]
    return float(tail.max() if tail.size else freq[-1])


def _histogram(grid: GridPartition, points: np.ndarray) -> np.ndarray:
    return np.bincount(grid.cell_of(points), minlength=grid.n_cells).astype(float)


def empirical_measure(system: System, x0, N: int, m, burn_in: int = 0,
                      points: np.ndarray | None = None) -> EmpiricalMeasure:
    """Histogram of ``f^j(x0)`` for ``burn_in <= j < N``."""
    if not N > burn_in >= 0:
        raise BudgetError("need N > burn_in >= 0")
    if points is None:
        points, _ = orbit_points(system, x0, N)
    pts = points[burn_in:N]
    if len(pts) == 0:
        raise BudgetError("orbit truncated before the burn-in ended")
    grid = GridPartition.of(system.space, m)
    h = _histogram(grid, pts)
    return EmpiricalMeasure(grid, h / h.sum(), len(pts))


def statistical_spectrum(system: System, x0, N: int, m, ratio: float = 1.05, eps_c: float = 0.05,
                         tail_start: int | None = None, family: TestFunctionFamily | None = None,
                         burn_in: int = 0, points: np.ndarray | None = None) -> SpectrumEstimate:
    """Approximate the set of weak-* accumulation points of the orbit's Cesaro measures.

    The measures are accumulated from ``f^burn_in(x0)`` on; checkpoint
    ``n`` covers orbit indices ``burn_in <= j < burn_in + n``. A finite
    burn-in does not change the accumulation set.
    """
    if points is None:
        points, reason = orbit_points(system, x0, N)
    else:
        reason = None
    seg = points[burn_in:N]
    n_avail = len(seg)
    if n_avail < 2:
        raise BudgetError("orbit too short for a spectrum")
    grid = GridPartition.of(system.space, m)
    if family is None:
        family = TestFunctionFamily.harmonics(system.space)
    if tail_start is None:
        tail_start = default_tail_start(N - burn_in)
    cps = checkpoint_schedule(n_avail, ratio)
    n_tail = int(np.sum(cps >= tail_start))
    if n_tail < MIN_TAIL_CHECKPOINTS:
        raise BudgetError(f"only {n_tail} tail checkpoints; need >= {MIN_TAIL_CHECKPOINTS} "
                          "(raise N or lower the checkpoint ratio)")
    cells = grid.cell_of(seg)
    table = family.table(grid.midpoints())
    w = family.weights

    counts = np.zeros(grid.n_cells)
    prev = 0
    reps: list[EmpiricalMeasure] = []
    rep_ints: list[np.ndarray] = []
    hits: list[int] = []
    first_seen: list[int] = []
    dist_first: list[float] = []
    first_int = None
    for n in cps:
        counts += np.bincount(cells[prev:n], minlength=grid.n_cells)
        prev = n
        masses = counts / n
        ints = table @ masses
        if first_int is None:
            first_int = ints
        dist_first.append(_integral_distance(ints, first_int, w))
        if n < tail_start:
            continue
        for i, r in enumerate(rep_ints):
            if _integral_distance(ints, r, w) < eps_c:
                hits[i] += 1
                break
        else:
            reps.append(EmpiricalMeasure(grid, masses / masses.sum(), int(n)))
            rep_ints.append(ints)
            hits.append(1)
            first_seen.append(int(n))
    return SpectrumEstimate(tuple(reps), tuple(hits), tuple(first_seen), tuple(int(c) for c in cps),
                            int(tail_start), float(eps_c), int(burn_in), tuple(dist_first), family, reason)


def statistical_omega_limit(spectrum: SpectrumEstimate, mass_floor: float = 1e-6) -> frozenset[int]:
    """Cells carrying mass >= ``mass_floor`` in some representative."""
    if mass_floor <= 0:
        raise ValueError("mass_floor must be positive")
    out: set[int] = set()
    for r in spectrum.representatives:
        out |= r.support(mass_floor)
    return frozenset(out)


def omega_limit_estimate(system: System, x0, N: int, m, tail_fraction: float = 0.5,
                         points: np.ndarray | None = None) -> frozenset[int]:
    """Cells visited by the last ``tail_fraction * N`` orbit points."""
    if not 0.0 < tail_fraction < 1.0:
        raise ValueError("tail_fraction must lie in (0, 1)")
    if points is None:
        points, _ = orbit_points(system, x0, N)
    points = points[:N]
    start = len(points) - int(math.ceil(tail_fraction * len(points)))
    grid = GridPartition.of(system.space, m)
    return frozenset(np.unique(grid.cell_of(points[start:])).tolist())
