"""Periodic-orbit ergodic optimisation and oscillating-orbit construction.

Periodic orbits of the doubling map and of hyperbolic toral automorphisms
are enumerated in exact integer arithmetic: a period-``p`` point is stored
as integer numerators over the common denominator ``D_p`` (``2^p - 1`` for
doubling, ``|det(M^p - I)|`` for the torus), and the map acts on numerators
modulo ``D_p``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .orbitstats import BudgetError
from .symbolic import BlockProgram
from .systems import CatMap, Doubling, System, UnsupportedFamilyError

MAX_PERIOD = {"doubling": 20, "cat_map": 12}
TIE_TOL = 1e-12


@dataclass(frozen=True)
class PeriodicOrbit:
    """Exact periodic orbit, listed from its smallest point in dynamical order."""

    period: int
    points: tuple
    word: str | None = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    @property
    def as_float(self) -> np.ndarray:
        return np.array([[float(c) for c in p] if isinstance(p, tuple) else float(p) for p in self.points])

    def average(self, phi: Callable) -> float:
        key = id(phi)
        if key not in self._cache:
            vals = np.asarray(phi(self.as_float), dtype=float)
            self._cache[key] = math.fsum(vals.tolist()) / self.period
        return self._cache[key]

    def sort_key(self):
        return (self.period, self.points[0])

    def to_dict(self):
        return {"period": self.period, "points": list(self.points), "word": self.word}


@dataclass(frozen=True)
class MaximizationResult:
    value: float
    witness: PeriodicOrbit
    max_period: int
    per_period: dict

    def to_dict(self):
        return {"value": self.value, "witness": self.witness.to_dict(),
                "max_period": self.max_period, "per_period_best": self.per_period}


# ---------------------------------------------------------------------------
# exact enumeration
# ---------------------------------------------------------------------------

def _matmul(A, B):
    return ((A[0][0] * B[0][0] + A[0][1] * B[1][0], A[0][0] * B[0][1] + A[0][1] * B[1][1]),
            (A[1][0] * B[0][0] + A[1][1] * B[1][0], A[1][0] * B[0][1] + A[1][1] * B[1][1]))


def smith_2x2(A):
    """Smith normal form ``U A V = diag(d1, d2)`` of an integer 2x2 matrix.

    Returns ``(d1, d2, V)`` with ``d1 | d2`` and ``V`` unimodular.
    """
    S = [list(A[0]), list(A[1])]
    U = [[1, 0], [0, 1]]
    V = [[1, 0], [0, 1]]

    def swap_rows():
        S[0], S[1] = S[1], S[0]
        U[0], U[1] = U[1], U[0]

    def swap_cols():
        for M in (S, V):
            for r in M:
                r[0], r[1] = r[1], r[0]

    def add_row(dst, src, q):  # row_dst -= q * row_src
        for M in (S, U):
            M[dst] = [M[dst][j] - q * M[src][j] for j in range(2)]

    def add_col(dst, src, q):  # col_dst -= q * col_src
        for M in (S, V):
            for r in M:
                r[dst] -= q * r[src]

    while True:
        entries = [(abs(S[i][j]), i, j) for i in range(2) for j in range(2) if S[i][j] != 0]
        if not entries:
            return 0, 0, V
        _, i, j = min(entries)
        if i == 1:
            swap_rows()
        if j == 1:
            swap_cols()
        p = S[0][0]
        add_row(1, 0, S[1][0] // p)
        add_col(1, 0, S[0][1] // p)
        if S[1][0] or S[0][1]:
            continue
        if S[1][1] % p:
            add_row(0, 1, -1)  # row0 += row1, then reduce again
            continue
        d1, d2 = abs(S[0][0]), abs(S[1][1])
        return d1, d2, V


def _doubling_orbits(p: int) -> tuple[int, np.ndarray]:
    """Numerators (n_orbits, p) of minimal-period-p orbits over ``2^p - 1``."""
    D = (1 << p) - 1
    seen = bytearray(D)
    rows = []
    for k in range(D):
        if seen[k]:
            continue
        orb = [k]
        seen[k] = 1
        j = (2 * k) % D
        while j != k:
            orb.append(j)
            seen[j] = 1
            j = (2 * j) % D
        if len(orb) == p:
            rows.append(orb)
    return D, np.array(rows, dtype=np.int64).reshape(-1, p)


def _torus_orbits(matrix, p: int) -> tuple[int, np.ndarray]:
    """Numerators (n_orbits, p, 2) of minimal-period-p orbits over ``|det(M^p - I)|``."""
    Mp = ((1, 0), (0, 1))
    for _ in range(p):
        Mp = _matmul(Mp, matrix)
    A = ((Mp[0][0] - 1, Mp[0][1]), (Mp[1][0], Mp[1][1] - 1))
    d1, d2, V = smith_2x2(A)
    D = d1 * d2
    if D == 0:
        raise UnsupportedFamilyError("M^p - I is singular; the map is not hyperbolic")
    # solutions x = V (a/d1, b/d2) mod 1, numerators over D
    pts = set()
    for a in range(d1):
        for b in range(d2):
            u = (V[0][0] * a * d2 + V[0][1] * b * d1) % D
            v = (V[1][0] * a * d2 + V[1][1] * b * d1) % D
            pts.add((u, v))
    (ma, mb), (mc, md) = matrix
    rows = []
    seen = set()
    for start in sorted(pts):
        if start in seen:
            continue
        orb = [start]
        seen.add(start)
        u, v = start
        u, v = (ma * u + mb * v) % D, (mc * u + md * v) % D
        while (u, v) != start:
            orb.append((u, v))
            seen.add((u, v))
            u, v = (ma * u + mb * v) % D, (mc * u + md * v) % D
        if len(orb) == p:
            rows.append(orb)
    return D, np.array(rows, dtype=np.int64).reshape(-1, p, 2)


def _orbit_tables(system: System, P: int):
    fam = "cat_map" if isinstance(system, CatMap) else "doubling" if isinstance(system, Doubling) else None
    if fam is None:
        raise UnsupportedFamilyError("periodic enumeration supports doubling and cat_map only")
    if not 1 <= P <= MAX_PERIOD[fam]:
        raise BudgetError(f"max period for {fam} must be in [1, {MAX_PERIOD[fam]}], got {P}")
    for p in range(1, P + 1):
        if fam == "doubling":
            yield p, *_doubling_orbits(p)
        else:
            yield p, *_torus_orbits(system.matrix, p)


def _make_orbit(p: int, D: int, row: np.ndarray) -> PeriodicOrbit:
    if row.ndim == 1:
        pts = tuple(Fraction(int(k), D) for k in row)
        return PeriodicOrbit(p, pts, format(int(row[0]), f"0{p}b") if D == (1 << p) - 1 else None)
    pts = tuple((Fraction(int(u), D), Fraction(int(v), D)) for u, v in row)
    return PeriodicOrbit(p, pts)


def enumerate_periodic_orbits(system: System, P: int) -> list[PeriodicOrbit]:
    """All periodic orbits of minimal period <= P, sorted by (period, smallest point)."""
    out = []
    for p, D, rows in _orbit_tables(system, P):
        # each row starts at its smallest numerator already for doubling; normalise for torus
        for row in rows:
            if row.ndim == 2:
                i = min(range(p), key=lambda r: (row[r, 0], row[r, 1]))
                row = np.roll(row, -i, axis=0)
            out.append(_make_orbit(p, D, row))
    out.sort(key=PeriodicOrbit.sort_key)
    return out


def max_birkhoff_over_periodic(system: System, phi: Callable, P: int) -> MaximizationResult:
    """Largest orbit average of ``phi`` over periodic orbits of period <= P.

    A lower bound for the maximum of ``int phi dmu`` over invariant
    probabilities. Ties (within 1e-12) go to the smaller period, then to
    the orbit with the lexicographically smaller smallest point.
    """
    best_val = -math.inf
    best = None
    per_period = {}
    for p, D, rows in _orbit_tables(system, P):
        if len(rows) == 0:
            continue
        vals = np.asarray(phi(rows.astype(float) / D), dtype=float)
        avgs = vals.mean(axis=1)
        top = float(avgs.max())
        per_period[p] = top
        if top > best_val + TIE_TOL:
            cands = np.flatnonzero(avgs >= top - TIE_TOL)
            orbits = []
            for i in cands:
                row = rows[i]
                if row.ndim == 2:
                    j = min(range(p), key=lambda r: (row[r, 0], row[r, 1]))
                    row = np.roll(row, -j, axis=0)
                orbits.append(_make_orbit(p, D, row))
            best = min(orbits, key=PeriodicOrbit.sort_key)
            best_val = top
    return MaximizationResult(best_val, best, P, per_period)


# ---------------------------------------------------------------------------
# oscillating orbits
# ---------------------------------------------------------------------------

def block_lengths(periods: Sequence[int], ratio: float, total_bits: int,
                  schedule: str = "accelerating") -> list[tuple[int, int]]:
    """``(target index, repetitions)`` per block until ``total_bits`` are covered.

    Block 0 is one period of the first target. Block ``k >= 1`` has length
    ``ceil(r_k * S_{k-1})`` rounded up to whole periods, where ``S_{k-1}``
    is the length so far and ``r_k = ratio`` ("geometric") or
    ``ratio**k`` ("accelerating").
    """
    if ratio <= 1:
        raise ValueError("growth ratio must exceed 1")
    if schedule not in ("geometric", "accelerating"):
        raise ValueError(f"unknown schedule {schedule!r}")
    T = len(periods)
    out = [(0, 1)]
    S = periods[0]
    k = 1
    while S < total_bits:
        t = k % T
        p = periods[t]
        r = ratio if schedule == "geometric" else ratio ** k
        L = math.ceil(r * S)
        reps = -(-L // p)
        reps = min(reps, -(-(total_bits - S) // p))
        out.append((t, reps))
        S += reps * p
        k += 1
    return out


def construct_oscillating_orbit(targets: Sequence[PeriodicOrbit | str], ratio: float = 4.0,
                                total_bits: int = 10 ** 6 + 53, schedule: str = "accelerating",
                                precision: int = 53) -> BlockProgram:
    """Itinerary cycling through the targets' words with growing blocks.

    Each block is long compared with everything before it, so the running
    average at a block end sits near that block's target average.
    """
    if not targets:
        raise ValueError("need at least one target")
    words = [t if isinstance(t, str) else t.word for t in targets]
    if any(w is None or not w for w in words):
        raise ValueError("targets must be doubling-map orbits with binary words")
    periods = [len(w) for w in words]
    if len(words) == 1:
        return BlockProgram(((words[0], max(1, -(-total_bits // periods[0]))),), precision)
    plan = block_lengths(periods, ratio, total_bits, schedule)
    if len(plan) < len(words):
        raise BudgetError(f"total_bits={total_bits} does not cover one cycle through {len(words)} targets")
    blocks = tuple((words[t], reps) for t, reps in plan)
    return BlockProgram(blocks, precision)
