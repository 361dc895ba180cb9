"""Growing times, hyperbolic pre-balls, expansion averages and local horseshoes
for one-dimensional maps.

Images of the tracked branch interval are carried as offsets from the orbit
point (lift coordinates on circle maps), so they stay accurate however far
the orbit has run. Pre-balls are pulled back the same way; once the offsets
are tiny the pull-back is linear and diameters are kept in log form, since
``2 delta * 2^-n`` underflows long before ``n`` gets interesting.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .io import write_csv, write_json
from .orbitstats import _segment_sums, checkpoint_schedule, orbit_points
from .systems import EPS, SingularityError, System, UnsupportedFamilyError

# radii are bounded by a quarter of the unit length of the phase space
MAX_RADIUS = 0.25
# pull-backs go linear once offset / f'^2 stays below this at every later step
LINEAR_OFFSET = 1e-9
# slack, in ulps of the image endpoints, when fitting a ball inside a branch image
FIT_TOLERANCE = 16 * EPS


def _require_1d(system: System):
    if system.space.dim != 1:
        raise UnsupportedFamilyError(f"{system.family} is not one-dimensional")


def _piece_of(system: System, y: float) -> tuple[float, float]:
    for lo, hi in system.pieces():
        if lo <= y <= hi:
            return lo, hi
    raise ValueError(f"{y!r} outside [0, 1]")


@dataclass
class BranchTracker:
    """Image of the current monotone branch around an orbit, as offsets.

    ``lo`` and ``hi`` satisfy ``f^n(J_n) = [y_n + lo, y_n + hi]`` where
    ``y_n = f^n(x)``. On circle maps the image may cover the whole circle,
    after which it stays full.
    """

    system: System
    y: float
    lo: float
    hi: float
    n: int = 0

    @classmethod
    def start(cls, system: System, x: float, initial_interval: tuple[float, float] | None = None):
        _require_1d(system)
        if initial_interval is None:
            if system.space.periodic[0]:
                return cls(system, x, -math.inf, math.inf)
            return cls(system, x, -x, 1.0 - x)
        a, b = initial_interval
        if not a <= x <= b:
            raise ValueError("initial interval must contain x")
        return cls(system, x, a - x, b - x)

    @property
    def full(self) -> bool:
        return self.hi - self.lo >= 1.0 and self.system.space.periodic[0]

    def image(self) -> tuple[float, float]:
        return self.y + self.lo, self.y + self.hi

    def advance(self, y_next: float):
        """Move to the next orbit point ``y_next = f(y)``."""
        s, y = self.system, self.y
        if not self.full:
            lo, hi = self.lo, self.hi
            if s.critical_points or not s.space.periodic[0]:
                a, b = _piece_of(s, y)
                lo, hi = max(lo, a - y), min(hi, b - y)
            u, v = s.increment(y, lo), s.increment(y, hi)
            self.lo, self.hi = min(u, v), max(u, v)
            if self.full:
                self.lo, self.hi = -math.inf, math.inf
        self.y = y_next
        self.n += 1


def _ball(space_periodic: bool, q: float, delta: float) -> tuple[float, float]:
    """Closed ball bounds; balls on the interval are taken relative to [0, 1]."""
    if space_periodic:
        return q - delta, q + delta
    return max(0.0, q - delta), min(1.0, q + delta)


def _witness(tracker: BranchTracker, delta: float) -> float | None:
    """Centre ``q`` of the growing-time ball, or None if ``n`` is not growing."""
    y = tracker.y
    periodic = tracker.system.space.periodic[0]
    if tracker.full:
        return y
    a, b = tracker.image()
    if not periodic:
        a, b = max(a, 0.0), min(b, 1.0)
    # image endpoints carry a few ulps of rounding from the increments
    tol = FIT_TOLERANCE * max(1.0, abs(a), abs(b))
    q = y
    lo, hi = _ball(periodic, q, delta)
    if lo < a - tol:
        q += a - lo
    elif hi > b + tol:
        q -= hi - b
    lo, hi = _ball(periodic, q, delta)
    if lo < a - tol or hi > b + tol or abs(q - y) >= 0.5 * delta:
        return None
    return q


# ---------------------------------------------------------------------------
# pre-ball pull-back
# ---------------------------------------------------------------------------

def _pull_offset(system: System, y: float, target: float) -> float:
    """Offset ``t`` with ``f(y + t) - f(y) = target`` on the branch through ``y``."""
    if target == 0.0:
        return 0.0
    d = system.derivative(y)
    if abs(target) < LINEAR_OFFSET * min(1.0, abs(d)):
        return target / d
    t = system.increment_inverse(y, target)
    if t is not None:
        return t
    sign = math.copysign(1.0, target) * math.copysign(1.0, d)
    if system.space.periodic[0]:
        bound = 1.0
    else:
        a, b = _piece_of(system, y)
        bound = (b - y) if sign > 0 else (y - a)
    g = lambda t: system.increment(y, t) - target
    end = sign * bound
    g_end = g(end)
    if g_end * math.copysign(1.0, target) < 0:
        # a slid ball can touch the image edge, whose preimage is the piece edge
        if abs(g_end) <= 64 * EPS * max(1.0, abs(target)):
            return end
        raise ValueError("target offset outside the branch image")
    if g_end == 0.0:
        return end
    return brentq(g, 0.0, end, xtol=abs(target) * 1e-15 / max(1.0, abs(d)) + 1e-300, rtol=4 * EPS, maxiter=400)


@dataclass(frozen=True)
class _PullBack:
    """Offsets pulled back from step ``n`` to step 0.

    ``nonlinear[k - start]`` holds the offsets at steps ``start <= k <= n``.
    Below ``start`` every offset is ``offset_start * s_k * exp(-(P[start] - P[k]))``
    with ``P`` the prefix sum of ``log|f'|`` along the orbit and ``s_k`` a
    common sign, so pair distances keep full relative precision in log form.
    """

    start: int
    nonlinear: np.ndarray
    prefix: np.ndarray
    sign0: float

    def offsets0(self) -> np.ndarray:
        if self.start == 0:
            return self.nonlinear[0]
        scale = math.exp(-(self.prefix[self.start] - self.prefix[0]))
        return self.sign0 * self.nonlinear[0] * scale

    def log_distance(self, i: int, j: int) -> np.ndarray:
        """``log|offset_i - offset_j|`` at steps ``0..n``."""
        n = self.start + len(self.nonlinear) - 1
        out = np.empty(n + 1)
        with np.errstate(divide="ignore"):
            out[self.start:] = np.log(np.abs(self.nonlinear[:, i] - self.nonlinear[:, j]))
        k = np.arange(self.start)
        out[:self.start] = out[self.start] - (self.prefix[self.start] - self.prefix[k])
        return out


def _last_curved_step(log_prefix: np.ndarray, k: int, cur: Sequence[float]) -> int:
    """Largest ``j < k`` where a linear pull-back of ``cur`` from step ``k`` is not safe, else -1.

    Pulling an offset ``c`` back through ``y_j`` is linear to relative order
    ``|c| / f'(y_j)^2``, with ``c`` itself estimated linearly from step ``k``.
    """
    if k == 0:
        return -1
    j = np.arange(k)
    big = max(abs(c) for c in cur)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_ratio = math.log(big) - log_prefix[k] - log_prefix[j + 1] + 2.0 * log_prefix[j]
    bad = np.flatnonzero(~(log_ratio <= math.log(LINEAR_OFFSET)))
    return int(bad[-1]) if bad.size else -1


def _pull_back(system: System, ys: np.ndarray, prefix: np.ndarray, offsets: Sequence[float]) -> _PullBack:
    n = len(ys) - 1
    cur = [float(c) for c in offsets]
    rows = [cur]
    k = n
    stop = k
    while k > 0:
        if k <= stop:
            if any(abs(c) >= LINEAR_OFFSET for c in cur):
                stop = k - 1
            else:
                # near a critical point small offsets are still curved
                stop = _last_curved_step(prefix[0], k, cur)
                if stop < 0:
                    break
        k -= 1
        cur = [_pull_offset(system, ys[k], c) for c in cur]
        rows.append(cur)
    log_prefix, neg_prefix = prefix
    return _PullBack(k, np.array(rows[::-1]), log_prefix, -1.0 if neg_prefix[k] % 2 else 1.0)


def _log_deriv_prefix(system: System, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Prefix sums of ``log|f'(y_j)|`` and of the count of orientation flips."""
    d = np.array([system.derivative(y) for y in ys[:-1]], dtype=float)
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(d))
    return (np.concatenate([[0.0], np.cumsum(logs)]),
            np.concatenate([[0], np.cumsum(d < 0)]))


@dataclass(frozen=True)
class PreBall:
    n: int
    q: float
    left: float
    right: float
    log_diameter: float
    verified: bool | None = None

    @property
    def diameter(self) -> float:
        return math.exp(self.log_diameter)

    def to_dict(self):
        return {"n": self.n, "q": self.q, "left": self.left, "right": self.right,
                "diameter": self.diameter, "log_diameter": self.log_diameter, "verified": self.verified}


def _build_pre_ball(system: System, ys: np.ndarray, prefix: np.ndarray, q: float,
                    delta: float) -> tuple[PreBall, _PullBack]:
    """Pull back ``B_delta(q)`` along the orbit ``ys``; offsets are (left, centre, right)."""
    n = len(ys) - 1
    lo, hi = _ball(system.space.periodic[0], q, delta)
    pb = _pull_back(system, ys, prefix, [lo - ys[n], q - ys[n], hi - ys[n]])
    a, _, b = pb.offsets0()
    a, b = min(a, b), max(a, b)
    x = float(ys[0])
    return PreBall(n, float(q), float(x + a), float(x + b), float(pb.log_distance(0, 2)[0])), pb


# ---------------------------------------------------------------------------
# growing times
# ---------------------------------------------------------------------------

@dataclass
class GrowingTimeRecord:
    x: float
    delta: float
    budget: int
    times: list[int] = field(default_factory=list)
    centers: list[float] = field(default_factory=list)
    pre_balls: list[PreBall] = field(default_factory=list)
    truncated: str | None = None

    @property
    def density(self) -> float:
        return len(self.times) / self.budget

    def to_dict(self):
        return {"x": self.x, "delta": self.delta, "budget": self.budget, "truncated": self.truncated,
                "density": self.density, "growing_times": [p.to_dict() for p in self.pre_balls]}

    def write_csv(self, path):
        return write_csv(path, ["n", "q", "left", "right", "diameter"],
                         ((p.n, p.q, p.left, p.right, p.diameter) for p in self.pre_balls))

    def write_json(self, path):
        return write_json(path, self)


def _orbit(system: System, x: float, N: int):
    ys, reason = orbit_points(system, x, N + 1)
    return ys, reason


def growing_times(system: System, x: float, delta: float, N: int,
                  initial_interval: tuple[float, float] | None = None,
                  pre_balls: bool = True) -> GrowingTimeRecord:
    """Growing times ``1 <= n <= N`` of ``x`` at radius ``delta``.

    The branch image starts from the whole space, or from
    ``initial_interval`` when given, and is cut at critical points each
    step. ``n`` is recorded when the image contains a ball ``B_delta(q)``
    with ``f^n(x)`` in ``B_{delta/2}(q)``; ``q`` is ``f^n(x)`` slid
    minimally to make the ball fit.
    """
    _require_1d(system)
    if not 0 < delta < MAX_RADIUS:
        raise ValueError(f"need 0 < delta < {MAX_RADIUS}")
    ys, reason = _orbit(system, x, N)
    rec = GrowingTimeRecord(float(x), delta, N, truncated=reason)
    tracker = BranchTracker.start(system, float(x), initial_interval)
    prefix = _log_deriv_prefix(system, ys) if pre_balls else None
    for n in range(1, len(ys)):
        tracker.advance(float(ys[n]))
        q = _witness(tracker, delta)
        if q is None:
            continue
        rec.times.append(n)
        rec.centers.append(q)
        if pre_balls:
            rec.pre_balls.append(_build_pre_ball(system, ys[:n + 1], prefix, q, delta)[0])
    if not pre_balls:
        rec.pre_balls = []
    return rec


def pre_ball(system: System, x: float, n: int, delta: float = 0.05, sigma: float = 0.9,
             initial_interval: tuple[float, float] | None = None) -> PreBall | None:
    """Pre-ball of order ``n`` with the backward-contraction check, or None.

    Contraction ``d_{n-j} <= sigma^j d_n`` for ``1 <= j < n`` is checked on
    the endpoint pairs (left, right), (left, mid) and (mid, right), where
    ``mid`` is the pull-back of the ball centre.
    """
    if not 0 < sigma < 1:
        raise ValueError("sigma must lie in (0, 1)")
    _require_1d(system)
    if not hasattr(system, "derivative"):
        raise UnsupportedFamilyError(f"{system.family} has no derivative")
    ys, _ = _orbit(system, x, n)
    if len(ys) < n + 1:
        return None
    tracker = BranchTracker.start(system, float(x), initial_interval)
    for k in range(1, n + 1):
        tracker.advance(float(ys[k]))
    q = _witness(tracker, delta)
    if q is None:
        return None
    prefix = _log_deriv_prefix(system, ys)
    ball, pb = _build_pre_ball(system, ys, prefix, q, delta)
    ok = True
    if n > 1:
        slack = (n - np.arange(1, n)) * math.log(sigma)
        for i, j in ((0, 2), (0, 1), (1, 2)):
            logd = pb.log_distance(i, j)
            if np.any(logd[1:n] > logd[n] + slack + 1e-9):
                ok = False
                break
    return PreBall(ball.n, ball.q, ball.left, ball.right, ball.log_diameter, ok)


# ---------------------------------------------------------------------------
# slow recurrence and expansion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NueDiagnostics:
    delta_t: float
    checkpoints: np.ndarray
    slow_recurrence: np.ndarray
    expansion: np.ndarray
    truncated: str | None = None

    def to_dict(self):
        return {"delta_t": self.delta_t, "checkpoints": self.checkpoints, "slow_recurrence": self.slow_recurrence,
                "expansion": self.expansion, "truncated": self.truncated}

    def write_csv(self, path):
        return write_csv(path, ["n", "slow_recurrence", "expansion"],
                         zip(self.checkpoints.tolist(), self.slow_recurrence.tolist(), self.expansion.tolist()))


def truncated_distance(system: System, y, delta_t: float) -> np.ndarray:
    """``dist(y, C)`` if at most ``delta_t``, else 1."""
    y = np.asarray(y, float)
    crit = system.critical_points
    if not crit:
        return np.ones_like(y)
    d = np.min(np.abs(y[..., None] - np.asarray(crit)), axis=-1)
    return np.where(d <= delta_t, d, 1.0)


def nue_averages(system: System, x: float, N: int, delta_t: float = 1e-3, ratio: float = 1.05) -> NueDiagnostics:
    """Running slow-recurrence and expansion averages at geometric checkpoints."""
    _require_1d(system)
    if not 0 < delta_t < 1:
        raise ValueError("delta_t must lie in (0, 1)")
    ys, reason = orbit_points(system, x, N)
    if reason is not None:
        ys = ys[:-1]  # the last point is critical
    n = len(ys)
    if n == 0:
        raise SingularityError("orbit starts on the critical set")
    slow = -np.log(truncated_distance(system, ys, delta_t))
    with np.errstate(divide="ignore"):
        expn = np.log(np.abs(np.vectorize(system.derivative, otypes=[float])(ys)))
    cps = checkpoint_schedule(n, ratio)
    return NueDiagnostics(delta_t, cps, _segment_sums(slow, cps) / cps, _segment_sums(expn, cps) / cps, reason)


# ---------------------------------------------------------------------------
# local horseshoes
# ---------------------------------------------------------------------------

def _interval_laps(system: System, n: int):
    """Monotone laps of ``f^n`` as ``(lo, hi, itinerary)``."""
    laps = [(0.0, 1.0, ())]
    for _ in range(n):
        nxt = []
        for lo, hi, it in laps:
            a, b = _forward(system, lo, it), _forward(system, hi, it)
            img_lo, img_hi = min(a, b), max(a, b)
            cuts = [img_lo] + [c for c in system.critical_points if img_lo < c < img_hi] + [img_hi]
            pre = sorted(_backward(system, c, it, lo, hi) for c in cuts)
            for u, v in zip(pre[:-1], pre[1:]):
                if v > u:
                    mid = _forward(system, 0.5 * (u + v), it)
                    nxt.append((u, v, it + (_piece_of(system, mid),)))
        laps = nxt
    return laps


def _forward(system: System, x: float, itinerary) -> float:
    for _ in itinerary:
        x = system.step(x)
    return x


def _backward(system: System, v: float, itinerary, lo: float, hi: float) -> float:
    if not itinerary:
        return v
    for piece in reversed(itinerary):
        v = system.inverse(v, piece)
    return min(max(v, lo), hi)


def _circle_components(system: System, p: float, eps: float, n: int):
    F = lambda z: _lift_power(system, z, n)
    base = p - 0.5
    a, b = F(base), F(base + 1.0)
    out = []
    for j in range(math.ceil(a - (p - eps)), math.floor(b - (p + eps)) + 1):
        lo_v, hi_v = p - eps + j, p + eps + j
        u = brentq(lambda z: F(z) - lo_v, base, base + 1.0, xtol=1e-15)
        v = brentq(lambda z: F(z) - hi_v, base, base + 1.0, xtol=1e-15)
        out.append((u, v))
    return out


def _lift_power(system: System, z: float, n: int) -> float:
    for _ in range(n):
        z = system.lift(z)
    return z


@dataclass(frozen=True)
class Horseshoe:
    U0: tuple[float, float]
    n0: int
    U1: tuple[float, float]
    n1: int
    p: float
    eps: float

    @property
    def entropy_bound(self) -> float:
        return entropy_lower_bound(self.n0, self.n1)

    def to_dict(self):
        return {"U0": list(self.U0), "n0": self.n0, "U1": list(self.U1), "n1": self.n1,
                "p": self.p, "eps": self.eps, "entropy_lower_bound": self.entropy_bound}


def horseshoe_search(system: System, p: float, eps: float, n_max: int = 8) -> Horseshoe | None:
    """First pair of disjoint branch preimages of the closed ball ``B_eps(p)``
    lying inside the open ball, in (order, left endpoint) order."""
    _require_1d(system)
    if not 0 < eps < MAX_RADIUS:
        raise ValueError(f"need 0 < eps < {MAX_RADIUS}")
    periodic = system.space.periodic[0]
    blo, bhi = _ball(periodic, p, eps)
    found = []
    for n in range(1, n_max + 1):
        if periodic:
            comps = _circle_components(system, p, eps, n)
        else:
            comps = []
            for lo, hi, it in _interval_laps(system, n):
                a, b = _forward(system, lo, it), _forward(system, hi, it)
                if min(a, b) <= blo and max(a, b) >= bhi:
                    u, v = sorted((_backward(system, blo, it, lo, hi), _backward(system, bhi, it, lo, hi)))
                    comps.append((u, v))
        inside = sorted((u, v) for u, v in comps if p - eps < u and v < p + eps and (periodic or _in_open(u, v, blo, bhi)))
        found.extend((n, c) for c in inside)
        for i, (n0, c0) in enumerate(found):
            for n1, c1 in found[i + 1:]:
                if c0[1] < c1[0] or c1[1] < c0[0]:
                    return Horseshoe(c0, n0, c1, n1, p, eps)
    return None


def _in_open(u, v, blo, bhi) -> bool:
    return blo < u and v < bhi


def entropy_lower_bound(n0: int, n1: int) -> float:
    """``log 2 / max(n0, n1)`` for a two-branch full-return structure."""
    if n0 < 1 or n1 < 1:
        raise ValueError("return times must be >= 1")
    return math.log(2.0) / max(n0, n1)
