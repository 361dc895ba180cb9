"""Phase spaces and the zoo of example maps.

Every map is a frozen dataclass exposing a vectorised :meth:`System.apply`
and, for one-dimensional families, a scalar fast path :meth:`System.step`
plus the branch data used by :mod:`ergolab.growing` (monotone pieces,
inverse branches, and a cancellation-free increment ``f(y+t) - f(y)``).

Circle maps are handled through their monotone lift ``F`` on the real
line, ``F(x + 1) = F(x) + degree``.
"""
from __future__ import annotations

import math
import struct
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, ClassVar, Mapping, Sequence

import numpy as np
from scipy.optimize import brentq

from .symbolic import BlockProgram, window_points

EPS = np.finfo(float).eps

# rationals with at most this denominator are iterated exactly by doubling and tent
EXACT_DENOMINATOR = 2 ** 20


class ConfigError(ValueError):
    """Bad family name or parameter outside its documented range."""


class SingularityError(ArithmeticError):
    """Derivative requested at (or within machine precision of) a critical point."""


class UnsupportedFamilyError(TypeError):
    """Operation not defined for this family (e.g. pre-balls of a 2-D map)."""


class OrbitTruncated(UserWarning):
    """An orbit stopped early. ``reason`` is one of the REASON_* codes."""

    def __init__(self, reason: str, index: int):
        super().__init__(f"orbit truncated at step {index}: {reason}")
        self.reason = reason
        self.index = index


REASON_CRITICAL = "critical_collision"
REASON_NONFINITE = "non_finite"


# ---------------------------------------------------------------------------
# spaces
# ---------------------------------------------------------------------------

_KINDS = {
    "interval": (False,),
    "circle": (True,),
    "torus": (True, True),
    "cylinder": (True, False),
    "torus_interval": (True, True, False),
}


@dataclass(frozen=True)
class Space:
    """Compact phase space built from circle and unit-interval factors."""

    kind: str

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigError(f"unknown space kind {self.kind!r}")

    @property
    def periodic(self) -> tuple[bool, ...]:
        return _KINDS[self.kind]

    @property
    def dim(self) -> int:
        return len(self.periodic)

    @property
    def diameter(self) -> float:
        return math.sqrt(sum(0.25 if p else 1.0 for p in self.periodic))

    def coord_diff(self, x, y) -> np.ndarray:
        """Per-coordinate absolute differences, wrap-aware on circle factors."""
        d = np.abs(np.asarray(x, float) - np.asarray(y, float))
        if self.dim == 1:
            return np.minimum(d, 1.0 - d) if self.periodic[0] else d
        per = np.array(self.periodic)
        return np.where(per, np.minimum(d, 1.0 - d), d)

    def distance(self, x, y):
        d = self.coord_diff(x, y)
        if self.dim == 1:
            return d
        return np.sqrt(np.sum(d * d, axis=-1))

    def reduce(self, x):
        x = np.asarray(x, float)
        if self.dim == 1:
            return np.mod(x, 1.0) if self.periodic[0] else np.clip(x, 0.0, 1.0)
        per = np.array(self.periodic)
        return np.where(per, np.mod(x, 1.0), np.clip(x, 0.0, 1.0))

    def contains(self, x) -> np.ndarray:
        """Exact membership: [0, 1) on circle factors, [0, 1] on interval factors."""
        x = np.asarray(x, float)
        lo_ok = x >= 0.0
        if self.dim == 1:
            hi_ok = x < 1.0 if self.periodic[0] else x <= 1.0
            return lo_ok & hi_ok
        per = np.array(self.periodic)
        hi_ok = np.where(per, x < 1.0, x <= 1.0)
        return np.all(lo_ok & hi_ok, axis=-1)


INTERVAL = Space("interval")
CIRCLE = Space("circle")
TORUS = Space("torus")
CYLINDER = Space("cylinder")
TORUS_INTERVAL = Space("torus_interval")


# ---------------------------------------------------------------------------
# phi tables for skew products
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhiTable:
    """Periodic piecewise-linear function on a uniform knot grid.

    A flat list of ``K`` values defines ``phi`` on the circle with knots at
    ``k/K``. A ``K x K`` nested list defines a bilinear function on the torus.
    """

    values: tuple
    ndim: int = 1

    @classmethod
    def of(cls, values) -> "PhiTable":
        arr = np.asarray(values, dtype=float)
        if arr.ndim not in (1, 2) or arr.size == 0:
            raise ConfigError("phi table must be a nonempty 1-D or 2-D list")
        if arr.ndim == 2 and arr.shape[0] != arr.shape[1]:
            raise ConfigError("2-D phi table must be square")
        if not np.all(np.isfinite(arr)):
            raise ConfigError("phi table has non-finite entries")
        vals = tuple(arr.ravel().tolist()) if arr.ndim == 1 else tuple(tuple(r) for r in arr.tolist())
        return cls(vals, arr.ndim)

    @classmethod
    def constant(cls, c: float, knots: int = 64) -> "PhiTable":
        return cls.of([c] * knots)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    @property
    def min(self) -> float:
        return float(self.array.min())

    @property
    def max(self) -> float:
        return float(self.array.max())

    def __call__(self, x) -> np.ndarray:
        arr = self.array
        K = arr.shape[0]
        x = np.asarray(x, dtype=float)
        if self.ndim == 1:
            u = np.mod(x if x.ndim <= 1 else x[..., 0], 1.0) * K
            i = np.floor(u).astype(int) % K
            w = u - np.floor(u)
            return (1 - w) * arr[i] + w * arr[(i + 1) % K]
        u = np.mod(x[..., 0], 1.0) * K
        v = np.mod(x[..., 1], 1.0) * K
        i = np.floor(u).astype(int) % K
        j = np.floor(v).astype(int) % K
        a = u - np.floor(u)
        b = v - np.floor(v)
        i1, j1 = (i + 1) % K, (j + 1) % K
        return ((1 - a) * (1 - b) * arr[i, j] + a * (1 - b) * arr[i1, j]
                + (1 - a) * b * arr[i, j1] + a * b * arr[i1, j1])


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

class System:
    """Base class of all zoo maps."""

    family: ClassVar[str] = ""
    space: ClassVar[Space] = INTERVAL
    critical_points: ClassVar[tuple[float, ...]] = ()
    # circle maps: degree of the lift; interval maps: None
    degree: ClassVar[int | None] = None

    # vectorised evaluation; x has shape (n,) for 1-D spaces, (n, d) otherwise
    def apply(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def step(self, x):
        if self.space.dim == 1:
            return float(self.apply(np.array([x]))[0])
        return self.apply(np.asarray(x, dtype=float)[None, :])[0]

    def params(self) -> dict[str, Any]:
        return {}

    # 1-D derivative data -------------------------------------------------
    def derivative(self, x: float) -> float:
        raise UnsupportedFamilyError(f"{self.family} has no declared derivative")

    def log_expansion(self, x) -> float:
        """log |f'(x)|, or the unstable log-expansion rate in higher dimension."""
        if self.space.dim != 1:
            raise UnsupportedFamilyError(f"{self.family} has no expansion rate")
        for c in self.critical_points:
            if abs(x - c) <= 4 * EPS:
                raise SingularityError(f"x={x!r} is critical for {self.family}")
        d = abs(self.derivative(x))
        if d == 0.0:
            raise SingularityError(f"f'({x!r}) = 0 for {self.family}")
        return math.log(d)

    # branch structure (1-D only) ------------------------------------------
    def pieces(self) -> list[tuple[float, float]]:
        """Monotone pieces of an interval map, left to right."""
        cuts = [0.0, *sorted(self.critical_points), 1.0]
        return list(zip(cuts[:-1], cuts[1:]))

    def lift(self, x: float) -> float:
        raise UnsupportedFamilyError(f"{self.family} is not a circle map")

    def increment(self, y: float, t: float) -> float:
        """``f(y + t) - f(y)`` (lift values on circle maps)."""
        if self.degree is not None:
            return self.lift(y + t) - self.lift(y)
        return self.step(y + t) - self.step(y)

    def increment_inverse(self, y: float, a: float) -> float | None:
        """Offset ``t`` on the branch through ``y`` with ``increment(y, t) = a``, if closed form."""
        return None

    def inverse(self, v: float, piece: tuple[float, float]) -> float:
        """Solve ``f(z) = v`` for ``z`` in a monotone piece (lift for circle maps)."""
        lo, hi = piece
        f = self.lift if self.degree is not None else self.step
        flo, fhi = f(lo), f(hi)
        if v == flo:
            return lo
        if v == fhi:
            return hi
        return brentq(lambda z: f(z) - v, lo, hi, xtol=1e-15, rtol=4 * EPS, maxiter=200)

    def __str__(self):
        args = ", ".join(f"{k}={v}" for k, v in self.params().items() if not isinstance(v, (list, tuple)))
        return f"{self.family}({args})"


@dataclass(frozen=True)
class Doubling(System):
    family: ClassVar[str] = "doubling"
    space: ClassVar[Space] = CIRCLE
    degree: ClassVar[int] = 2

    def apply(self, x):
        return np.mod(2.0 * np.asarray(x, float), 1.0)

    def step(self, x):
        return (2.0 * x) % 1.0

    def derivative(self, x):
        return 2.0

    def lift(self, x):
        return 2.0 * x

    def increment(self, y, t):
        return 2.0 * t

    def increment_inverse(self, y, a):
        return 0.5 * a

    def inverse(self, v, piece=None):
        return 0.5 * v


@dataclass(frozen=True)
class MannevillePomeau(System):
    """``x + x^(1+gamma) mod 1``: neutral fixed point at 0, degree 2."""

    gamma: float = 1.0
    family: ClassVar[str] = "manneville_pomeau"
    space: ClassVar[Space] = CIRCLE
    degree: ClassVar[int] = 2

    def __post_init__(self):
        if not (1.0 <= self.gamma <= 16.0):
            raise ConfigError(f"manneville_pomeau needs 1 <= gamma <= 16, got {self.gamma}")

    def params(self):
        return {"gamma": self.gamma}

    def apply(self, x):
        x = np.asarray(x, float)
        return np.mod(x + x ** (1.0 + self.gamma), 1.0)

    def step(self, x):
        y = x + (x * x if self.gamma == 1.0 else x ** (1.0 + self.gamma))
        return y - 1.0 if y >= 1.0 else y

    def derivative(self, x):
        return 1.0 + (1.0 + self.gamma) * x ** self.gamma

    def lift(self, x):
        k = math.floor(x)
        w = x - k
        return x + w ** (1.0 + self.gamma) + k

    def _pow_increment(self, w, s):
        # (w + s)^(1+g) - w^(1+g) for w >= 0, w + s >= 0, without cancellation
        e = 1.0 + self.gamma
        if w == 0.0:
            return s ** e
        r = s / w
        if r <= -1.0:
            return max(w + s, 0.0) ** e - w ** e
        return w ** e * math.expm1(e * math.log1p(r))

    def increment(self, y, t):
        e = 1.0 + self.gamma
        z = y + t
        k = math.floor(z)
        if k == 0:
            return t + self._pow_increment(y, t)
        if k == -1:
            # g(1 + z) - 1 - g(y)
            return t + math.expm1(e * math.log1p(z)) - y ** e
        return self.lift(z) - self.lift(y)


@dataclass(frozen=True)
class Logistic(System):
    """``4 t x (1 - x)`` on [0, 1], ``0 < t <= 1``."""

    t: float = 1.0
    family: ClassVar[str] = "logistic"
    space: ClassVar[Space] = INTERVAL
    critical_points: ClassVar[tuple[float, ...]] = (0.5,)

    def __post_init__(self):
        if not (0.0 < self.t <= 1.0):
            raise ConfigError(f"logistic needs 0 < t <= 1, got {self.t}")

    def params(self):
        return {"t": self.t}

    def apply(self, x):
        x = np.asarray(x, float)
        return np.clip(4.0 * self.t * x * (1.0 - x), 0.0, 1.0)

    def step(self, x):
        y = 4.0 * self.t * x * (1.0 - x)
        return 1.0 if y > 1.0 else y

    def derivative(self, x):
        return 4.0 * self.t * (1.0 - 2.0 * x)

    def increment(self, y, s):
        return 4.0 * self.t * s * (1.0 - 2.0 * y - s)

    def increment_inverse(self, y, a):
        # smaller root of s^2 - B s + c = 0, in the cancellation-free form
        B = 1.0 - 2.0 * y
        c = a / (4.0 * self.t)
        disc = B * B - 4.0 * c
        if B == 0.0 or disc < 0.0:
            return None
        return 2.0 * c / (B + math.copysign(math.sqrt(disc), B))

    def inverse(self, v, piece):
        u = min(max(v / self.t, 0.0), 1.0)
        r = math.sqrt(1.0 - u)
        left = 0.5 * u / (1.0 + r)  # (1 - r)/2 without cancellation
        return left if piece[1] <= 0.5 else 1.0 - left


@dataclass(frozen=True)
class Tent(System):
    family: ClassVar[str] = "tent"
    space: ClassVar[Space] = INTERVAL
    critical_points: ClassVar[tuple[float, ...]] = (0.5,)

    def apply(self, x):
        return 1.0 - np.abs(2.0 * np.asarray(x, float) - 1.0)

    def step(self, x):
        return 1.0 - abs(2.0 * x - 1.0)

    def derivative(self, x):
        if x == 0.5:
            raise SingularityError("tent is not differentiable at 1/2")
        return 2.0 if x < 0.5 else -2.0

    def increment(self, y, s):
        return 2.0 * s if y < 0.5 or (y == 0.5 and s < 0) else -2.0 * s

    def increment_inverse(self, y, a):
        if y == 0.5:
            return None
        return 0.5 * a if y < 0.5 else -0.5 * a

    def inverse(self, v, piece):
        return 0.5 * v if piece[1] <= 0.5 else 1.0 - 0.5 * v


@dataclass(frozen=True)
class Contraction(System):
    """``x -> factor * x`` on [0, 1]; the global-sink control system."""

    factor: float = 0.5
    family: ClassVar[str] = "contraction"
    space: ClassVar[Space] = INTERVAL

    def __post_init__(self):
        if not (0.0 < self.factor < 1.0):
            raise ConfigError(f"contraction needs 0 < factor < 1, got {self.factor}")

    def params(self):
        return {"factor": self.factor}

    def apply(self, x):
        return self.factor * np.asarray(x, float)

    def step(self, x):
        return self.factor * x

    def derivative(self, x):
        return self.factor

    def increment(self, y, s):
        return self.factor * s

    def increment_inverse(self, y, a):
        return a / self.factor

    def inverse(self, v, piece=None):
        return v / self.factor


CAT_MATRIX = ((2, 1), (1, 1))


@dataclass(frozen=True)
class CatMap(System):
    """Linear hyperbolic toral automorphism, default ``[[2,1],[1,1]]``."""

    matrix: tuple[tuple[int, int], tuple[int, int]] = CAT_MATRIX
    family: ClassVar[str] = "cat_map"
    space: ClassVar[Space] = TORUS

    def __post_init__(self):
        m = tuple(tuple(int(v) for v in row) for row in self.matrix)
        object.__setattr__(self, "matrix", m)
        (a, b), (c, d) = m
        det = a * d - b * c
        tr = a + d
        if abs(det) != 1:
            raise ConfigError("cat_map matrix must be unimodular")
        if tr * tr - 4 * det <= 0 or abs(tr) <= (2 if det == 1 else 0):
            raise ConfigError("cat_map matrix must be hyperbolic")

    def params(self):
        return {"matrix": [list(r) for r in self.matrix]}

    @property
    def M(self) -> np.ndarray:
        return np.array(self.matrix, dtype=float)

    def apply(self, x):
        x = np.asarray(x, float)
        return np.mod(x @ self.M.T, 1.0)

    def step(self, x):
        (a, b), (c, d) = self.matrix
        return np.array([(a * x[0] + b * x[1]) % 1.0, (c * x[0] + d * x[1]) % 1.0])

    def log_expansion(self, x=None):
        return float(np.log(np.max(np.abs(np.linalg.eigvals(self.M)))))


@dataclass(frozen=True)
class SkewTent(System):
    """``F([x], t) = (2x mod 1, phi(x) (1 - |2t - 1|))`` on circle x [0, 1]."""

    phi: PhiTable = field(default_factory=lambda: PhiTable.constant(0.9))
    family: ClassVar[str] = "skew_tent"
    space: ClassVar[Space] = CYLINDER

    def __post_init__(self):
        if self.phi.ndim != 1:
            raise ConfigError("skew_tent needs a 1-D phi table")
        if self.phi.min < 0.0 or self.phi.max > 1.0:
            raise ConfigError("skew_tent phi table must take values in [0, 1]")

    def params(self):
        return {"phi": list(self.phi.values)}

    def apply(self, x):
        x = np.asarray(x, float)
        base = x[..., 0]
        fib = x[..., 1]
        return np.stack([np.mod(2.0 * base, 1.0), self.phi(base) * (1.0 - np.abs(2.0 * fib - 1.0))], axis=-1)


@dataclass(frozen=True)
class SkewLogistic(System):
    """``F(p, x) = (cat(p), 4 phi(p) x (1 - x))`` on the torus x [0, 1]."""

    phi: PhiTable = field(default_factory=lambda: PhiTable.constant(1.0))
    matrix: tuple = CAT_MATRIX
    family: ClassVar[str] = "skew_logistic"
    space: ClassVar[Space] = TORUS_INTERVAL

    def __post_init__(self):
        CatMap(self.matrix)
        if self.phi.min <= 0.0 or self.phi.max > 1.0:
            raise ConfigError("skew_logistic phi table must take values in (0, 1]")

    def params(self):
        vals = self.phi.values
        return {"phi": [list(r) for r in vals] if self.phi.ndim == 2 else list(vals)}

    def apply(self, x):
        x = np.asarray(x, float)
        base = x[..., :2]
        fib = x[..., 2]
        M = np.array(self.matrix, dtype=float)
        nb = np.mod(base @ M.T, 1.0)
        nf = np.clip(4.0 * self.phi(base) * fib * (1.0 - fib), 0.0, 1.0)
        return np.concatenate([nb, nf[..., None]], axis=-1)


@dataclass(frozen=True)
class SymbolicDoubling(Doubling):
    """Doubling map whose orbit is read from an exact binary itinerary.

    ``orbit(system, x0, n)`` interprets ``x0`` as a shift offset into the
    program (``None`` means 0).
    """

    program: BlockProgram = field(default_factory=lambda: BlockProgram((("0", 1),)))
    family: ClassVar[str] = "symbolic_doubling"

    def params(self):
        return {"program": self.program.to_text(), "bits": self.program.precision}


FAMILIES: dict[str, type[System]] = {
    cls.family: cls
    for cls in (Doubling, MannevillePomeau, Logistic, Tent, Contraction, CatMap,
                SkewTent, SkewLogistic, SymbolicDoubling)
}


def make_system(family: str, **params) -> System:
    """Build a zoo map from its family name and named parameters.

    ``phi`` may be a list of reals (a :class:`PhiTable` is built);
    ``program`` may be the text form of a :class:`BlockProgram`, with
    ``bits`` its precision.
    """
    if family not in FAMILIES:
        raise ConfigError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}")
    cls = FAMILIES[family]
    kw = dict(params)
    if "phi" in kw and not isinstance(kw["phi"], PhiTable):
        kw["phi"] = PhiTable.of(kw["phi"])
    if family == "symbolic_doubling":
        bits = int(kw.pop("bits", 53))
        prog = kw.get("program", "(0)x1")
        kw["program"] = prog if isinstance(prog, BlockProgram) else BlockProgram.from_text(prog, bits)
    if "matrix" in kw:
        kw["matrix"] = tuple(tuple(int(v) for v in row) for row in kw["matrix"])
    try:
        return cls(**kw)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {family}: {exc}") from None


def system_from_config(cfg: Mapping[str, Any]) -> System:
    cfg = dict(cfg)
    family = cfg.pop("family", None)
    if family is None:
        raise ConfigError("system config needs a 'family' key")
    return make_system(family, **cfg)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def _check_point(system: System, x):
    if system.space.dim == 1:
        x = float(x)
    else:
        x = np.asarray(x, dtype=float)
        if x.shape != (system.space.dim,):
            raise ValueError(f"{system.family} needs points of dimension {system.space.dim}")
    if not bool(system.space.contains(x)):
        raise ValueError(f"point {x!r} is outside the {system.space.kind}")
    return x


def evaluate(system: System, x):
    """``f(x)`` for a single point."""
    return system.step(_check_point(system, x))


def orbit(system: System, x0, n: int) -> np.ndarray:
    """``(x0, f(x0), ..., f^{n-1}(x0))``.

    One-dimensional orbits come back with shape ``(n,)``, others ``(n, d)``.
    An interval orbit that lands on the critical set at machine precision is
    cut after that point and an :class:`OrbitTruncated` warning is issued.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if isinstance(system, SymbolicDoubling):
        start = 0 if x0 is None else int(x0)
        return system.program.points(n, start)
    x = _check_point(system, x0)
    if type(system) is Doubling:
        return _doubling_orbit(x, n)
    if isinstance(system, Tent):
        return _tent_orbit(x, n)
    if system.space.dim != 1:
        out = np.empty((n, system.space.dim))
        for j in range(n):
            out[j] = x
            x = system.step(x)
        return out
    out = np.empty(n)
    step = system.step
    crit = system.critical_points
    for j in range(n):
        out[j] = x
        if crit and any(abs(x - c) <= EPS for c in crit):
            warnings.warn(OrbitTruncated(REASON_CRITICAL, j), stacklevel=2)
            return out[:j + 1]
        x = step(x)
        if not math.isfinite(x):
            warnings.warn(OrbitTruncated(REASON_NONFINITE, j + 1), stacklevel=2)
            return out[:j + 1]
    return out


def _doubling_orbit(x: float, n: int) -> np.ndarray:
    """Doubling orbit without the float collapse to 0.

    A rational ``p/q`` with ``q <= EXACT_DENOMINATOR`` that rounds to ``x``
    is iterated exactly. Any other float is read as its exact binary
    expansion followed by a pseudo-random bit tail keyed by ``x``, so the
    orbit is that of a genuine point within one ulp of ``x``.
    """
    if n == 0:
        return np.empty(0)
    r = Fraction(x).limit_denominator(EXACT_DENOMINATOR)
    if float(r) == x:
        p, q = r.numerator, r.denominator
        out = np.empty(n)
        seen: dict[int, int] = {}
        for j in range(n):
            if p in seen:
                start = seen[p]
                cycle = out[start:j]
                rest = n - j
                out[j:] = np.tile(cycle, -(-rest // len(cycle)))[:rest]
                break
            seen[p] = j
            out[j] = p / q
            p = (2 * p) % q
        return out
    exact = Fraction(x)
    k = exact.denominator.bit_length() - 1
    # the tail starts one bit past the float's own precision
    width = max(k, k - exact.numerator.bit_length() + 53)
    head = np.array([int(c) for c in format(exact.numerator << (width - k), f"0{width}b")], dtype=np.uint8)
    key = struct.unpack("<Q", struct.pack("<d", x))[0]
    tail = np.random.default_rng(key).integers(0, 2, size=max(0, n + 53 - len(head)), dtype=np.uint8)
    out = window_points(np.concatenate([head, tail]), n, 53)
    out[0] = x  # the window truncates bits below 2^-53
    return out


def _tent_orbit(x: float, n: int) -> np.ndarray:
    """Tent orbit through ``T^j = T o D^(j-1)`` with the exact doubling orbit ``D``.

    Cut after the first point on the critical set, as in :func:`orbit`.
    """
    out = np.empty(n)
    if n == 0:
        return out
    out[0] = x
    if n > 1:
        d = _doubling_orbit(x, n - 1)
        out[1:] = 1.0 - np.abs(2.0 * d - 1.0)
    hit = np.flatnonzero(np.abs(out - 0.5) <= EPS)
    if hit.size:
        j = int(hit[0])
        warnings.warn(OrbitTruncated(REASON_CRITICAL, j), stacklevel=3)
        return out[:j + 1]
    return out


def derivative_log_norm(system: System, x) -> float:
    """Log expansion rate: ``log|f'(x)|`` in 1-D, unstable rate for the cat map."""
    if isinstance(system, CatMap):
        return system.log_expansion()
    return system.log_expansion(_check_point(system, x))


def critical_set(system: System) -> tuple[float, ...]:
    if system.space.dim != 1:
        raise UnsupportedFamilyError("critical sets are declared for 1-D families only")
    return tuple(system.critical_points)
