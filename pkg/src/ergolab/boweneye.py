"""Sojourn-time model of a heteroclinic cycle between two saddles A and B.

A trajectory entering a saddle neighbourhood at log-distance ``s`` from the
stable manifold stays for time ``s / (unstable eigenvalue)`` and leaves at
log-distance ``s * |stable| / unstable``. Alternating passes near A and B
give a geometric recursion. When ``rho > 1`` the sojourns grow fast enough
that the fraction of time spent near A keeps oscillating.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .io import write_csv, write_json

# cumulative times switch to log-domain accumulation above this value
LINEAR_LIMIT = 1e300


class DivergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class SaddleParams:
    alpha_minus: float
    alpha_plus: float
    beta_minus: float
    beta_plus: float
    s1: float = 1.0
    K: int = 200
    t_glob: float = 0.0

    def __post_init__(self):
        if not (self.alpha_minus < 0 < self.alpha_plus and self.beta_minus < 0 < self.beta_plus):
            raise ValueError("need alpha_minus < 0 < alpha_plus and beta_minus < 0 < beta_plus")
        if self.s1 <= 0:
            raise ValueError("s1 must be positive")
        if self.t_glob < 0:
            raise ValueError("t_glob must be nonnegative")

    @classmethod
    def of(cls, alpha, beta, **kw) -> "SaddleParams":
        return cls(alpha[0], alpha[1], beta[0], beta[1], **kw)

    @property
    def ratio_A(self) -> float:
        return abs(self.alpha_minus) / self.beta_plus

    @property
    def ratio_B(self) -> float:
        return abs(self.beta_minus) / self.alpha_plus

    @property
    def rho(self) -> float:
        return abs(self.alpha_minus) * abs(self.beta_minus) / (self.alpha_plus * self.beta_plus)


@dataclass(frozen=True)
class SojournTrace:
    params: SaddleParams
    saddle: tuple[str, ...]
    log_s: np.ndarray
    log_tau: np.ndarray
    log_time_A: np.ndarray
    log_time_total: np.ndarray

    @property
    def s(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_s)

    @property
    def tau(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_tau)

    @property
    def fraction_A(self) -> np.ndarray:
        return np.exp(self.log_time_A - self.log_time_total)

    def to_dict(self):
        return {"params": self.params, "fraction_A": self.fraction_A, "log_s": self.log_s}

    def write_csv(self, path):
        rows = zip(range(1, len(self.saddle) + 1), self.saddle, self.s.tolist(), self.tau.tolist(),
                   self.fraction_A.tolist())
        return write_csv(path, ["k", "saddle", "s", "tau", "fraction_A"], rows)


class _Accumulator:
    """Running sum that moves to log-domain once it exceeds ``LINEAR_LIMIT``."""

    def __init__(self):
        self.value = 0.0
        self.log_value = -math.inf
        self.linear = True

    def add_log(self, log_x: float):
        if self.linear and log_x < math.log(LINEAR_LIMIT):
            self.value += math.exp(log_x)
            if self.value < LINEAR_LIMIT:
                return
        if self.linear:
            self.linear = False
            self.log_value = math.log(self.value) if self.value > 0 else -math.inf
        self.log_value = np.logaddexp(self.log_value, log_x)

    @property
    def log(self) -> float:
        if self.linear:
            return math.log(self.value) if self.value > 0 else -math.inf
        return float(self.log_value)


def simulate(params: SaddleParams, K: int | None = None) -> SojournTrace:
    """Apply the passage law for ``K`` passes, A on odd passes and B on even ones."""
    K = params.K if K is None else K
    if K < 4:
        raise ValueError("need K >= 4")
    if params.rho <= 1 and K > 10_000:
        warnings.warn(DivergenceWarning(f"rho = {params.rho} <= 1: the time averages converge"), stacklevel=2)
    log_rA, log_rB = math.log(params.ratio_A), math.log(params.ratio_B)
    log_bp, log_ap = math.log(params.beta_plus), math.log(params.alpha_plus)
    log_glob = math.log(params.t_glob) if params.t_glob > 0 else None
    saddle, log_s, log_tau, log_A, log_T = [], np.empty(K), np.empty(K), np.empty(K), np.empty(K)
    acc_A, acc_T = _Accumulator(), _Accumulator()
    ls = math.log(params.s1)
    for k in range(K):
        at_A = k % 2 == 0
        lt = ls - (log_bp if at_A else log_ap)
        saddle.append("A" if at_A else "B")
        log_s[k], log_tau[k] = ls, lt
        if at_A:
            acc_A.add_log(lt)
        acc_T.add_log(lt)
        if log_glob is not None:
            acc_T.add_log(log_glob)
        log_A[k] = acc_A.log
        log_T[k] = acc_T.log
        ls += log_rA if at_A else log_rB
    return SojournTrace(params, tuple(saddle), log_s, log_tau, log_A, log_T)


def fraction_limit_points(params: SaddleParams, K: int | None = None) -> tuple[float, float]:
    """(max, min) of the running fraction near A over passes ``ceil(K/2)..K``."""
    K = params.K if K is None else K
    if K < 40:
        raise ValueError("need K >= 40")
    frac = simulate(params, K).fraction_A
    tail = frac[math.ceil(K / 2) - 1:]
    return float(tail.max()), float(tail.min())


@dataclass(frozen=True)
class EtaMeasure:
    c_A: float
    c_B: float

    @property
    def mass(self) -> float:
        return self.c_A + self.c_B

    def to_dict(self):
        return {"c_A": self.c_A, "c_B": self.c_B, "mass": self.mass}


def eta_measure(params: SaddleParams) -> EtaMeasure:
    am, bm = abs(params.alpha_minus), abs(params.beta_minus)
    return EtaMeasure(am / (am + params.beta_plus), bm / (bm + params.alpha_plus))


@dataclass(frozen=True)
class TakensDiagnostics:
    holds: bool
    rho: float
    product: float
    mass_in_range: bool | None

    def to_dict(self):
        return {"holds": self.holds, "rho": self.rho, "c_A_times_c_B": self.product,
                "mass_in_(1,2)": self.mass_in_range}


def takens_condition(params: SaddleParams) -> TakensDiagnostics:
    """``rho > 1`` as the divergence criterion, with the eta-coefficient diagnostics."""
    eta = eta_measure(params)
    rho = params.rho
    holds = rho > 1
    return TakensDiagnostics(holds, rho, eta.c_A * eta.c_B, (1 < eta.mass < 2) if holds else None)


def sweep(param_sets: Iterable[SaddleParams], K: int | None = None) -> list[dict]:
    out = []
    for p in param_sets:
        hi, lo = fraction_limit_points(p, K)
        eta = eta_measure(p)
        out.append({"params": p, "limsup": hi, "liminf": lo, "rho": p.rho, "c_A": eta.c_A, "c_B": eta.c_B})
    return out


def write_sweep_json(path, param_sets: Iterable[SaddleParams], K: int | None = None):
    return write_json(path, sweep(param_sets, K))
