"""Acceptance criteria 1-9, each a set of experiment configs plus a verdict."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import numpy as np
from scipy.optimize import brentq

from . import decompose, ergopt, growing, orbitstats
from ._rng import point_rng
from .config import ExperimentConfig
from .grid import GridPartition
from .io import write_json
from .systems import CIRCLE, make_system

_SYMBOLIC = """[system]
family = symbolic_doubling
targets = ['0', '01']
rho_b = 4.0
"""

CONFIGS: dict[str, str] = {
    "c1_optimize": "[experiment]\nkind = optimize\n[system]\nfamily = doubling\n[budget]\nP = 12\n[schedule]\nphi = cos\n",
    "c1_orbit": "[experiment]\nkind = orbit-stats\n" + _SYMBOLIC + "[budget]\nN = 1000000\n[schedule]\nphi = cos\n",
    "c2_spectrum": "[experiment]\nkind = spectrum\n" + _SYMBOLIC + "[budget]\nN = 1000000\nm = 64\n[schedule]\neps_c = 0.05\n",
    **{f"c3_mp_{i}": ("[experiment]\nkind = spectrum\nseed = 0\n[system]\nfamily = manneville_pomeau\ngamma = 1.0\n"
                      f"[budget]\nN = 1000000\nm = 100\n[schedule]\npoint_index = {i}\nU = (-0.02, 0.02)\n"
                      "tail_fraction = 0.5\n") for i in range(5)},
    "c4_doubling": "[experiment]\nkind = decompose\n[system]\nfamily = doubling\n[budget]\nm = 64\n",
    "c4_contraction": "[experiment]\nkind = decompose\n[system]\nfamily = contraction\nfactor = 0.5\n[budget]\nm = 64\n",
    "c4_logistic": "[experiment]\nkind = decompose\n[system]\nfamily = logistic\nt = 0.8\n[budget]\nm = 1024\n",
    "c5_skew_tent": "[experiment]\nkind = decompose\n[system]\nfamily = skew_tent\n[budget]\nm = 64\n",
    "c6_symmetric": "[experiment]\nkind = boweneye\n[system]\nalpha = (-2, 1)\nbeta = (-2, 1)\n[budget]\nK = 200\n",
    "c6_control": "[experiment]\nkind = boweneye\n[system]\nalpha = (-1, 2)\nbeta = (-1, 2)\n[budget]\nK = 200\n",
    "c7_doubling": "[experiment]\nkind = growing\n[system]\nfamily = doubling\n[budget]\nN = 100000\n[schedule]\ndelta_t = 0.001\n",
    "c7_mp": ("[experiment]\nkind = growing\n[system]\nfamily = manneville_pomeau\ngamma = 1.0\n"
              "[budget]\nN = 1000000\n[schedule]\ndelta_t = 0.001\n"),
    "c7_logistic": ("[experiment]\nkind = growing\n[system]\nfamily = logistic\nt = 1.0\n"
                    "[budget]\nN = 1000000\n[schedule]\ndelta_t = 0.001\n"),
    **{f"c8_doubling_{s}": (f"[experiment]\nkind = growing\nseed = {s}\n[system]\nfamily = doubling\n"
                            "[budget]\nN = 1000\n[schedule]\ndelta = 0.1\nhorseshoe_p = 0.5\nhorseshoe_eps = 0.2\n"
                            "horseshoe_n_max = 4\n") for s in range(3)},
}


def config(name: str) -> ExperimentConfig:
    return ExperimentConfig.parse(CONFIGS[name], source=name)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    runtime: float
    limit: float | None
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lim = f" (limit {self.limit:g} s)" if self.limit is not None else ""
        return f"{status} criterion {self.number}: {self.title} [{self.runtime:.1f} s{lim}]"

    def to_dict(self):
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "runtime": self.runtime, "limit": self.limit, "details": self.details}


class _Runner:
    """Runs named configs once and remembers their report digests."""

    def __init__(self):
        self.digests: dict[str, str] = {}

    def __call__(self, name: str):
        from .harness import run
        rep = run(config(name))
        self.digests[name] = rep.digest()
        return rep.results


def _c1(run):
    opt = run("c1_optimize")["max"]
    orb = run("c1_orbit")["birkhoff"]
    checks = {
        "max_is_one": opt["value"] == 1.0,
        "witness_fixed_point_0": opt["witness"]["points"] == ["0/1"],
        "limsup_ge_0.98": orb["limsup"] >= 0.98,
        "liminf_le_0.27": orb["liminf"] <= 0.27,
    }
    return checks, {"max": opt["value"], "witness": opt["witness"]["points"],
                    "limsup": orb["limsup"], "liminf": orb["liminf"]}


def _c2(run):
    r = run("c2_spectrum")
    checks = {"at_least_two_representatives": r["n_representatives"] >= 2,
              "separated_by_0.2": r["max_separation"] >= 0.2}
    return checks, {"n_representatives": r["n_representatives"], "max_separation": r["max_separation"]}


def _c3(run):
    checks, details = {}, {}
    for i in range(5):
        r = run(f"c3_mp_{i}")
        cover = len(r["omega_cells"])
        vf = r["visiting_frequency"]
        checks[f"point_{i}_covers_100"] = cover == 100
        checks[f"point_{i}_frequency_ge_0.9"] = vf >= 0.9
        details[f"point_{i}"] = {"x0": r["x0"], "covered": cover, "visiting_frequency": vf}
    return checks, details


def logistic_two_cycle(t: float = 0.8) -> tuple[float, float]:
    """Period-2 orbit of ``4 t x (1 - x)`` from a bracketed root of ``f(f(x)) - x``."""
    f = lambda x: 4.0 * t * x * (1.0 - x)
    fixed = 1.0 - 1.0 / (4.0 * t)
    a = brentq(lambda x: f(f(x)) - x, 0.25, fixed - 1e-6, xtol=1e-15)
    return a, f(a)


def _c4(run):
    d = run("c4_doubling")
    c = run("c4_contraction")
    lg = run("c4_logistic")
    a, b = logistic_two_cycle(0.8)
    grid = GridPartition.of(make_system("logistic", t=0.8).space, 1024)
    cyc = grid.cell_of(np.array([a, b]))
    att = np.array(lg["attractors"][0]) if lg["count"] else np.array([], dtype=int)
    far = int(np.max(np.min(np.abs(att[:, None] - cyc[None, :]), axis=1))) if att.size else -1
    pad = 1
    checks = {
        "doubling_one_attractor": d["count"] == 1,
        "doubling_attractor_all_cells": d["attractors"][0] == list(range(64)),
        "doubling_strongly_transitive": d["strongly_transitive"] is True,
        "contraction_one_attractor": c["count"] == 1,
        "contraction_near_0": c["count"] == 1 and max(c["attractors"][0]) <= 1 + pad,
        "contraction_basin_all": c["basin_sizes"] == [64],
        "logistic_one_attractor": lg["count"] == 1,
        "logistic_within_2_cells": lg["count"] == 1 and 0 <= far <= 2,
    }
    return checks, {"two_cycle": [a, b], "cycle_cells": cyc.tolist(), "logistic_attractor": att.tolist(),
                    "logistic_max_cell_distance": far, "contraction_attractor": c["attractors"]}


def _c5(run):
    r = run("c5_skew_tent")
    base = sorted({cell // 64 for cell in r["attractors"][0]}) if r["count"] else []
    checks = {"single_terminal_scc": r["count"] == 1, "projects_onto_base": base == list(range(64))}
    return checks, {"count": r["count"], "base_columns": len(base), "attractor_size": len(r["attractors"][0])}


def _c6(run):
    s = run("c6_symmetric")
    ctl = run("c6_control")
    checks = {
        "limsup_2/3": abs(s["limsup"] - 2 / 3) <= 1e-3,
        "liminf_1/3": abs(s["liminf"] - 1 / 3) <= 1e-3,
        "eta_exact": s["eta"]["c_A"] == 2 / 3 and s["eta"]["c_B"] == 2 / 3,
        "rho_4": s["takens"]["rho"] == 4.0 and s["takens"]["holds"],
        "mass_in_(1,2)": s["takens"]["mass_in_(1,2)"] is True,
        "control_converges": ctl["gap"] < 1e-3,
    }
    return checks, {"symmetric": s, "control_gap": ctl["gap"]}


def _c7(run):
    d = run("c7_doubling")["nue"]
    mp = run("c7_mp")["nue"]
    lg = run("c7_logistic")["nue"]
    checks = {
        "doubling_expansion_log2": abs(d["expansion"] - math.log(2)) <= 1e-12,
        "doubling_slow_recurrence_zero": d["slow_recurrence_max"] == 0.0,
        "mp_expansion_le_0.05": mp["expansion"] <= 0.05,
        "logistic_expansion_log2": abs(lg["expansion"] - math.log(2)) <= 0.05,
    }
    return checks, {"doubling": d["expansion"], "mp": mp["expansion"], "logistic": lg["expansion"]}


def _c8(run):
    checks, details = {}, {}
    for s in range(3):
        r = run(f"c8_doubling_{s}")
        checks[f"density_1_seed_{s}"] = r["growing"]["density"] == 1.0
        details[f"density_seed_{s}"] = r["growing"]["density"]
        hs = r["horseshoe"]
        checks[f"horseshoe_seed_{s}"] = (hs is not None and hs["n0"] == 2 and hs["n1"] == 2
                                         and _close_pair(hs["U0"], (0.325, 0.425)) and _close_pair(hs["U1"], (0.575, 0.675)))
        details["horseshoe"] = hs
    checks["entropy_bound"] = growing.entropy_lower_bound(2, 2) == math.log(2) / 2
    return checks, details


def _close_pair(u, v, tol=1e-12) -> bool:
    return abs(u[0] - v[0]) <= tol and abs(u[1] - v[1]) <= tol


# ---------------------------------------------------------------------------
# criterion 9: property suites
# ---------------------------------------------------------------------------

def metric_axioms(n_pairs: int = 1000, m: int = 32, seed: int = 0) -> dict[str, bool]:
    rng = point_rng(seed, 9, 0)
    grid = GridPartition.of(CIRCLE, m)
    fam = orbitstats.TestFunctionFamily.harmonics(CIRCLE)
    ok = {"identity": True, "symmetry": True, "nonnegative": True, "triangle": True, "separates": True}
    for _ in range(n_pairs):
        mu, nu, la = (orbitstats.EmpiricalMeasure(grid, _hist(rng, m), 1) for _ in range(3))
        d_mn = orbitstats.measure_distance(mu, nu, fam)
        ok["identity"] &= orbitstats.measure_distance(mu, mu, fam) == 0.0
        ok["symmetry"] &= abs(d_mn - orbitstats.measure_distance(nu, mu, fam)) <= 1e-15
        ok["nonnegative"] &= d_mn >= 0.0
        ok["separates"] &= d_mn > 0.0
        ok["triangle"] &= d_mn <= orbitstats.measure_distance(mu, la, fam) + orbitstats.measure_distance(la, nu, fam) + 1e-14
    return ok


def _hist(rng, m):
    h = rng.random(m) * (rng.random(m) < 0.7)
    if h.sum() == 0:
        h[0] = 1.0
    return h / h.sum()


def graph_properties() -> dict[str, bool]:
    out = {}
    cases = {"doubling": (make_system("doubling"), 64), "contraction": (make_system("contraction"), 64),
             "logistic": (make_system("logistic", t=0.8), 1024), "skew_tent": (make_system("skew_tent"), 64)}
    for name, (sys_, m) in cases.items():
        g0 = decompose.build_transition_graph(sys_, m, padding=0)
        g1 = decompose.build_transition_graph(sys_, m, padding=1)
        for label, g in (("pad0", g0), ("pad1", g1)):
            try:
                decompose.acyclic_condensation(g)
                out[f"{name}_{label}_acyclic"] = True
            except AssertionError:
                out[f"{name}_{label}_acyclic"] = False
        diff = g0.adjacency.astype(bool).astype(np.int8) - g1.adjacency.astype(bool).astype(np.int8)
        out[f"{name}_edges_monotone"] = not (diff > 0).nnz
        a0 = decompose.attractors_and_basins(g0).attractors
        a1 = decompose.attractors_and_basins(g1).attractors
        union1 = frozenset().union(*a1)
        out[f"{name}_attractors_monotone"] = all(a <= union1 for a in a0)
    return out


def periodic_exactness() -> dict[str, bool]:
    out = {}
    d = make_system("doubling")
    orbits = ergopt.enumerate_periodic_orbits(d, 12)
    out["doubling_orbits_exact"] = all(_exact_cycle(o, lambda x: (2 * x) % 1) for o in orbits)
    out["doubling_point_count"] = all(
        sum(o.period for o in orbits if p % o.period == 0) == 2 ** p - 1 for p in range(1, 13))
    cat = make_system("cat_map")
    (a, b), (c, e) = cat.matrix
    step = lambda x: ((a * x[0] + b * x[1]) % 1, (c * x[0] + e * x[1]) % 1)
    orbits = ergopt.enumerate_periodic_orbits(cat, 8)
    out["cat_orbits_exact"] = all(_exact_cycle(o, step) for o in orbits)
    counts = []
    M = np.array(cat.matrix, dtype=object)
    Mp = np.eye(2, dtype=object)
    for p in range(1, 9):
        Mp = Mp.dot(M)
        det = abs((Mp[0, 0] - 1) * (Mp[1, 1] - 1) - Mp[0, 1] * Mp[1, 0])
        counts.append(sum(o.period for o in orbits if p % o.period == 0) == det)
    out["cat_point_count"] = all(counts)
    return out


def _exact_cycle(orbit, step) -> bool:
    pts = list(orbit.points)
    if not all(isinstance(v, Fraction) for p in pts for v in (p if isinstance(p, tuple) else (p,))):
        return False
    for i, p in enumerate(pts):
        if step(p) != pts[(i + 1) % len(pts)]:
            return False
    return len(set(pts)) == orbit.period


def _c9(run, first: dict[str, str]):
    checks = {}
    for name in CONFIGS:
        if name.startswith(("c2_", "c3_")):
            checks[f"omega_star_subset_{name}"] = run(name)["omega_star_subset_omega"]
    for k, v in metric_axioms().items():
        checks[f"metric_{k}"] = v
    for k, v in graph_properties().items():
        checks[f"graph_{k}"] = v
    for k, v in periodic_exactness().items():
        checks[f"periodic_{k}"] = v
    for name in CONFIGS:
        if name not in run.digests:
            run(name)
    mismatched = [n for n in CONFIGS if first.get(n) != run.digests.get(n)]
    checks["determinism"] = not mismatched
    return checks, {"mismatched_digests": mismatched}


CRITERIA: list[tuple[int, str, float | None, Callable]] = [
    (1, "doubling periodic maximum and oscillating orbit", 10.0, _c1),
    (2, "statistical spectrum with separated measures", 30.0, _c2),
    (3, "Manneville-Pomeau omega-limit and visiting frequency", 60.0, _c3),
    (4, "grid decomposition of doubling, contraction and logistic", 30.0, _c4),
    (5, "skew tent single attractor over the base", 120.0, _c5),
    (6, "Bowen eye fractions, eta and rho", 1.0, _c6),
    (7, "expansion and slow-recurrence averages", 60.0, _c7),
    (8, "growing times, horseshoe and entropy bound", 5.0, _c8),
    (9, "property suites and determinism", None, None),
]


def run_criteria(numbers=None) -> list[CriterionResult]:
    runner = _Runner()
    results = []
    wanted = set(numbers) if numbers is not None else {c[0] for c in CRITERIA}
    for number, title, limit, fn in CRITERIA:
        if number not in wanted:
            continue
        t0 = time.perf_counter()
        if number == 9:
            first = dict(runner.digests)
            rerun = _Runner()
            checks, details = _c9(rerun, first)
            if not first:
                checks.pop("determinism")
                details["note"] = "no earlier runs to compare against"
        else:
            checks, details = fn(runner)
        runtime = time.perf_counter() - t0
        ok = all(checks.values()) and (limit is None or runtime < limit)
        details = {"checks": checks, **details}
        if limit is not None and runtime >= limit:
            details["runtime_exceeded"] = True
        results.append(CriterionResult(number, title, ok, runtime, limit, details))
    return results


def acceptance_suite(out=None, numbers=None):
    from .harness import RunReport

    t0 = time.perf_counter()
    results = run_criteria(numbers)
    cfg = ExperimentConfig("acceptance", out=None if out is None else str(out))
    report = RunReport(cfg)
    report.results = {f"criterion_{r.number}": {"title": r.title, "details": r.details} for r in results}
    report.verdicts = {f"criterion_{r.number}": r.passed for r in results}
    report.timing = {f"criterion_{r.number}": r.runtime for r in results}
    report.results["lines"] = [r.line for r in results]
    report.wall_time = time.perf_counter() - t0
    if out is not None:
        write_json(Path(out) / "report.json", report)
        report.artifacts.append("report.json")
    return report
