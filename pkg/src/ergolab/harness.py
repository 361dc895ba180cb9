"""Experiment runner: config in, JSON report and CSV artifacts out."""
from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from . import boweneye, decompose, ergopt, growing, orbitstats
from ._rng import seeded_points
from .config import ExperimentConfig, UsageError, check_ceilings
from .io import to_jsonable, write_json
from .systems import ConfigError, SymbolicDoubling, System, system_from_config

PHI_LIBRARY: dict[str, Callable] = {
    "cos": lambda x: 0.5 * (1.0 + np.cos(2.0 * np.pi * x)),
    "sin": lambda x: 0.5 * (1.0 + np.sin(2.0 * np.pi * x)),
    "x": lambda x: np.asarray(x, dtype=float),
}


@dataclass
class RunReport:
    config: ExperimentConfig
    results: dict[str, Any] = field(default_factory=dict)
    verdicts: dict[str, bool] = field(default_factory=dict)
    artifacts: list[str] = field(default_factory=list)
    wall_time: float = 0.0
    timing: dict[str, float] = field(default_factory=dict)
    version: str = __version__

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_dict(self, with_timing: bool = True):
        d = {"config": self.config, "results": self.results, "verdicts": self.verdicts,
             "artifacts": self.artifacts, "version": self.version}
        if with_timing:
            d["wall_time"] = self.wall_time
            d["timing"] = self.timing
        return d

    def digest(self) -> str:
        """SHA-256 of the report without its timing fields."""
        text = json.dumps(to_jsonable(self.to_dict(with_timing=False)), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()


def _phi(name: str, system: System) -> Callable:
    """Named test function; on multi-dimensional spaces it reads the first coordinate."""
    if name not in PHI_LIBRARY:
        raise UsageError(f"[schedule] phi: unknown test function {name!r}; choose from {sorted(PHI_LIBRARY)}")
    fn = PHI_LIBRARY[name]
    if system.space.dim == 1:
        return fn
    return lambda x: fn(np.asarray(x)[..., 0])


def build_system(config: ExperimentConfig) -> System:
    """System from the [system] section.

    ``symbolic_doubling`` accepts ``targets`` (binary words) plus ``rho_b``
    and ``growth`` in place of an explicit program; the oscillating orbit is
    then built to cover the ``N`` budget.
    """
    sys_cfg = dict(config.system)
    if sys_cfg.get("family") == "symbolic_doubling" and "targets" in sys_cfg:
        targets = [str(t) for t in sys_cfg.pop("targets")]
        rho = float(sys_cfg.pop("rho_b", 4.0))
        growth = str(sys_cfg.pop("growth", "accelerating"))
        bits = int(sys_cfg.pop("bits", 53))
        N = int(config.budget.get("N", 10 ** 6))
        prog = ergopt.construct_oscillating_orbit(targets, rho, N + bits, growth, bits)
        return SymbolicDoubling(program=prog)
    try:
        return system_from_config(sys_cfg)
    except ConfigError as exc:
        raise UsageError(f"[system] {exc}") from None


def _x0(config: ExperimentConfig, system: System):
    sched = config.schedule
    if isinstance(system, SymbolicDoubling):
        return int(sched.get("x0", 0))
    if "x0" in sched:
        return sched["x0"]
    i = int(sched.get("point_index", 0))
    pts = seeded_points(config.seed, i + 1, system.space.dim)
    return pts[i]


def _need(config: ExperimentConfig, key: str):
    if key not in config.budget:
        raise UsageError(f"[budget] {key}: required for kind {config.kind}")
    return config.budget[key]


# ---------------------------------------------------------------------------
# per-kind runners; each returns (results, artifacts-writer)
# ---------------------------------------------------------------------------

def _run_orbit_stats(config, system, out):
    s = config.schedule
    N = _need(config, "N")
    x0 = _x0(config, system)
    pts, reason = orbitstats.orbit_points(system, x0, N)
    ratio = float(s.get("ratio", 1.05))
    res: dict[str, Any] = {"x0": x0, "truncated": reason}
    rep = orbitstats.birkhoff_series(system, x0, _phi(str(s.get("phi", "cos")), system), N, ratio, points=pts)
    res["birkhoff"] = {"limsup": rep.limsup, "liminf": rep.liminf, "gap": rep.gap,
                       "final": rep.averages[-1], "tail_start": rep.tail_start}
    if "U" in s:
        lo, hi = s["U"]
        res["visiting_frequency"] = orbitstats.visiting_frequency(system, x0, orbitstats.Box.of(lo, hi), N,
                                                                  ratio, points=pts)
    if "omega_m" in s:
        om = orbitstats.omega_limit_estimate(system, x0, N, s["omega_m"], float(s.get("tail_fraction", 0.5)), pts)
        res["omega_limit"] = {"m": s["omega_m"], "n_cells": len(om), "cells": sorted(om)}
    files = {}
    if out is not None:
        files["checkpoints.csv"] = lambda p: orbitstats.write_checkpoint_csv(p, rep)
    return res, files


def _run_spectrum(config, system, out):
    s = config.schedule
    N, m = _need(config, "N"), _need(config, "m")
    x0 = _x0(config, system)
    pts, reason = orbitstats.orbit_points(system, x0, N)
    ratio = float(s.get("ratio", 1.05))
    tail_fraction = float(s.get("tail_fraction", 0.5))
    spectrum = orbitstats.statistical_spectrum(system, x0, N, m, ratio, float(s.get("eps_c", 0.05)), points=pts)
    burn = len(pts) - int(math.ceil(tail_fraction * len(pts)))
    tail_spectrum = orbitstats.statistical_spectrum(system, x0, N, m, ratio, float(s.get("eps_c", 0.05)),
                                                burn_in=burn, points=pts)
    omega_star = orbitstats.statistical_omega_limit(tail_spectrum, float(s.get("mass_floor", 1e-6)))
    omega = orbitstats.omega_limit_estimate(system, x0, N, m, tail_fraction, pts)
    d = spectrum.pairwise_distances()
    res = {"x0": x0, "truncated": reason, "n_representatives": len(spectrum.representatives),
           "hits": list(spectrum.hits), "first_seen": list(spectrum.first_seen),
           "accumulating": spectrum.accumulating(), "max_separation": float(d.max()) if d.size else 0.0,
           "pairwise_distances": d.tolist(), "omega_star_cells": sorted(omega_star),
           "omega_cells": sorted(omega), "omega_star_subset_omega": omega_star <= omega}
    if "U" in s:
        lo, hi = s["U"]
        res["visiting_frequency"] = orbitstats.visiting_frequency(system, x0, orbitstats.Box.of(lo, hi), N,
                                                                  ratio, points=pts)
    files = {}
    if out is not None:
        rep = orbitstats.birkhoff_series(system, x0, _phi(str(s.get("phi", "cos")), system), N, ratio, points=pts)
        files["checkpoints.csv"] = lambda p: orbitstats.write_checkpoint_csv(p, rep, spectrum)
    return res, files


def _run_optimize(config, system, out):
    s = config.schedule
    P = _need(config, "P")
    phi = _phi(str(s.get("phi", "cos")), system)
    r = ergopt.max_birkhoff_over_periodic(system, phi, P)
    res = {"max": r.to_dict()}
    return res, {}


def _run_decompose(config, system, out):
    s = config.schedule
    m = _need(config, "m")
    g = decompose.build_transition_graph(system, m, s.get("samples"), int(s.get("padding", 1)), config.seed)
    rep = decompose.attractors_and_basins(g, int(s.get("fat_block", 2)))
    strong, witness = decompose.strong_transitivity_check(g)
    res = {"count": rep.count, "attractors": [sorted(a) for a in rep.attractors],
           "basin_sizes": [len(b) for b in rep.basins], "n_undecided": len(rep.undecided),
           "omega_size": len(rep.omega), "fat": list(rep.fat), "inscribed_radius": list(rep.inscribed_radius),
           "strongly_transitive": strong, "witness": witness, "n_edges": int(g.adjacency.nnz)}
    files = {}
    if out is not None:
        files["edges.csv"] = g.write_edges_csv
        files["raster.csv"] = rep.write_raster_csv
        files["attractors.json"] = lambda p: write_json(p, rep)
    return res, files


def _run_growing(config, system, out):
    s = config.schedule
    N = _need(config, "N")
    x0 = float(_x0(config, system))
    res: dict[str, Any] = {"x0": x0}
    files = {}
    if "delta" in s:
        rec = growing.growing_times(system, x0, float(s["delta"]), N,
                                    pre_balls=bool(s.get("pre_balls", False)))
        res["growing"] = {"density": rec.density, "count": len(rec.times), "first": rec.times[:20],
                          "truncated": rec.truncated}
        if out is not None:
            files["growing_times.csv"] = rec.write_csv
    if "delta_t" in s:
        nd = growing.nue_averages(system, x0, N, float(s["delta_t"]))
        res["nue"] = {"slow_recurrence": float(nd.slow_recurrence[-1]), "expansion": float(nd.expansion[-1]),
                      "max_abs_expansion_tail": float(np.max(np.abs(nd.expansion[len(nd.expansion) // 2:]))),
                      "slow_recurrence_max": float(np.max(nd.slow_recurrence)), "truncated": nd.truncated}
        if out is not None:
            files["nue.csv"] = nd.write_csv
    if "horseshoe_p" in s:
        hs = growing.horseshoe_search(system, float(s["horseshoe_p"]), float(s.get("horseshoe_eps", 0.2)),
                                      int(s.get("horseshoe_n_max", 8)))
        res["horseshoe"] = None if hs is None else hs.to_dict()
    return res, files


def _saddle(config) -> boweneye.SaddleParams:
    s = config.system
    try:
        return boweneye.SaddleParams.of(tuple(s["alpha"]), tuple(s["beta"]), s1=float(s.get("s1", 1.0)),
                                        K=int(config.budget.get("K", 200)), t_glob=float(s.get("t_glob", 0.0)))
    except KeyError as exc:
        raise UsageError(f"[system] {exc.args[0]}: required for kind boweneye") from None
    except ValueError as exc:
        raise UsageError(f"[system] {exc}") from None


def _run_boweneye(config, _system, out):
    p = _saddle(config)
    hi, lo = boweneye.fraction_limit_points(p)
    tk = boweneye.takens_condition(p)
    eta = boweneye.eta_measure(p)
    res = {"limsup": hi, "liminf": lo, "gap": hi - lo, "takens": tk.to_dict(), "eta": eta.to_dict()}
    files = {}
    if out is not None:
        trace = boweneye.simulate(p)
        files["trace.csv"] = trace.write_csv
        files["sweep.json"] = lambda path: boweneye.write_sweep_json(path, [p])
    return res, files


RUNNERS = {
    "orbit-stats": _run_orbit_stats,
    "spectrum": _run_spectrum,
    "optimize": _run_optimize,
    "decompose": _run_decompose,
    "growing": _run_growing,
    "boweneye": _run_boweneye,
}


def run(config: ExperimentConfig) -> RunReport:
    """Run one experiment; writes ``report.json`` and CSVs when ``config.out`` is set."""
    if config.kind == "acceptance":
        from .acceptance import acceptance_suite
        return acceptance_suite(out=config.out)
    t0 = time.perf_counter()
    system = None if config.kind == "boweneye" else build_system(config)
    check_ceilings(config, 1 if system is None else system.space.dim)
    out = None if config.out is None else Path(config.out)
    results, files = RUNNERS[config.kind](config, system, out)
    report = RunReport(config, to_jsonable(results))
    if system is not None:
        report.results["system"] = {"family": system.family, **to_jsonable(system.params())}
    if out is not None:
        for name, writer in files.items():
            writer(out / name)
            report.artifacts.append(name)
        report.artifacts.append("report.json")
    report.wall_time = time.perf_counter() - t0
    if out is not None:
        write_json(out / "report.json", report)
    return report


def acceptance_suite(out=None) -> RunReport:
    from .acceptance import acceptance_suite as _suite
    return _suite(out=out)
