"""Experiment configuration files.

One experiment per INI-style file::

    [experiment]
    kind = decompose
    seed = 7

    [system]
    family = logistic
    t = 0.8

    [budget]
    m = 1024

    [schedule]
    padding = 1

Values are Python literals where they parse as such (numbers, lists,
tuples, booleans) and plain strings otherwise.
"""
from __future__ import annotations

import ast
import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .systems import ConfigError

KINDS = ("orbit-stats", "spectrum", "optimize", "decompose", "growing", "boweneye", "acceptance")
BUDGET_KEYS = ("N", "m", "P", "K")
SECTIONS = ("experiment", "system", "budget", "schedule")

# per-kind ceilings; m is cells per axis and depends on the dimension
CEILINGS = {
    "N": 10 ** 7,
    "K": 10 ** 6,
    "P": 20,
    "m": {1: 8192, 2: 256, 3: 32},
}


class UsageError(ConfigError):
    """Malformed configuration; the message names the offending field."""


def _parse_value(text: str) -> Any:
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def _format_value(value: Any) -> str:
    if isinstance(value, str) and _parse_value(value) == value:
        return value
    return repr(value)


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    system: dict = field(default_factory=dict)
    budget: dict = field(default_factory=dict)
    schedule: dict = field(default_factory=dict)
    seed: int = 0
    out: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UsageError(f"[experiment] kind: unknown kind {self.kind!r}; choose from {', '.join(KINDS)}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
            raise UsageError(f"[experiment] seed: must be an integer in [0, 2^64), got {self.seed!r}")
        for key, value in self.budget.items():
            if key not in BUDGET_KEYS:
                raise UsageError(f"[budget] {key}: unknown budget; choose from {', '.join(BUDGET_KEYS)}")
            if key == "m":
                ok = isinstance(value, int) or (isinstance(value, (tuple, list)) and all(isinstance(v, int) for v in value))
            else:
                ok = isinstance(value, int)
            if not ok:
                raise UsageError(f"[budget] {key}: expected an integer, got {value!r}")

    # -- text form ---------------------------------------------------------
    @classmethod
    def parse(cls, text: str, source: str = "<config>") -> "ExperimentConfig":
        cp = configparser.ConfigParser(interpolation=None, delimiters=("=",))
        cp.optionxform = str
        try:
            cp.read_string(text, source=source)
        except configparser.Error as exc:
            raise UsageError(f"{source}: {exc}") from None
        for name in cp.sections():
            if name not in SECTIONS:
                raise UsageError(f"{source}: unknown section [{name}]")
        if not cp.has_option("experiment", "kind"):
            raise UsageError(f"{source}: [experiment] kind is required")
        exp = {k: _parse_value(v) for k, v in cp["experiment"].items()}
        unknown = set(exp) - {"kind", "seed", "out"}
        if unknown:
            raise UsageError(f"{source}: [experiment] unknown keys {sorted(unknown)}")

        def section(name):
            return {k: _parse_value(v) for k, v in cp[name].items()} if cp.has_section(name) else {}

        return cls(kind=str(exp["kind"]), system=section("system"), budget=section("budget"),
                   schedule=section("schedule"), seed=exp.get("seed", 0), out=exp.get("out"))

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
        return cls.parse(text, source=str(path))

    def to_text(self) -> str:
        lines = ["[experiment]", f"kind = {self.kind}", f"seed = {self.seed}"]
        if self.out is not None:
            lines.append(f"out = {_format_value(self.out)}")
        for name in ("system", "budget", "schedule"):
            sec = getattr(self, name)
            if sec:
                lines += ["", f"[{name}]"] + [f"{k} = {_format_value(v)}" for k, v in sec.items()]
        return "\n".join(lines) + "\n"

    def with_overrides(self, seed: int | None = None, out: str | None = None) -> "ExperimentConfig":
        return replace(self, seed=self.seed if seed is None else seed, out=self.out if out is None else out)

    def to_dict(self):
        return {"kind": self.kind, "system": self.system, "budget": self.budget,
                "schedule": self.schedule, "seed": self.seed, "out": self.out}


def check_ceilings(config: ExperimentConfig, dim: int = 1):
    """Refuse budgets above the documented ceilings."""
    from .orbitstats import BudgetError

    for key, value in config.budget.items():
        if key == "m":
            limit = CEILINGS["m"].get(dim, 16)
            vals = value if isinstance(value, (tuple, list)) else [value]
            if max(vals) > limit:
                raise BudgetError(f"[budget] m = {value} exceeds the ceiling {limit} for dimension {dim}")
        elif value > CEILINGS[key]:
            raise BudgetError(f"[budget] {key} = {value} exceeds the ceiling {CEILINGS[key]}")
        elif value < 1:
            raise BudgetError(f"[budget] {key} must be positive")
