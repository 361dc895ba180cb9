"""Numerical laboratory for attractors, historic behaviour and ergodic optimisation
on small example maps."""

__version__ = "0.1.0"

from .systems import (  # noqa: E402
    ConfigError, OrbitTruncated, SingularityError, Space, UnsupportedFamilyError,
    critical_set, derivative_log_norm, evaluate, make_system, orbit,
)
from .orbitstats import BudgetError, ContractError  # noqa: E402

__all__ = [
    "BudgetError", "ConfigError", "ContractError", "OrbitTruncated", "SingularityError", "Space",
    "UnsupportedFamilyError", "critical_set", "derivative_log_norm", "evaluate", "make_system", "orbit",
    "__version__",
]
