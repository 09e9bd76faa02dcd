"""Randomized weighted k-server on uniform metrics: phase grammar, strategies,
offline optimum and lower-bound checks."""

from .core import (
    DemandVector,
    Metric,
    Solution,
    WeightVector,
    is_l_active,
    round_weights,
    solution_cost,
    top_d,
)
from .errors import (
    ConstantTooLargeError,
    InstanceTooLargeError,
    MetricTooSmallError,
    NotActiveError,
    ValidationError,
    WkServerError,
)
from .offline import opt_cost, verify_phase_lower_bound
from .phase_model import c_const, parse_multiphase, parse_phase, split_phases
from .setting import Setting, UniformModel
from .strategy import run_1_phase, run_multiphase, run_phase, serve_online

__version__ = "0.1.0"

__all__ = [
    "ConstantTooLargeError", "DemandVector", "InstanceTooLargeError", "Metric", "MetricTooSmallError",
    "NotActiveError", "Setting", "Solution", "UniformModel", "ValidationError", "WeightVector",
    "WkServerError", "c_const", "is_l_active", "opt_cost", "parse_multiphase", "parse_phase",
    "round_weights", "run_1_phase", "run_multiphase", "run_phase", "serve_online", "solution_cost",
    "split_phases", "top_d", "verify_phase_lower_bound",
]
