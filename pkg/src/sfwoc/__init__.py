"""Stochastic Frank-Wolfe for large populations of finite-state agents."""

from .battery import BatteryParams, coarse_bounds, generate, target_profile
from .core import BoundReport, aggregate, compute_constants, evaluate_J
from .dp import backward_pass, best_response, best_responses
from .errors import (
    ConstraintViolationError,
    EnumerationCapError,
    InfeasibleAgentError,
    InfeasibleTrajectoryError,
    InstanceMismatchError,
    SfwocError,
)
from .exact import build_micp, enumerate_micp_optimum, enumerate_optimum, m_to_trajectory, trajectory_to_m
from .fw import fw_gap, fw_linear_oracle, fw_run
from .io import read_instance, write_instance
from .lpformat import export_lp, read_lp
from .model import (
    AgentSpec,
    OcInstance,
    Trajectory,
    contribution_vector,
    evaluate_oc_cost,
    is_feasible,
    validate_instance,
)
from .sfw import SfwSchedule, sfw_iterate, sfw_run, theorem_bounds
from .social import SocialCostBlock, evaluate_social, gradient

__all__ = [
    "AgentSpec",
    "BatteryParams",
    "BoundReport",
    "ConstraintViolationError",
    "EnumerationCapError",
    "InfeasibleAgentError",
    "InfeasibleTrajectoryError",
    "InstanceMismatchError",
    "OcInstance",
    "SfwSchedule",
    "SfwocError",
    "SocialCostBlock",
    "Trajectory",
    "aggregate",
    "backward_pass",
    "best_response",
    "best_responses",
    "build_micp",
    "coarse_bounds",
    "compute_constants",
    "contribution_vector",
    "enumerate_micp_optimum",
    "enumerate_optimum",
    "evaluate_J",
    "evaluate_oc_cost",
    "evaluate_social",
    "export_lp",
    "fw_gap",
    "fw_linear_oracle",
    "fw_run",
    "generate",
    "gradient",
    "is_feasible",
    "m_to_trajectory",
    "read_instance",
    "read_lp",
    "sfw_iterate",
    "sfw_run",
    "target_profile",
    "theorem_bounds",
    "trajectory_to_m",
    "validate_instance",
    "write_instance",
]
