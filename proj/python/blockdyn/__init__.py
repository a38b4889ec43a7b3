"""Block-diagram Newton-Euler multibody engine."""

from ._core import (
    AssemblyError,
    GimbalSingularity,
    ScenarioError,
    System,
    Trajectory,
    dcm_to_euler,
    dynamic_model_at,
    emit_scenario,
    euler_to_dcm,
    gamma,
)

__all__ = [
    "AssemblyError",
    "GimbalSingularity",
    "ScenarioError",
    "System",
    "Trajectory",
    "dcm_to_euler",
    "dynamic_model_at",
    "emit_scenario",
    "euler_to_dcm",
    "gamma",
]
