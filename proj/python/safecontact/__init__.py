"""Safe-contact reaching: environment, reward, energy shield and evaluation tools."""

from ._core import (
    SUMMARY_SCHEMA_VERSION,
    CheckpointError,
    ConfigError,
    Env,
    calibrated_impact_gain,
    ke_project,
    lpf_coefficient,
    resolved_config,
    reward_preset,
    rollouts,
    run_command,
    shield_commands,
    total_reward,
)

__all__ = [
    "SUMMARY_SCHEMA_VERSION",
    "CheckpointError",
    "ConfigError",
    "Env",
    "calibrated_impact_gain",
    "ke_project",
    "lpf_coefficient",
    "resolved_config",
    "reward_preset",
    "rollouts",
    "run_command",
    "shield_commands",
    "total_reward",
]
