"""Goal-based retirement planning with deep Q-learning."""

from ._goalrl import (
    NUM_ACTIONS,
    STATE_DIM,
    CompatibilityError,
    ConvergenceError,
    GoalEnv,
    IntegrityError,
    IoError,
    ParseError,
    Profile,
    ValidationError,
    epsilon_at,
    estimate_goal_success,
    estimate_retirement_success,
    evaluate,
    oracle,
    pre_retirement_reward,
    retirement_reward,
    train,
    value_iteration,
)

__all__ = [
    "NUM_ACTIONS",
    "STATE_DIM",
    "CompatibilityError",
    "ConvergenceError",
    "GoalEnv",
    "IntegrityError",
    "IoError",
    "ParseError",
    "Profile",
    "ValidationError",
    "epsilon_at",
    "estimate_goal_success",
    "estimate_retirement_success",
    "evaluate",
    "oracle",
    "pre_retirement_reward",
    "retirement_reward",
    "train",
    "value_iteration",
]
