"""Joint code-visual reward shaping and the training-time reward service."""

from dcgkit.reward.engine import (
    ADVANTAGE_EPSILON,
    RewardBatchError,
    RewardConfig,
    RewardGroup,
    RolloutDetail,
    group_advantages,
    jcv_reward,
    reward_batch,
)
from dcgkit.reward.service import create_reward_app, serve_rewards

__all__ = [
    "ADVANTAGE_EPSILON",
    "RewardBatchError",
    "RewardConfig",
    "RewardGroup",
    "RolloutDetail",
    "group_advantages",
    "jcv_reward",
    "reward_batch",
    "create_reward_app",
    "serve_rewards",
]
