"""Joint code-visual rewards and group-normalized advantages.

A rollout's reward blends its two QA scores, ``w_code * s_code + w_video *
s_video``, with weights constrained to sum to 1.  A rollout whose chart
failed to render earns exactly ``failure_penalty`` (default -0.25)
regardless of weights; note the deliberate contrast with evaluation, where
a failed render scores 0.  Advantages normalize each group of rollouts to
zero mean and roughly unit spread, which is what a GRPO-style trainer
consumes; the trainer owns broadcasting the scalar over tokens.
"""

from __future__ import annotations

import logging
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

from dcgkit.evaluator.scoring import score_code, score_video
from dcgkit.gateway import Gateway, RetryExhaustedError
from dcgkit.model import (
    ChartSample,
    ErrorClass,
    RenderOutcome,
    RenderSettings,
    RenderStatus,
    Score,
)
from dcgkit.renderer.extract import extract_code
from dcgkit.renderer.pipeline import RenderProvider

logger = logging.getLogger(__name__)

#: Degeneracy guard added to the population standard deviation.
ADVANTAGE_EPSILON = 1e-8

#: Weights must sum to 1 within this tolerance.
_WEIGHT_TOLERANCE = 1e-9


class RewardBatchError(RuntimeError):
    """The whole batch failed (judge outage); the trainer should retry."""


@dataclass(frozen=True, slots=True)
class RewardConfig:
    """Reward shape: weights, penalty, group size, backends."""

    w_code: float = 0.8
    w_video: float = 0.2
    failure_penalty: float = -0.25
    group_size: int = 8
    judge_backend: str = "judge"
    render_settings: RenderSettings = field(default_factory=RenderSettings)

    def __post_init__(self) -> None:
        if self.w_code < 0 or self.w_video < 0:
            raise ValueError("weights must be non-negative")
        if abs(self.w_code + self.w_video - 1.0) > _WEIGHT_TOLERANCE:
            raise ValueError(
                f"weights must sum to 1, got {self.w_code} + {self.w_video}"
            )
        if self.group_size < 2:
            raise ValueError("group_size must be >= 2")


def jcv_reward(
    s_code: float,
    s_video: float,
    render_ok: bool,
    config: RewardConfig,
) -> float:
    """Blend the two scores, or pay the failure penalty outright.

    Because the weights sum to 1, returning the penalty directly equals the
    weighted blend of a penalty-valued score pair.
    """
    if not render_ok:
        return config.failure_penalty
    if not (0.0 <= s_code <= 1.0 and 0.0 <= s_video <= 1.0):
        raise ValueError(f"scores must lie in [0,1], got ({s_code}, {s_video})")
    return config.w_code * s_code + config.w_video * s_video


def group_advantages(rewards: Sequence[float]) -> list[float]:
    """Center by the group mean, scale by population std plus epsilon.

    An all-equal group short-circuits to exact zeros instead of dividing
    rounding dust by the epsilon.
    """
    if len(rewards) < 2:
        raise ValueError("advantage normalization needs a group of >= 2 rewards")
    if min(rewards) == max(rewards):
        return [0.0] * len(rewards)
    mean = statistics.fmean(rewards)
    spread = statistics.pstdev(rewards)
    return [(r - mean) / (spread + ADVANTAGE_EPSILON) for r in rewards]


@dataclass(frozen=True, slots=True)
class RolloutDetail:
    """Audit record for one rollout inside a reward group."""

    status: RenderStatus
    error_class: Optional[ErrorClass]
    s_code: Optional[Score]
    s_video: Optional[Score]
    reward: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "status": self.status.value,
            "error_class": self.error_class.value if self.error_class else None,
            "s_code": self.s_code.to_dict() if self.s_code else None,
            "s_video": self.s_video.to_dict() if self.s_video else None,
            "reward": self.reward,
        }


@dataclass(frozen=True, slots=True)
class RewardGroup:
    """One query's scored rollout group, ready for a trainer."""

    query_id: str
    rollouts: tuple[str, ...]
    details: tuple[RolloutDetail, ...]
    rewards: tuple[float, ...]
    advantages: tuple[float, ...]

    def __post_init__(self) -> None:
        sizes = {len(self.rollouts), len(self.details), len(self.rewards), len(self.advantages)}
        if len(sizes) != 1:
            raise ValueError("rollouts, details, rewards, advantages must align")

    def to_dict(self) -> dict[str, Any]:
        return {
            "query_id": self.query_id,
            "rewards": list(self.rewards),
            "advantages": list(self.advantages),
            "details": [d.to_dict() for d in self.details],
        }


def _score_rollout(
    raw_output: str,
    sample: ChartSample,
    config: RewardConfig,
    gateway: Gateway,
    renderer: RenderProvider,
    *,
    job_name: str,
    judge_workdir: Path | None,
) -> RolloutDetail:
    code = extract_code(raw_output)
    if code is None:
        outcome = RenderOutcome(
            status=RenderStatus.LOAD_ERROR,
            console_errors=("rollout contained no usable chart document",),
            error_class=ErrorClass.OTHER,
        )
    else:
        outcome = renderer.render(code, job_name=job_name)
    if outcome.status is not RenderStatus.RENDERED:
        return RolloutDetail(
            status=outcome.status,
            error_class=outcome.error_class,
            s_code=None,
            s_video=None,
            reward=jcv_reward(0.0, 0.0, render_ok=False, config=config),
        )
    assert code is not None and outcome.video_path is not None
    try:
        s_code, _ = score_code(code, sample.qa_code, gateway, config.judge_backend)
        s_video, _ = score_video(
            outcome.video_path,
            sample.qa_video,
            gateway,
            config.judge_backend,
            workdir=judge_workdir,
        )
    except RetryExhaustedError as exc:
        raise RewardBatchError(f"judge unavailable while scoring {job_name}: {exc}") from exc
    reward = jcv_reward(
        float(s_code.fraction), float(s_video.fraction), render_ok=True, config=config
    )
    return RolloutDetail(
        status=outcome.status,
        error_class=None,
        s_code=s_code,
        s_video=s_video,
        reward=reward,
    )


def reward_batch(
    sample: ChartSample,
    rollouts: Sequence[str],
    config: RewardConfig,
    gateway: Gateway,
    renderer: RenderProvider,
    *,
    max_workers: int = 4,
    judge_workdir: Path | None = None,
) -> RewardGroup:
    """Score a full rollout group for one query.

    Judge outages raise :class:`RewardBatchError` so the trainer retries the
    batch; a batch never comes back with silently zeroed rewards.
    """
    if len(rollouts) != config.group_size:
        raise ValueError(
            f"expected {config.group_size} rollouts per group, got {len(rollouts)}"
        )
    workers = max(1, min(max_workers, len(rollouts)))
    jobs = [
        (raw, f"{sample.id}-r{i:02d}")
        for i, raw in enumerate(rollouts)
    ]
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="reward") as pool:
        details = list(
            pool.map(
                lambda job: _score_rollout(
                    job[0],
                    sample,
                    config,
                    gateway,
                    renderer,
                    job_name=job[1],
                    judge_workdir=judge_workdir,
                ),
                jobs,
            )
        )
    rewards = tuple(detail.reward for detail in details)
    return RewardGroup(
        query_id=sample.id,
        rollouts=tuple(rollouts),
        details=tuple(details),
        rewards=rewards,
        advantages=tuple(group_advantages(rewards)),
    )
