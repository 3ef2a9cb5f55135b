"""Reward computation: the weighted score blend and group normalization."""

from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dcgkit.gateway import Gateway, MockBackend
from dcgkit.model import RenderStatus
from dcgkit.reward.engine import (
    ADVANTAGE_EPSILON,
    RewardBatchError,
    RewardConfig,
    RewardGroup,
    group_advantages,
    jcv_reward,
    reward_batch,
)

from tests.conftest import FIXTURES, make_bench_gateway


class TestJcvReward:
    def test_blends_with_configured_weights(self):
        config = RewardConfig(w_code=0.8, w_video=0.2)
        assert jcv_reward(1.0, 0.0, True, config) == pytest.approx(0.8, abs=1e-15)
        assert jcv_reward(0.0, 1.0, True, config) == pytest.approx(0.2, abs=1e-15)

    def test_exact_against_rational_oracle(self):
        config = RewardConfig(w_code=0.5, w_video=0.5)
        for i in range(11):
            for j in range(11):
                s_code, s_video = i / 10, j / 10
                oracle = Fraction(1, 2) * Fraction(i, 10) + Fraction(1, 2) * Fraction(j, 10)
                assert abs(jcv_reward(s_code, s_video, True, config) - float(oracle)) < 1e-12

    def test_render_failure_returns_the_penalty_exactly(self):
        for w_code in (1.0, 0.8, 0.5, 0.2, 0.0):
            config = RewardConfig(w_code=w_code, w_video=1.0 - w_code)
            assert jcv_reward(1.0, 1.0, False, config) == -0.25

    def test_custom_penalty(self):
        config = RewardConfig(failure_penalty=-1.0)
        assert jcv_reward(0.5, 0.5, False, config) == -1.0

    def test_scores_outside_unit_interval_rejected(self):
        config = RewardConfig()
        with pytest.raises(ValueError):
            jcv_reward(1.5, 0.0, True, config)
        with pytest.raises(ValueError):
            jcv_reward(0.0, -0.1, True, config)

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            RewardConfig(w_code=0.8, w_video=0.3)
        with pytest.raises(ValueError):
            RewardConfig(w_code=-0.1, w_video=1.1)

    def test_group_size_must_allow_normalization(self):
        with pytest.raises(ValueError):
            RewardConfig(group_size=1)


class TestGroupAdvantages:
    def test_all_equal_group_is_exactly_zero(self):
        assert group_advantages([0.7] * 8) == [0.0] * 8

    def test_mean_is_removed(self):
        advantages = group_advantages([0.1, 0.5, 0.9, 0.3])
        assert abs(sum(advantages)) < 1e-12

    def test_ranking_is_preserved(self):
        rewards = [0.3, -0.25, 0.9, 0.55]
        advantages = group_advantages(rewards)
        assert sorted(range(4), key=rewards.__getitem__) == sorted(
            range(4), key=advantages.__getitem__
        )

    def test_epsilon_keeps_tiny_spreads_finite(self):
        advantages = group_advantages([0.5, 0.5 + 1e-12])
        assert all(math.isfinite(a) for a in advantages)

    def test_groups_of_one_are_rejected(self):
        with pytest.raises(ValueError):
            group_advantages([1.0])

    @given(
        st.lists(
            st.floats(min_value=-1.0, max_value=1.0, allow_nan=False),
            min_size=2,
            max_size=16,
        )
    )
    def test_mean_zero_and_bounded_scale(self, rewards):
        advantages = group_advantages(rewards)
        assert len(advantages) == len(rewards)
        assert abs(sum(advantages) / len(advantages)) < 1e-9
        spread = max(rewards) - min(rewards)
        if spread > 1e-6:
            import statistics

            sigma = statistics.pstdev(rewards)
            for reward, advantage in zip(rewards, advantages):
                expected = (reward - statistics.fmean(rewards)) / (sigma + ADVANTAGE_EPSILON)
                assert advantage == pytest.approx(expected, abs=1e-12)

    @given(
        st.lists(
            st.floats(min_value=-1.0, max_value=1.0, allow_nan=False),
            min_size=2,
            max_size=8,
        ),
        st.floats(min_value=0.5, max_value=2.0),
        st.floats(min_value=-1.0, max_value=1.0),
    )
    def test_affine_invariance(self, rewards, a, b):
        import statistics

        if statistics.pstdev(rewards) < 1e-2:
            return
        base = group_advantages(rewards)
        shifted = group_advantages([a * r + b for r in rewards])
        for x, y in zip(base, shifted):
            assert y == pytest.approx(x, abs=1e-6)


def reward_config() -> RewardConfig:
    return RewardConfig(group_size=4)


def batch_rollouts(samples) -> list[str]:
    sample = samples[0]
    good = f"Here you go.\n```html\n{sample.html_code}\n```"
    return [
        good,
        "No chart from me.",
        "```html\n<!DOCTYPE html>\n<html><body><canvas id=\"c\" width=\"800\" "
        "height=\"600\"></canvas>\n<script>const ready = true;</script>\n"
        "</body></html>\n```",
        good,
    ]


class TestRewardBatch:
    def test_rewards_and_advantages_line_up(self, replay_renderer, bench_samples, tmp_path):
        gateway = make_bench_gateway(tmp_path / "cache")
        group = reward_batch(
            bench_samples[0],
            batch_rollouts(bench_samples[0:1]),
            reward_config(),
            gateway,
            replay_renderer,
        )
        assert group.query_id == bench_samples[0].id
        # Rollouts: rendered, no-code, blank, rendered.
        statuses = [d.status for d in group.details]
        assert statuses == [
            RenderStatus.RENDERED.value,
            RenderStatus.LOAD_ERROR.value,
            RenderStatus.BLANK.value,
            RenderStatus.RENDERED.value,
        ]
        assert group.rewards[1] == -0.25
        assert group.rewards[2] == -0.25
        assert group.rewards[0] == group.rewards[3]
        assert list(group.advantages) == group_advantages(group.rewards)
        payload = group.to_dict()
        assert payload["query_id"] == group.query_id
        assert len(payload["details"]) == 4

    def test_wrong_rollout_count_is_rejected(self, replay_renderer, bench_samples, tmp_path):
        gateway = make_bench_gateway(tmp_path / "cache")
        with pytest.raises(ValueError, match="rollouts"):
            reward_batch(
                bench_samples[0], ["only one"], reward_config(), gateway, replay_renderer
            )

    def test_judge_outage_aborts_the_batch(self, replay_renderer, bench_samples, tmp_path):
        model_free_judge = MockBackend(
            "judge",
            {"default": "yes.", "fail_times": 10_000},
            capabilities=frozenset(["text", "video"]),
        )
        gateway = Gateway([model_free_judge], retries=0, sleep=lambda _: None)
        with pytest.raises(RewardBatchError):
            reward_batch(
                bench_samples[0],
                batch_rollouts(bench_samples[0:1]),
                reward_config(),
                gateway,
                replay_renderer,
            )

    def test_failed_rollouts_never_reach_the_judge(self, replay_renderer, bench_samples, tmp_path):
        judge = MockBackend(
            "judge", {"default": "yes."}, capabilities=frozenset(["text", "video"])
        )
        gateway = Gateway([judge], sleep=lambda _: None)
        config = RewardConfig(group_size=2)
        group = reward_batch(
            bench_samples[0],
            ["nothing usable here", "still nothing"],
            config,
            gateway,
            replay_renderer,
        )
        assert judge.call_count == 0
        assert list(group.rewards) == [-0.25, -0.25]
        assert list(group.advantages) == [0.0, 0.0]
