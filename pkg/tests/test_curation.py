"""Curation: modification pool, split assignment, stage pipeline."""

from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dcgkit.curation.generate import CurationError, parse_json_reply
from dcgkit.curation.pipeline import (
    StagePaths,
    run_stage1,
    run_stage2,
    run_stage3,
    run_stage4,
)
from dcgkit.curation.pool import (
    PoolError,
    default_pool_path,
    flatten_pool,
    load_modification_pool,
    sample_modifications,
)
from dcgkit.curation.splits import (
    DEFAULT_SPLIT_RATIOS,
    assign_splits,
    largest_remainder,
)
from dcgkit.gateway import Gateway, MockBackend
from dcgkit.model import ModificationCategory, RenderSettings, Split

from tests.conftest import FIXTURES
from tests.test_model import make_sample


class TestPool:
    def test_packaged_pool_covers_every_category(self):
        pool = load_modification_pool()
        assert set(pool) == set(ModificationCategory)
        assert all(len(entries) >= 10 for entries in pool.values())

    def test_pool_file_must_cover_categories(self, tmp_path):
        path = tmp_path / "pool.json"
        path.write_text(json.dumps({"layout": ["x"]}), encoding="utf-8")
        with pytest.raises(PoolError, match="needs at least one entry"):
            load_modification_pool(path)

    def test_flatten_orders_by_category(self):
        flat = flatten_pool(load_modification_pool())
        categories = [spec.category for spec in flat]
        assert categories == sorted(categories, key=list(ModificationCategory).index)

    def test_sampling_is_deterministic_and_bounded(self):
        pool = load_modification_pool()
        first = sample_modifications(7, pool)
        second = sample_modifications(7, pool)
        assert first == second
        assert 1 <= len(first) <= 10
        assert len({spec.instruction for spec in first}) == len(first)

    def test_requested_k_is_honored(self):
        pool = load_modification_pool()
        assert len(sample_modifications(0, pool, k=4)) == 4
        with pytest.raises(ValueError):
            sample_modifications(0, pool, k=0)
        with pytest.raises(ValueError):
            sample_modifications(0, pool, k=10_000)

    def test_default_pool_path_exists(self):
        assert default_pool_path().is_file()


class TestParseJsonReply:
    def test_prefers_fenced_blocks(self):
        assert parse_json_reply('```json\n{"a": 1}\n```') == {"a": 1}

    def test_scans_for_inline_values(self):
        assert parse_json_reply('the data is [1, 2, 3], enjoy') == [1, 2, 3]

    def test_skips_broken_fences_for_later_valid_json(self):
        reply = "```json\n{broken\n```\nbut also {\"ok\": true}"
        assert parse_json_reply(reply) == {"ok": True}

    def test_no_json_raises(self):
        with pytest.raises(ValueError):
            parse_json_reply("no structured data here")


class TestLargestRemainder:
    def test_documented_default_allocation(self):
        ratios = [DEFAULT_SPLIT_RATIOS[s] for s in Split]
        assert largest_remainder(80, ratios) == [40, 10, 23, 7]

    def test_zero_total(self):
        assert largest_remainder(0, [0.5, 0.5]) == [0, 0]

    @given(
        total=st.integers(min_value=0, max_value=500),
        weights=st.lists(
            st.floats(min_value=0.01, max_value=10.0), min_size=1, max_size=6
        ),
    )
    def test_sums_and_stays_near_quota(self, total, weights):
        counts = largest_remainder(total, weights)
        assert sum(counts) == total
        scale = sum(weights)
        for count, weight in zip(counts, weights):
            quota = total * weight / scale
            assert quota - 1 - 1e-9 < count < quota + 1 + 1e-9


class TestAssignSplits:
    def corpus(self, n=16):
        types = ["bar", "line", "pie", "scatter"]
        return [
            make_sample(id=f"s-{i:03d}", chart_type=types[i % 4]) for i in range(n)
        ]

    def test_totals_follow_ratios(self):
        assigned = assign_splits(self.corpus(), rng_seed=5)
        counts = {split: 0 for split in Split}
        for sample in assigned:
            counts[sample.split] += 1
        assert [counts[s] for s in Split] == largest_remainder(
            16, [DEFAULT_SPLIT_RATIOS[s] for s in Split]
        )

    def test_deterministic_and_order_preserving(self):
        once = assign_splits(self.corpus(), rng_seed=5)
        twice = assign_splits(self.corpus(), rng_seed=5)
        assert once == twice
        assert [s.id for s in once] == [s.id for s in self.corpus()]

    def test_seed_changes_assignment(self):
        a = assign_splits(self.corpus(), rng_seed=1)
        b = assign_splits(self.corpus(), rng_seed=2)
        assert any(x.split is not y.split for x, y in zip(a, b))

    def test_stratifies_by_chart_type(self):
        # 8 of each type, 50% train_sft: every type lands exactly 4 there.
        samples = [
            make_sample(id=f"t-{i:03d}", chart_type="bar" if i < 8 else "line")
            for i in range(16)
        ]
        assigned = assign_splits(samples, rng_seed=3)
        per_type = {"bar": 0, "line": 0}
        for sample in assigned:
            if sample.split is Split.TRAIN_SFT:
                per_type[sample.chart_type] += 1
        assert per_type == {"bar": 4, "line": 4}

    def test_custom_ratios(self):
        ratios = {Split.TRAIN_SFT: 1.0, Split.TRAIN_RL: 0.0, Split.VALIDATION: 0.0, Split.TEST: 0.0}
        assigned = assign_splits(self.corpus(), ratios=ratios)
        assert all(s.split is Split.TRAIN_SFT for s in assigned)


class StubRenderer:
    """Deterministic renders without a browser: fails documents on demand."""

    def __init__(self, out_dir: Path, fail_marker: str = "FAIL-RENDER"):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.fail_marker = fail_marker
        self.calls = 0

    def render(self, html: str, *, job_name: str | None = None):
        from dcgkit.model import ErrorClass, RenderOutcome, RenderStatus

        self.calls += 1
        if self.fail_marker in html:
            return RenderOutcome(
                status=RenderStatus.SCRIPT_ERROR,
                console_errors=("Uncaught SyntaxError: scripted failure",),
                error_class=ErrorClass.SYNTAX_ERROR,
            )
        video = self.out_dir / f"clip-{self.calls:03d}.webm"
        video.write_bytes(b"\x1aE\xdf\xa3 stub video")
        return RenderOutcome(
            status=RenderStatus.RENDERED,
            video_path=str(video),
            frame_hashes=("h",) * 48,
        )


def generator_gateway(tmp_path: Path) -> Gateway:
    backend = MockBackend(
        "generator",
        FIXTURES / "mocks" / "generator_curation.json",
        capabilities=frozenset(["text", "video"]),
    )
    return Gateway([backend], cache_dir=tmp_path / "cache")


class TestPipeline:
    def seeds(self, tmp_path: Path) -> Path:
        seions = tmp_path / "seeds"
        import shutil

        shutil.copytree(FIXTURES / "seeds", seions)
        return seions

    def run_all(self, tmp_path: Path, root_name: str = "out") -> StagePaths:
        paths = StagePaths(tmp_path / root_name)
        paths.root.mkdir(parents=True, exist_ok=True)
        renderer = StubRenderer(tmp_path / f"{root_name}-renders")
        gateway = generator_gateway(tmp_path / root_name)
        run_stage1(self.seeds(tmp_path / root_name), renderer, paths)
        run_stage2(paths, gateway, "generator", rng_seed=13, candidates_per_seed=2)
        run_stage3(paths, renderer, gateway, "generator")
        run_stage4(paths, gateway, "generator", rng_seed=13)
        return paths

    def test_full_run_produces_a_loadable_dataset(self, tmp_path):
        paths = self.run_all(tmp_path)
        from dcgkit.dataset import load_dataset

        total = 0
        for split_file in sorted(paths.dataset_dir.glob("*.jsonl")):
            for sample in load_dataset(split_file):
                sample.validate()
                total += 1
                assert (paths.dataset_dir / sample.video_path).is_file()
        assert total == 6

    def test_rerun_of_a_stage_is_byte_identical(self, tmp_path):
        paths = self.run_all(tmp_path)
        before = paths.stage2.read_bytes()
        gateway = generator_gateway(tmp_path / "out")
        run_stage2(paths, gateway, "generator", rng_seed=13, candidates_per_seed=2)
        assert paths.stage2.read_bytes() == before

    def test_unrenderable_candidates_are_rejected_with_reasons(self, tmp_path):
        root = tmp_path / "rej"
        root.mkdir()
        seeds = tmp_path / "seeds-rej"
        seeds.mkdir()
        good = (FIXTURES / "seeds" / "bars.html").read_text(encoding="utf-8")
        (seeds / "bars.html").write_text(good, encoding="utf-8")
        (seeds / "dead.html").write_text(good + "<!-- FAIL-RENDER -->", encoding="utf-8")
        (seeds / "manifest.json").write_text(
            json.dumps({"bars.html": "bar", "dead.html": "bar"}), encoding="utf-8"
        )
        paths = StagePaths(root)
        renderer = StubRenderer(tmp_path / "rej-renders")
        kept, rejected = run_stage1(seeds, renderer, paths)
        assert (kept, rejected) == (1, 1)
        lines = [
            json.loads(line)
            for line in paths.rejections.read_text(encoding="utf-8").splitlines()
        ]
        assert any(r["id"] == "dead" and r["stage"] == "ingest" for r in lines)

    def test_stage2_rejects_unusable_rewrites(self, tmp_path):
        root = tmp_path / "bad-gen"
        root.mkdir()
        paths = StagePaths(root)
        renderer = StubRenderer(tmp_path / "bad-gen-renders")
        run_stage1(self.seeds(tmp_path / "bad-gen"), renderer, paths)
        prose = MockBackend("generator", {"default": "I refuse to write code."})
        gateway = Gateway([prose], sleep=lambda _: None)
        kept, rejected = run_stage2(paths, gateway, "generator", rng_seed=13)
        assert kept == 0
        assert rejected == 6
        lines = [
            json.loads(line)
            for line in paths.rejections.read_text(encoding="utf-8").splitlines()
        ]
        assert all(r["stage"] != "ingest" or r["outcome"] for r in lines)
        assert sum(1 for r in lines if r["stage"] == "modify") == 6
