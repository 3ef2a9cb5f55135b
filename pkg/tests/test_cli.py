"""Command-line interface wiring."""

from __future__ import annotations

import json
import shutil
from pathlib import Path

import pytest
from click.testing import CliRunner

from dcgkit.cli import main
from dcgkit.config import REGISTRY

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture()
def runner() -> CliRunner:
    return CliRunner()


def run(runner: CliRunner, *args: str, expect: int = 0):
    result = runner.invoke(main, list(args), catch_exceptions=False)
    assert result.exit_code == expect, result.output
    return result


class TestConfigKeys:
    def test_lists_every_key(self, runner):
        result = run(runner, "config-keys")
        for key in REGISTRY:
            assert key.name in result.output

    def test_json_mode(self, runner):
        result = run(runner, "--json", "config-keys")
        payload = json.loads(result.output)
        assert set(payload) == {key.name for key in REGISTRY}
        assert payload["renderer.fps"]["default"] == 24


class TestStats:
    def test_text_summary(self, runner):
        result = run(runner, "stats", "--dataset", str(FIXTURES / "dataset"))
        assert "samples: 12" in result.output
        assert "chart types:" in result.output

    def test_json_summary(self, runner):
        result = run(
            runner, "--json", "stats",
            "--dataset", str(FIXTURES / "dataset" / "test.jsonl"),
        )
        payload = json.loads(result.output)
        assert payload["n_samples"] == 12
        assert sum(payload["chart_type_histogram"].values()) == 12

    def test_missing_dataset_fails_cleanly(self, runner, tmp_path):
        result = run(
            runner, "stats", "--dataset", str(tmp_path / "absent.jsonl"), expect=1
        )
        assert "Error" in result.output


class TestReport:
    GOLDEN = FIXTURES / "goldens" / "benchmark_report.json"

    def test_table(self, runner):
        result = run(runner, "report", "--in", str(self.GOLDEN))
        assert "D2C" in result.output
        assert "Exec. Rate" in result.output

    def test_csv(self, runner):
        result = run(runner, "report", "--in", str(self.GOLDEN), "--format", "csv")
        header = result.output.splitlines()[0]
        assert header.startswith("task,")

    def test_json_round_trip(self, runner):
        result = run(runner, "report", "--in", str(self.GOLDEN), "--format", "json")
        assert json.loads(result.output) == json.loads(self.GOLDEN.read_text())

    def test_invalid_report_fails(self, runner, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"not": "a report"}', encoding="utf-8")
        result = run(runner, "report", "--in", str(bad), expect=1)
        assert "not a valid report" in result.output


class TestOverrides:
    def test_unknown_set_key_fails(self, runner, tmp_path):
        result = run(
            runner, "--workdir", str(tmp_path), "--set", "renderer.fsp=24",
            "doctor",
            expect=1,
        )
        assert "unknown config key" in result.output

    def test_malformed_set_is_usage_error(self, runner, tmp_path):
        result = run(
            runner, "--workdir", str(tmp_path), "--set", "renderer.fps",
            "doctor",
            expect=2,
        )
        assert "key=value" in result.output

    def test_config_file_is_honored(self, runner, tmp_path):
        (tmp_path / "config.yaml").write_text(
            "renderer:\n  fsp: 24\n", encoding="utf-8"
        )
        result = run(
            runner, "--workdir", str(tmp_path), "--config", "config.yaml",
            "doctor",
            expect=1,
        )
        assert "did you mean" in result.output


class TestRender:
    def test_good_chart(self, runner, tmp_path):
        result = run(
            runner, "--workdir", str(tmp_path),
            "render", "--in", str(FIXTURES / "charts" / "good_bars.html"),
            "--out", "out",
        )
        assert "status: rendered" in result.output
        videos = list((tmp_path / "out").rglob("*.webm"))
        assert len(videos) == 1

    def test_blank_chart_exits_nonzero(self, runner, tmp_path):
        result = run(
            runner, "--workdir", str(tmp_path),
            "render", "--in", str(FIXTURES / "charts" / "white_page.html"),
            "--out", "out",
            expect=1,
        )
        assert "status: blank" in result.output

    def test_missing_input_fails(self, runner, tmp_path):
        result = run(
            runner, "--workdir", str(tmp_path),
            "render", "--in", "absent.html",
            expect=1,
        )
        assert "does not exist" in result.output


class TestEvaluate:
    def test_single_sample_run(self, runner, tmp_path):
        line = (FIXTURES / "dataset" / "test.jsonl").read_text().splitlines()[0]
        dataset = tmp_path / "data.jsonl"
        dataset.write_text(line + "\n", encoding="utf-8")
        shutil.copy(FIXTURES / "mocks" / "model_benchmark.json", tmp_path / "model.json")
        shutil.copy(FIXTURES / "mocks" / "judge_benchmark.json", tmp_path / "judge.json")
        result = run(
            runner, "--workdir", str(tmp_path),
            "evaluate",
            "--task", "d2c",
            "--dataset", "data.jsonl",
            "--model", "mock:model.json",
            "--judge", "mock:judge.json",
            "--out", "reports/report.json",
        )
        assert "report:" in result.output
        payload = json.loads((tmp_path / "reports" / "report.json").read_text())
        d2c = next(row for row in payload["tasks"] if row["task"] == "d2c")
        assert d2c["n_samples"] == 1
        assert d2c["n_rendered"] == 1
        assert d2c["s_code"] == [4, 5]
        assert d2c["s_video"] == [4, 5]

    def test_unknown_task_rejected(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["evaluate", "--task", "c2d", "--dataset", "x", "--model", "m", "--judge", "j"],
        )
        assert result.exit_code == 2

    def test_missing_mock_script_fails(self, runner, tmp_path):
        dataset = tmp_path / "data.jsonl"
        line = (FIXTURES / "dataset" / "test.jsonl").read_text().splitlines()[0]
        dataset.write_text(line + "\n", encoding="utf-8")
        result = run(
            runner, "--workdir", str(tmp_path),
            "evaluate", "--task", "d2c",
            "--dataset", "data.jsonl",
            "--model", "mock:absent.json",
            "--judge", "mock:echo",
            expect=1,
        )
        assert "does not exist" in result.output


class TestCurate:
    def test_full_pipeline(self, runner, tmp_path):
        shutil.copytree(FIXTURES / "seeds", tmp_path / "seeds")
        shutil.copy(
            FIXTURES / "mocks" / "generator_curation.json", tmp_path / "generator.json"
        )
        result = run(
            runner, "--workdir", str(tmp_path), "--json",
            "curate",
            "--seeds", "seeds",
            "--stage", "all",
            "--generator", "mock:generator.json",
            "--out", "curation",
        )
        summary = json.loads(result.output)
        assert summary["stage1"] == {"kept": 3, "rejected": 0}
        assert summary["stage2"] == {"kept": 6, "rejected": 0}
        assert summary["stage3"] == {"kept": 6, "rejected": 0}
        assert sum(summary["stage4"].values()) == 6
        dataset_files = list((tmp_path / "curation" / "dataset").glob("*.jsonl"))
        assert dataset_files

    def test_stage1_requires_seeds(self, runner, tmp_path):
        result = run(
            runner, "--workdir", str(tmp_path),
            "curate", "--stage", "1",
            expect=1,
        )
        assert "--seeds" in result.output

    def test_stage2_without_backend_fails(self, runner, tmp_path):
        result = run(
            runner, "--workdir", str(tmp_path),
            "curate", "--stage", "2",
            expect=1,
        )
        assert "--generator" in result.output


class TestDoctor:
    def test_environment_is_healthy(self, runner, tmp_path):
        result = run(runner, "--workdir", str(tmp_path), "doctor")
        assert "browser" in result.output
        assert "FAIL" not in result.output

    def test_json_mode(self, runner, tmp_path):
        result = run(runner, "--workdir", str(tmp_path), "--json", "doctor")
        payload = json.loads(result.output)
        assert payload["clock-shim"]["ok"] is True
        assert payload["encoder"]["ok"] is True


def test_version_flag(runner):
    result = run(runner, "--version")
    assert result.output.startswith("dcgkit, version")
