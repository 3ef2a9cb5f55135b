"""Shared fixtures: one mock browser per session, canned corpora, gateways."""

from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from dcgkit.dataset import load_dataset
from dcgkit.gateway import Gateway, MockBackend
from dcgkit.model import RenderSettings
from dcgkit.renderer.pipeline import BrowserRenderer, ReplayRenderer
from dcgkit.testing import MockBrowser

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile(
    "dcgkit", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("dcgkit")


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def mock_browser():
    with MockBrowser() as browser:
        yield browser


@pytest.fixture(scope="session")
def renderer(mock_browser, tmp_path_factory):
    # Generous job budget: only the dedicated timeout tests want a tight one.
    with BrowserRenderer(
        mock_browser.endpoint,
        tmp_path_factory.mktemp("render"),
        RenderSettings(per_job_timeout=30.0),
    ) as r:
        yield r


@pytest.fixture(scope="session")
def bench_samples():
    return load_dataset(FIXTURES / "dataset" / "test.jsonl")


@pytest.fixture()
def replay_renderer():
    return ReplayRenderer(FIXTURES / "dataset" / "replay" / "manifest.json")


def make_bench_gateway(cache_dir: Path) -> Gateway:
    """Fresh scripted model+judge pair; sequential state starts from zero."""
    model = MockBackend(
        "model",
        FIXTURES / "mocks" / "model_benchmark.json",
        capabilities=frozenset(["text", "image", "video"]),
    )
    judge = MockBackend(
        "judge",
        FIXTURES / "mocks" / "judge_benchmark.json",
        capabilities=frozenset(["text", "video"]),
    )
    return Gateway([model, judge], cache_dir=cache_dir)


@pytest.fixture()
def bench_gateway(tmp_path):
    return make_bench_gateway(tmp_path / "cache")


def read_chart(name: str) -> str:
    return (FIXTURES / "charts" / f"{name}.html").read_text(encoding="utf-8")
