"""Configuration: one YAML file, documented keys, strict precedence.

Values resolve as flag > config file > built-in default.  The registry
below is the single source of truth for key names, defaults, and types;
loading rejects unknown keys with a close-match suggestion.  Credentials
never appear here: backends name an environment variable instead.

File layout mirrors the dotted key names::

    renderer:
      fps: 24
    gateway:
      backends:
        - id: judge
          kind: mock
          script: mocks/judge.json
"""

from __future__ import annotations

import difflib
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional

import yaml

from dcgkit.model import RenderSettings, Split


class ConfigError(ValueError):
    """Bad config file or malformed key/value."""


@dataclass(frozen=True, slots=True)
class ConfigKey:
    name: str
    default: Any
    kind: str  # bool | int | float | str | path | map | list
    help: str


REGISTRY: tuple[ConfigKey, ...] = (
    ConfigKey("renderer.endpoint", "mock", "str",
              "Browser endpoint URL, or 'mock' to launch the bundled emulator."),
    ConfigKey("renderer.fps", 24, "int", "Frames per second sampled from virtual time."),
    ConfigKey("renderer.duration", 2.0, "float", "Captured animation length in seconds."),
    ConfigKey("renderer.width", 800, "int", "Viewport width in pixels."),
    ConfigKey("renderer.height", 600, "int", "Viewport height in pixels."),
    ConfigKey("renderer.settle_delay_ms", 100.0, "float",
              "Virtual milliseconds granted before the first frame."),
    ConfigKey("renderer.timeout", 30.0, "float", "Wall-clock budget per render job, seconds."),
    ConfigKey("renderer.max_workers", 4, "int", "Concurrent render jobs."),
    ConfigKey("renderer.keep_frames", True, "bool", "Keep per-frame PNGs next to the video."),
    ConfigKey("renderer.encoder", "auto", "str",
              "Video encoder: 'auto', 'ffmpeg', or 'cv2'."),
    ConfigKey("renderer.vendor_dir", None, "path",
              "Directory of vendored chart libraries substituted for external script tags."),
    ConfigKey("renderer.blank_threshold", 2.0, "float",
              "Per-channel std below which a frame counts as uniform."),
    ConfigKey("gateway.cache_dir", ".cache/gateway", "path",
              "Response cache for temperature-0 calls; relative to the workdir."),
    ConfigKey("gateway.max_in_flight", 4, "int", "Concurrent upstream calls per backend."),
    ConfigKey("gateway.retries", 3, "int", "Retries after a transient backend failure."),
    ConfigKey("gateway.backoff", 0.25, "float", "Base seconds for exponential retry backoff."),
    ConfigKey("gateway.call_budget", None, "int", "Max upstream calls per run; null = unlimited."),
    ConfigKey("gateway.backends", [], "list",
              "Backend specs: {id, kind: http|mock, ...}. API keys come from env vars."),
    ConfigKey("evaluator.temperature", 0.0, "float", "Sampling temperature for the evaluated model."),
    ConfigKey("evaluator.max_output", 8192, "int", "Max output tokens requested from the model."),
    ConfigKey("evaluator.max_workers", 4, "int", "Concurrent samples under evaluation."),
    ConfigKey("evaluator.query_to_judge", False, "bool",
              "Show the judge the original task query alongside the artifact."),
    ConfigKey("reward.w_code", 0.8, "float", "Weight of the code score in the reward."),
    ConfigKey("reward.w_video", 0.2, "float", "Weight of the video score in the reward."),
    ConfigKey("reward.failure_penalty", -0.25, "float", "Reward for a rollout that fails to render."),
    ConfigKey("reward.group_size", 8, "int", "Rollouts per reward group."),
    ConfigKey("reward.judge_backend", "judge", "str", "Backend id used to score rollouts."),
    ConfigKey("reward.max_in_flight", 4, "int", "Reward batches admitted concurrently."),
    ConfigKey("reward.workers_per_batch", 4, "int", "Concurrent rollout renders inside one batch."),
    ConfigKey("reward.host", "127.0.0.1", "str", "Reward service bind host."),
    ConfigKey("reward.port", 8700, "int", "Reward service port."),
    ConfigKey("curation.rng_seed", 0, "int", "Seed for modification draws and split shuffling."),
    ConfigKey("curation.candidates_per_seed", 2, "int", "Modified candidates generated per seed."),
    ConfigKey("curation.pool", None, "path",
              "Modification pool JSON; null uses the packaged pool."),
    ConfigKey("curation.generator_backend", "generator", "str",
              "Backend id that rewrites, describes, and writes QA."),
    ConfigKey("curation.ratios", None, "map",
              "Split ratios {train_sft, train_rl, validation, test}; null = packaged defaults."),
    ConfigKey("study.host", "127.0.0.1", "str", "Study service bind host."),
    ConfigKey("study.port", 8600, "int", "Study service port."),
    ConfigKey("study.log", "study/events.jsonl", "path",
              "Append-only judgment log; relative to the workdir."),
    ConfigKey("study.media", None, "path", "Directory of study videos served at /study/media."),
    ConfigKey("study.ui", None, "path", "Built annotation UI bundle mounted at /ui."),
)

_BY_NAME: dict[str, ConfigKey] = {key.name: key for key in REGISTRY}


def _flatten(prefix: str, node: Any, out: dict[str, Any]) -> None:
    leaf_kinds = {"map", "list"}
    if isinstance(node, Mapping) and not (
        prefix in _BY_NAME and _BY_NAME[prefix].kind in leaf_kinds
    ):
        for key, value in node.items():
            _flatten(f"{prefix}.{key}" if prefix else str(key), value, out)
        return
    out[prefix] = node


def _coerce(key: ConfigKey, value: Any) -> Any:
    if value is None:
        return None
    try:
        if key.kind == "bool":
            if isinstance(value, bool):
                return value
            if isinstance(value, str) and value.lower() in ("true", "false"):
                return value.lower() == "true"
            raise ValueError("expected a boolean")
        if key.kind == "int":
            if isinstance(value, bool):
                raise ValueError("expected an integer")
            return int(value)
        if key.kind == "float":
            if isinstance(value, bool):
                raise ValueError("expected a number")
            return float(value)
        if key.kind in ("str", "path"):
            if isinstance(value, (str, Path)):
                return str(value)
            raise ValueError("expected a string")
        if key.kind == "map":
            if isinstance(value, Mapping):
                return dict(value)
            raise ValueError("expected a mapping")
        if key.kind == "list":
            if isinstance(value, (list, tuple)):
                return list(value)
            raise ValueError("expected a list")
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key.name}: {exc} (got {value!r})") from None
    raise ConfigError(f"{key.name}: unknown kind {key.kind!r}")  # pragma: no cover


class Config:
    """Resolved configuration with dotted-key access."""

    def __init__(self, values: dict[str, Any], workdir: Path):
        self._values = values
        self.workdir = workdir

    def get(self, name: str) -> Any:
        if name not in _BY_NAME:
            raise ConfigError(f"unknown config key {name!r}")
        return self._values[name]

    def path(self, name: str) -> Optional[Path]:
        """Path value resolved against the workdir; None stays None."""
        value = self.get(name)
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else self.workdir / p

    def render_settings(self) -> RenderSettings:
        return RenderSettings(
            fps=self.get("renderer.fps"),
            duration=self.get("renderer.duration"),
            viewport=(self.get("renderer.width"), self.get("renderer.height")),
            settle_delay=self.get("renderer.settle_delay_ms"),
            per_job_timeout=self.get("renderer.timeout"),
        )

    def split_ratios(self) -> Optional[dict[Split, float]]:
        raw = self.get("curation.ratios")
        if raw is None:
            return None
        try:
            ratios = {Split(name): float(value) for name, value in raw.items()}
        except ValueError as exc:
            raise ConfigError(f"curation.ratios: {exc}") from None
        return ratios

    def to_dict(self) -> dict[str, Any]:
        return dict(self._values)


def load_config(
    path: Optional[Path | str] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    *,
    workdir: Optional[Path | str] = None,
) -> Config:
    """Resolve defaults, then the YAML file, then explicit overrides."""
    values: dict[str, Any] = {key.name: key.default for key in REGISTRY}

    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file does not exist: {path}")
        try:
            raw = yaml.safe_load(path.read_text(encoding="utf-8"))
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: invalid YAML: {exc}") from None
        if raw is None:
            raw = {}
        if not isinstance(raw, Mapping):
            raise ConfigError(f"{path}: top level must be a mapping")
        flat: dict[str, Any] = {}
        _flatten("", raw, flat)
        for name, value in flat.items():
            key = _BY_NAME.get(name)
            if key is None:
                hint = difflib.get_close_matches(name, _BY_NAME, n=1)
                suffix = f"; did you mean {hint[0]!r}?" if hint else ""
                raise ConfigError(f"{path}: unknown config key {name!r}{suffix}")
            values[name] = _coerce(key, value)

    for name, value in (overrides or {}).items():
        key = _BY_NAME.get(name)
        if key is None:
            raise ConfigError(f"unknown config key {name!r}")
        if value is not None:
            values[name] = _coerce(key, value)

    base = Path(workdir) if workdir is not None else Path.cwd()
    return Config(values, base.resolve())


def registry_help() -> str:
    """Key registry rendered for docs and `--help-config`."""
    lines = []
    for key in REGISTRY:
        default = "null" if key.default is None else repr(key.default)
        lines.append(f"{key.name} (default {default}): {key.help}")
    return "\n".join(lines)
