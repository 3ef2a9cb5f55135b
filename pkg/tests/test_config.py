"""Configuration loading, precedence, and key registry."""

from __future__ import annotations

import pytest
import yaml

from dcgkit.config import REGISTRY, ConfigError, load_config, registry_help
from dcgkit.model import Split


def nest(flat: dict) -> dict:
    """Expand dotted keys into the nested mapping the YAML file uses."""
    tree: dict = {}
    for name, value in flat.items():
        node = tree
        *parents, leaf = name.split(".")
        for part in parents:
            node = node.setdefault(part, {})
        node[leaf] = value
    return tree


def sample_value(key) -> object:
    """A value distinguishable from the key's default."""
    if key.kind == "bool":
        return not bool(key.default)
    if key.kind == "int":
        return (key.default or 0) + 7
    if key.kind == "float":
        return (key.default or 0.0) + 0.5
    if key.kind == "str":
        return "changed-value"
    if key.kind == "path":
        return "changed/path"
    if key.kind == "map":
        return {"train_sft": 1.0, "train_rl": 0.0, "validation": 0.0, "test": 0.0}
    return [{"id": "b", "kind": "mock", "script": "s.json"}]


class TestPrecedence:
    def test_defaults_without_file(self, tmp_path):
        config = load_config(workdir=tmp_path)
        for key in REGISTRY:
            assert config.get(key.name) == key.default

    @pytest.mark.parametrize("key", REGISTRY, ids=lambda k: k.name)
    def test_file_overrides_default(self, key, tmp_path):
        value = sample_value(key)
        path = tmp_path / "config.yaml"
        path.write_text(yaml.safe_dump(nest({key.name: value})), encoding="utf-8")
        config = load_config(path, workdir=tmp_path)
        assert config.get(key.name) == value

    @pytest.mark.parametrize("key", REGISTRY, ids=lambda k: k.name)
    def test_flag_overrides_file(self, key, tmp_path):
        file_value = sample_value(key)
        path = tmp_path / "config.yaml"
        path.write_text(yaml.safe_dump(nest({key.name: file_value})), encoding="utf-8")
        if key.kind == "bool":
            flag_value = key.default
        elif key.kind == "int":
            flag_value = (key.default or 0) + 99
        elif key.kind == "float":
            flag_value = (key.default or 0.0) + 9.5
        elif key.kind in ("str", "path"):
            flag_value = "flag-wins"
        elif key.kind == "map":
            flag_value = {"train_sft": 0.0, "train_rl": 1.0, "validation": 0.0, "test": 0.0}
        else:
            flag_value = []
        config = load_config(path, overrides={key.name: flag_value}, workdir=tmp_path)
        assert config.get(key.name) == flag_value

    def test_none_override_does_not_mask_file_value(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("renderer:\n  fps: 60\n", encoding="utf-8")
        config = load_config(path, overrides={"renderer.fps": None}, workdir=tmp_path)
        assert config.get("renderer.fps") == 60


class TestValidation:
    def test_unknown_key_suggests_close_match(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("renderer:\n  fsp: 24\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="renderer.fps"):
            load_config(path, workdir=tmp_path)

    def test_unknown_override_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown config key"):
            load_config(overrides={"renderer.fsp": 24}, workdir=tmp_path)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="does not exist"):
            load_config(tmp_path / "absent.yaml", workdir=tmp_path)

    def test_invalid_yaml_rejected(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("renderer: [unclosed", encoding="utf-8")
        with pytest.raises(ConfigError, match="invalid YAML"):
            load_config(path, workdir=tmp_path)

    def test_non_mapping_top_level_rejected(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("- just\n- a list\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="mapping"):
            load_config(path, workdir=tmp_path)

    def test_type_mismatch_rejected(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("renderer:\n  fps: not-a-number\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="renderer.fps"):
            load_config(path, workdir=tmp_path)

    def test_bool_key_rejects_int(self, tmp_path):
        with pytest.raises(ConfigError, match="boolean"):
            load_config(overrides={"renderer.keep_frames": 1}, workdir=tmp_path)

    def test_get_unknown_key_rejected(self, tmp_path):
        config = load_config(workdir=tmp_path)
        with pytest.raises(ConfigError, match="unknown"):
            config.get("renderer.nope")


class TestDerivedViews:
    def test_paths_resolve_against_workdir(self, tmp_path):
        config = load_config(workdir=tmp_path)
        resolved = config.path("gateway.cache_dir")
        assert resolved == tmp_path.resolve() / ".cache/gateway"

    def test_absolute_paths_kept(self, tmp_path):
        config = load_config(
            overrides={"study.log": "/var/log/study.jsonl"}, workdir=tmp_path
        )
        assert str(config.path("study.log")) == "/var/log/study.jsonl"

    def test_none_path_stays_none(self, tmp_path):
        config = load_config(workdir=tmp_path)
        assert config.path("curation.pool") is None

    def test_render_settings_mapping(self, tmp_path):
        config = load_config(
            overrides={
                "renderer.fps": 30,
                "renderer.duration": 1.0,
                "renderer.width": 640,
                "renderer.height": 480,
                "renderer.settle_delay_ms": 50.0,
                "renderer.timeout": 12.0,
            },
            workdir=tmp_path,
        )
        settings = config.render_settings()
        assert settings.fps == 30
        assert settings.duration == 1.0
        assert settings.viewport == (640, 480)
        assert settings.settle_delay == 50.0
        assert settings.per_job_timeout == 12.0
        assert settings.frame_count == 30

    def test_split_ratios_parse_to_enum_keys(self, tmp_path):
        config = load_config(
            overrides={
                "curation.ratios": {
                    "train_sft": 0.5,
                    "train_rl": 0.25,
                    "validation": 0.25,
                    "test": 0.0,
                }
            },
            workdir=tmp_path,
        )
        ratios = config.split_ratios()
        assert ratios is not None
        assert ratios[Split.TRAIN_SFT] == 0.5
        assert set(ratios) == set(Split)

    def test_split_ratios_unknown_split_rejected(self, tmp_path):
        config = load_config(
            overrides={"curation.ratios": {"train": 1.0}}, workdir=tmp_path
        )
        with pytest.raises(ConfigError, match="curation.ratios"):
            config.split_ratios()

    def test_split_ratios_default_is_none(self, tmp_path):
        assert load_config(workdir=tmp_path).split_ratios() is None

    def test_to_dict_covers_registry(self, tmp_path):
        snapshot = load_config(workdir=tmp_path).to_dict()
        assert set(snapshot) == {key.name for key in REGISTRY}


class TestRegistryHelp:
    def test_every_key_documented(self):
        text = registry_help()
        for key in REGISTRY:
            assert key.name in text
            assert key.help in text

    def test_null_default_rendered(self):
        assert "gateway.call_budget (default null)" in registry_help()
