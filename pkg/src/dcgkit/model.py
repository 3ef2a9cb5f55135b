"""Shared data types for chart samples, render outcomes, and score reports.

Every type here is an immutable value object with a canonical JSON form.
Canonical form means: keys sorted, compact separators, UTF-8, so that
serializing the same value twice yields identical bytes on any host.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Optional


class SchemaError(ValueError):
    """A record violates a structural invariant. ``field`` names the offender."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


class Split(str, Enum):
    TRAIN_SFT = "train_sft"
    TRAIN_RL = "train_rl"
    VALIDATION = "validation"
    TEST = "test"


class Task(str, Enum):
    D2C = "d2c"  # detailed text instruction
    S2C = "s2c"  # simple text instruction
    V2C = "v2c"  # reference-video instruction

    @property
    def display(self) -> str:
        return self.value.upper()


class ModificationCategory(str, Enum):
    DATA_ELEMENTS = "data_elements"
    LAYOUT = "layout"
    VISUAL_STYLE = "visual_style"
    ANIMATION_SPEED = "animation_speed"
    ANIMATION_EFFECTS = "animation_effects"


class RenderStatus(str, Enum):
    RENDERED = "rendered"
    BLANK = "blank"
    SCRIPT_ERROR = "script_error"
    TIMEOUT = "timeout"
    LOAD_ERROR = "load_error"

    @property
    def is_success(self) -> bool:
        return self is RenderStatus.RENDERED


class ErrorClass(str, Enum):
    SYNTAX_ERROR = "syntax_error"
    UNDEFINED_PROPERTY = "undefined_property"
    REFERENCE_ERROR = "reference_error"
    TIMEOUT = "timeout"
    OTHER = "other"


#: Default closed label set for chart types. The registry is configurable:
#: pass your own set to validators / loaders when your corpus uses other labels.
DEFAULT_CHART_TYPES: frozenset[str] = frozenset(
    {
        "bar",
        "line",
        "pie",
        "scatter",
        "area",
        "radar",
        "heatmap",
        "funnel",
        "gauge",
        "candlestick",
        "boxplot",
        "treemap",
        "sunburst",
        "sankey",
        "graph",
        "parallel",
        "themeriver",
        "pictorial_bar",
        "calendar",
        "map",
    }
)


def _require(cond: bool, field_name: str, message: str) -> None:
    if not cond:
        raise SchemaError(field_name, message)


def _check_data_value(value: Any, path: str) -> None:
    """Data sequences hold arrays/objects of numbers and strings, nothing else."""
    if isinstance(value, bool):
        raise SchemaError(path, "booleans are not valid data-sequence leaves")
    if isinstance(value, (int, float, str)):
        return
    if isinstance(value, list):
        for i, item in enumerate(value):
            _check_data_value(item, f"{path}[{i}]")
        return
    if isinstance(value, dict):
        for key, item in value.items():
            if not isinstance(key, str):
                raise SchemaError(path, f"object key {key!r} is not a string")
            _check_data_value(item, f"{path}.{key}")
        return
    raise SchemaError(path, f"unsupported value of type {type(value).__name__}")


@dataclass(frozen=True, slots=True)
class QAPair:
    """A yes/no question targeting either the code text or the rendered video."""

    question: str
    expected_answer: str  # "yes" | "no"
    target: str  # "code" | "video"
    rationale: str = ""

    def validate(self, path: str = "qa") -> None:
        _require(bool(self.question.strip()), f"{path}.question", "must be non-empty")
        _require(
            self.expected_answer in ("yes", "no"),
            f"{path}.expected_answer",
            f"must be 'yes' or 'no', got {self.expected_answer!r}",
        )
        _require(
            self.target in ("code", "video"),
            f"{path}.target",
            f"must be 'code' or 'video', got {self.target!r}",
        )

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "question": self.question,
            "expected_answer": self.expected_answer,
            "target": self.target,
        }
        if self.rationale:
            d["rationale"] = self.rationale
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any], path: str = "qa") -> "QAPair":
        try:
            pair = cls(
                question=d["question"],
                expected_answer=d["expected_answer"],
                target=d["target"],
                rationale=d.get("rationale", ""),
            )
        except KeyError as exc:
            raise SchemaError(f"{path}.{exc.args[0]}", "missing required key") from None
        pair.validate(path)
        return pair


@dataclass(frozen=True, slots=True)
class ModificationSpec:
    """One edit instruction applied to a seed template."""

    category: ModificationCategory
    instruction: str

    def validate(self, path: str = "modification") -> None:
        _require(
            isinstance(self.category, ModificationCategory),
            f"{path}.category",
            f"unknown category {self.category!r}",
        )
        _require(bool(self.instruction.strip()), f"{path}.instruction", "must be non-empty")

    def to_dict(self) -> dict[str, Any]:
        return {"category": self.category.value, "instruction": self.instruction}

    @classmethod
    def from_dict(cls, d: dict[str, Any], path: str = "modification") -> "ModificationSpec":
        try:
            category = ModificationCategory(d["category"])
        except KeyError:
            raise SchemaError(f"{path}.category", "missing required key") from None
        except ValueError:
            raise SchemaError(f"{path}.category", f"unknown category {d['category']!r}") from None
        if "instruction" not in d:
            raise SchemaError(f"{path}.instruction", "missing required key")
        spec = cls(category=category, instruction=d["instruction"])
        spec.validate(path)
        return spec


@dataclass(frozen=True, slots=True)
class Provenance:
    seed_template_id: str
    modifications: tuple[ModificationSpec, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed_template_id": self.seed_template_id,
            "modifications": [m.to_dict() for m in self.modifications],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any], path: str = "provenance") -> "Provenance":
        if "seed_template_id" not in d:
            raise SchemaError(f"{path}.seed_template_id", "missing required key")
        mods = tuple(
            ModificationSpec.from_dict(m, f"{path}.modifications[{i}]")
            for i, m in enumerate(d.get("modifications", []))
        )
        return cls(seed_template_id=d["seed_template_id"], modifications=mods)


@dataclass(frozen=True, slots=True)
class ChartSample:
    """One dataset record: reference code + video + descriptions + QA sets."""

    id: str
    split: Split
    chart_type: str
    html_code: str
    video_path: str
    detailed_desc: str
    simple_desc: str
    data_sequence: Any
    qa_code: tuple[QAPair, ...]
    qa_video: tuple[QAPair, ...]
    provenance: Provenance

    def validate(self, chart_types: frozenset[str] = DEFAULT_CHART_TYPES) -> None:
        _require(bool(self.id), "id", "must be non-empty")
        _require(isinstance(self.split, Split), "split", f"unknown split {self.split!r}")
        _require(
            self.chart_type in chart_types,
            "chart_type",
            f"{self.chart_type!r} is not in the registered label set",
        )
        _require(bool(self.html_code), "html_code", "must be non-empty")
        _require(bool(self.video_path), "video_path", "must be non-empty")
        _require(
            not self.video_path.startswith("/"),
            "video_path",
            "must be a relative path",
        )
        _check_data_value(self.data_sequence, "data_sequence")
        _require(len(self.qa_code) > 0, "qa_code", "must be non-empty")
        _require(len(self.qa_video) > 0, "qa_video", "must be non-empty")
        for i, pair in enumerate(self.qa_code):
            pair.validate(f"qa_code[{i}]")
            _require(pair.target == "code", f"qa_code[{i}].target", "must be 'code'")
        for i, pair in enumerate(self.qa_video):
            pair.validate(f"qa_video[{i}]")
            _require(pair.target == "video", f"qa_video[{i}].target", "must be 'video'")

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "split": self.split.value,
            "chart_type": self.chart_type,
            "html_code": self.html_code,
            "video_path": self.video_path,
            "detailed_desc": self.detailed_desc,
            "simple_desc": self.simple_desc,
            "data_sequence": self.data_sequence,
            "qa_code": [q.to_dict() for q in self.qa_code],
            "qa_video": [q.to_dict() for q in self.qa_video],
            "provenance": self.provenance.to_dict(),
        }

    @classmethod
    def from_dict(
        cls,
        d: dict[str, Any],
        chart_types: frozenset[str] = DEFAULT_CHART_TYPES,
    ) -> "ChartSample":
        required = (
            "id",
            "split",
            "chart_type",
            "html_code",
            "video_path",
            "detailed_desc",
            "simple_desc",
            "data_sequence",
            "qa_code",
            "qa_video",
            "provenance",
        )
        for key in required:
            if key not in d:
                raise SchemaError(key, "missing required key")
        try:
            split = Split(d["split"])
        except ValueError:
            raise SchemaError("split", f"unknown split {d['split']!r}") from None
        sample = cls(
            id=d["id"],
            split=split,
            chart_type=d["chart_type"],
            html_code=d["html_code"],
            video_path=d["video_path"],
            detailed_desc=d["detailed_desc"],
            simple_desc=d["simple_desc"],
            data_sequence=d["data_sequence"],
            qa_code=tuple(QAPair.from_dict(q, f"qa_code[{i}]") for i, q in enumerate(d["qa_code"])),
            qa_video=tuple(
                QAPair.from_dict(q, f"qa_video[{i}]") for i, q in enumerate(d["qa_video"])
            ),
            provenance=Provenance.from_dict(d["provenance"]),
        )
        sample.validate(chart_types)
        return sample


@dataclass(frozen=True, slots=True)
class RenderSettings:
    """How chart HTML is turned into frames: clock geometry and budgets."""

    fps: int = 24
    duration: float = 2.0
    viewport: tuple[int, int] = (800, 600)
    per_job_timeout: float = 30.0
    settle_delay: float = 100.0  # virtual ms before frame 0

    def __post_init__(self) -> None:
        if self.fps <= 0:
            raise SchemaError("fps", "must be > 0")
        if self.duration <= 0:
            raise SchemaError("duration", "must be > 0")
        if self.frame_count < 1:
            raise SchemaError("duration", "fps x duration must round to at least one frame")

    @property
    def frame_count(self) -> int:
        return round(self.fps * self.duration)

    def to_dict(self) -> dict[str, Any]:
        return {
            "fps": self.fps,
            "duration": self.duration,
            "viewport": list(self.viewport),
            "per_job_timeout": self.per_job_timeout,
            "settle_delay": self.settle_delay,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RenderSettings":
        kwargs: dict[str, Any] = dict(d)
        if "viewport" in kwargs:
            kwargs["viewport"] = tuple(kwargs["viewport"])
        return cls(**kwargs)


@dataclass(frozen=True, slots=True)
class RenderOutcome:
    """Result of one render job. Anything but ``rendered`` is an execution failure."""

    status: RenderStatus
    frames_dir: Optional[str] = None
    video_path: Optional[str] = None
    frame_hashes: tuple[str, ...] = ()
    console_errors: tuple[str, ...] = ()
    error_class: Optional[ErrorClass] = None

    def validate(self) -> None:
        if self.status is RenderStatus.RENDERED:
            _require(len(self.frame_hashes) > 0, "frame_hashes", "rendered outcome has no frames")
            _require(self.video_path is not None, "video_path", "rendered outcome has no video")

    def to_dict(self) -> dict[str, Any]:
        return {
            "status": self.status.value,
            "frames_dir": self.frames_dir,
            "video_path": self.video_path,
            "frame_hashes": list(self.frame_hashes),
            "console_errors": list(self.console_errors),
            "error_class": self.error_class.value if self.error_class else None,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RenderOutcome":
        return cls(
            status=RenderStatus(d["status"]),
            frames_dir=d.get("frames_dir"),
            video_path=d.get("video_path"),
            frame_hashes=tuple(d.get("frame_hashes", ())),
            console_errors=tuple(d.get("console_errors", ())),
            error_class=ErrorClass(d["error_class"]) if d.get("error_class") else None,
        )


@dataclass(frozen=True, slots=True)
class TaskQuery:
    """Model input for one benchmark task.

    Text tasks carry an instruction string; the video task carries a path to
    the reference animation and no text instruction.
    """

    task: Task
    sample_id: str
    data_sequence: Any
    instruction_text: Optional[str] = None
    instruction_video: Optional[str] = None

    def validate(self) -> None:
        if self.task in (Task.D2C, Task.S2C):
            _require(
                bool(self.instruction_text),
                "instruction_text",
                f"{self.task.display} queries carry a text instruction",
            )
            _require(
                self.instruction_video is None,
                "instruction_video",
                f"{self.task.display} queries carry no video reference",
            )
        else:
            _require(
                bool(self.instruction_video),
                "instruction_video",
                "V2C queries carry a video reference",
            )
            _require(
                self.instruction_text is None,
                "instruction_text",
                "V2C queries carry no text instruction",
            )

    @classmethod
    def for_sample(cls, sample: ChartSample, task: Task, media_root: str = "") -> "TaskQuery":
        """Build the query for ``task`` from a dataset sample."""
        if task is Task.D2C:
            return cls(task, sample.id, sample.data_sequence, instruction_text=sample.detailed_desc)
        if task is Task.S2C:
            return cls(task, sample.id, sample.data_sequence, instruction_text=sample.simple_desc)
        video = f"{media_root}/{sample.video_path}" if media_root else sample.video_path
        return cls(task, sample.id, sample.data_sequence, instruction_video=video)


@dataclass(frozen=True, slots=True)
class Score:
    """An exact rational score: hit count over question count."""

    hits: int
    total: int

    def __post_init__(self) -> None:
        if self.total <= 0:
            raise SchemaError("score.total", "must be positive")
        if not 0 <= self.hits <= self.total:
            raise SchemaError("score.hits", f"{self.hits} outside [0, {self.total}]")

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.hits, self.total)

    def to_dict(self) -> dict[str, int]:
        return {"hits": self.hits, "total": self.total}

    @classmethod
    def from_dict(cls, d: dict[str, int]) -> "Score":
        return cls(hits=d["hits"], total=d["total"])


@dataclass(frozen=True, slots=True)
class JudgeStep:
    """One judge interaction: the question asked and the parsed verdict bit."""

    target: str  # "code" | "video"
    question: str
    judge_answer: str
    verdict: int  # 0 | 1

    def to_dict(self) -> dict[str, Any]:
        return {
            "target": self.target,
            "question": self.question,
            "judge_answer": self.judge_answer,
            "verdict": self.verdict,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "JudgeStep":
        return cls(d["target"], d["question"], d["judge_answer"], d["verdict"])


@dataclass(frozen=True, slots=True)
class GenerationResult:
    """A model's scored output for one sample x task.

    ``s_code``/``s_video`` are None when the judge was unavailable (the sample
    is "unscored", which is distinct from scoring zero). A failed render always
    scores (0, 0) without any judge involvement.
    """

    sample_id: str
    task: Task
    raw_output: str
    extracted_code: Optional[str]
    render: RenderOutcome
    s_code: Optional[Score]
    s_video: Optional[Score]
    judge_transcript: tuple[JudgeStep, ...] = ()

    def validate(self) -> None:
        if self.render.status is not RenderStatus.RENDERED:
            for name, score in (("s_code", self.s_code), ("s_video", self.s_video)):
                if score is not None and score.hits != 0:
                    raise SchemaError(name, "failed render must score 0")
        for i, step in enumerate(self.judge_transcript):
            if step.verdict not in (0, 1):
                raise SchemaError(f"judge_transcript[{i}].verdict", "must be 0 or 1")

    @property
    def unscored(self) -> bool:
        return self.s_code is None or self.s_video is None

    def to_dict(self) -> dict[str, Any]:
        return {
            "sample_id": self.sample_id,
            "task": self.task.value,
            "raw_output": self.raw_output,
            "extracted_code": self.extracted_code,
            "render": self.render.to_dict(),
            "s_code": self.s_code.to_dict() if self.s_code else None,
            "s_video": self.s_video.to_dict() if self.s_video else None,
            "judge_transcript": [s.to_dict() for s in self.judge_transcript],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "GenerationResult":
        result = cls(
            sample_id=d["sample_id"],
            task=Task(d["task"]),
            raw_output=d["raw_output"],
            extracted_code=d.get("extracted_code"),
            render=RenderOutcome.from_dict(d["render"]),
            s_code=Score.from_dict(d["s_code"]) if d.get("s_code") else None,
            s_video=Score.from_dict(d["s_video"]) if d.get("s_video") else None,
            judge_transcript=tuple(
                JudgeStep.from_dict(s) for s in d.get("judge_transcript", ())
            ),
        )
        result.validate()
        return result


#: Scores are stored as fractions in [0, 1]; reports display them x 10.
REPORT_SCALE = 10


def canonical_json(value: Any) -> str:
    """Serialize with sorted keys and compact separators: byte-stable output."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
