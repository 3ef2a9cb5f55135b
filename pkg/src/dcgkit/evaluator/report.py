"""Benchmark score aggregates and their rendered forms.

Internals stay exact rationals; rounding happens only at display time:
half-up to two decimals, with QA scores shown out of 10 and the execution
rate shown as a percentage.  Cells for tasks that were not run render as
dashes.  Samples whose judge was unavailable are "unscored": excluded from
score means and surfaced in a footnote, never silently zeroed.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal, localcontext
from fractions import Fraction
from typing import Any

from dcgkit.model import REPORT_SCALE, Task, canonical_json

#: Execution rate displays as a percentage.
EXEC_SCALE = 100

REPORT_FORMATS = ("table", "csv", "json")


def format_scaled(value: Fraction | None, scale: int) -> str:
    """Scale and round half-up to two decimals; None renders as a dash."""
    if value is None:
        return "-"
    with localcontext() as ctx:
        ctx.prec = 50
        scaled = Decimal(value.numerator) * scale / Decimal(value.denominator)
        return str(scaled.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def _fraction_to_json(value: Fraction | None) -> list[int] | None:
    if value is None:
        return None
    return [value.numerator, value.denominator]


def _fraction_from_json(value: list[int] | None) -> Fraction | None:
    if value is None:
        return None
    return Fraction(value[0], value[1])


@dataclass(frozen=True, slots=True)
class TaskScores:
    """Aggregates for one task over the benchmark set."""

    task: Task
    n_samples: int
    n_rendered: int
    s_code: Fraction | None
    s_video: Fraction | None
    unscored: int

    @property
    def exec_rate(self) -> Fraction:
        return Fraction(self.n_rendered, self.n_samples)

    def to_dict(self) -> dict[str, Any]:
        return {
            "task": self.task.value,
            "n_samples": self.n_samples,
            "n_rendered": self.n_rendered,
            "s_code": _fraction_to_json(self.s_code),
            "s_video": _fraction_to_json(self.s_video),
            "unscored": self.unscored,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "TaskScores":
        return cls(
            task=Task(d["task"]),
            n_samples=d["n_samples"],
            n_rendered=d["n_rendered"],
            s_code=_fraction_from_json(d["s_code"]),
            s_video=_fraction_from_json(d["s_video"]),
            unscored=d["unscored"],
        )


@dataclass(frozen=True, slots=True)
class ScoreReport:
    """Everything a benchmark run reports, exact and serializable."""

    model: str
    judge: str
    tasks: tuple[TaskScores, ...]
    metadata: dict[str, Any]

    def task_scores(self, task: Task) -> TaskScores | None:
        for scores in self.tasks:
            if scores.task is task:
                return scores
        return None

    def to_dict(self) -> dict[str, Any]:
        return {
            "model": self.model,
            "judge": self.judge,
            "tasks": [t.to_dict() for t in self.tasks],
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ScoreReport":
        return cls(
            model=d["model"],
            judge=d["judge"],
            tasks=tuple(TaskScores.from_dict(t) for t in d["tasks"]),
            metadata=dict(d["metadata"]),
        )


def _rows(report: ScoreReport) -> list[tuple[str, str, str, str, str, str]]:
    rows = []
    for task in Task:
        scores = report.task_scores(task)
        if scores is None:
            rows.append((task.display, "-", "-", "-", "-", "-"))
            continue
        rows.append(
            (
                task.display,
                str(scores.n_samples),
                format_scaled(scores.exec_rate, EXEC_SCALE),
                format_scaled(scores.s_code, REPORT_SCALE),
                format_scaled(scores.s_video, REPORT_SCALE),
                str(scores.unscored),
            )
        )
    return rows


def render_report(report: ScoreReport, fmt: str = "table") -> str:
    """Render to ``table`` text, ``csv``, or canonical ``json``."""
    if fmt == "json":
        return canonical_json(report.to_dict())
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["task", "n_samples", "exec_rate", "s_code", "s_video", "unscored"])
        writer.writerows(_rows(report))
        return buffer.getvalue()
    if fmt != "table":
        raise ValueError(f"unknown report format {fmt!r}; expected one of {REPORT_FORMATS}")

    header = ("Task", "Samples", "Exec. Rate", "S_code", "S_video", "Unscored")
    rows = [header, *_rows(report)]
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = [f"Model: {report.model}    Judge: {report.judge}"]
    for index, row in enumerate(rows):
        cells = [cell.rjust(widths[i]) if i else cell.ljust(widths[i]) for i, cell in enumerate(row)]
        lines.append("  ".join(cells).rstrip())
        if index == 0:
            lines.append("  ".join("-" * w for w in widths))
    total_unscored = sum(t.unscored for t in report.tasks)
    if total_unscored:
        lines.append(
            f"Note: {total_unscored} unscored result(s) excluded from S_code/S_video means."
        )
    return "\n".join(lines) + "\n"


def parse_report(document: str) -> ScoreReport:
    """Inverse of ``render_report(..., 'json')``."""
    return ScoreReport.from_dict(json.loads(document))
