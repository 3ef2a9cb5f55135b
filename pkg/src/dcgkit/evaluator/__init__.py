"""Benchmarking generated charts: QA scoring, execution rate, reports."""

from dcgkit.evaluator.benchmark import (
    BenchmarkError,
    aggregate_task,
    evaluate_sample,
    run_benchmark,
)
from dcgkit.evaluator.prompts import build_model_request
from dcgkit.evaluator.report import (
    EXEC_SCALE,
    REPORT_FORMATS,
    ScoreReport,
    TaskScores,
    format_scaled,
    parse_report,
    render_report,
)
from dcgkit.evaluator.scoring import exec_pass_rate, score_code, score_video

__all__ = [
    "BenchmarkError",
    "EXEC_SCALE",
    "REPORT_FORMATS",
    "ScoreReport",
    "TaskScores",
    "aggregate_task",
    "build_model_request",
    "evaluate_sample",
    "exec_pass_rate",
    "format_scaled",
    "parse_report",
    "render_report",
    "run_benchmark",
    "score_code",
    "score_video",
]
