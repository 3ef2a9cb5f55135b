"""Benchmark runner: query the model, render its chart, judge both artifacts.

Every (sample, task) result lands in an append-only journal keyed by
(sample, task, model), so an interrupted run resumes where it stopped and
produces the same report an uninterrupted run would.

Failure handling draws a sharp line: problems attributable to the model
under test (no parsable chart, failed render, exhausted retries on its
backend) score zero and the run continues; infrastructure problems (judge
or browser unreachable) abort or mark results unscored rather than
polluting the numbers.
"""

from __future__ import annotations

import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor, as_completed
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from dcgkit.evaluator.prompts import build_model_request
from dcgkit.evaluator.report import ScoreReport, TaskScores
from dcgkit.evaluator.scoring import score_code, score_video
from dcgkit.gateway import CapabilityError, Gateway, RetryExhaustedError
from dcgkit.model import (
    ChartSample,
    ErrorClass,
    GenerationResult,
    RenderOutcome,
    RenderStatus,
    Score,
    Split,
    Task,
    TaskQuery,
    canonical_json,
)
from dcgkit.renderer.extract import extract_code
from dcgkit.renderer.pipeline import RenderProvider

logger = logging.getLogger(__name__)


class BenchmarkError(RuntimeError):
    """Systemic failure that invalidates the whole run."""


def _model_failure(note: str) -> RenderOutcome:
    return RenderOutcome(
        status=RenderStatus.LOAD_ERROR,
        console_errors=(note,),
        error_class=ErrorClass.OTHER,
    )


class _Journal:
    """Append-only resume log; one JSON line per finished (sample, task)."""

    def __init__(self, path: Path, model: str):
        self.path = path
        self.model = model
        self._lock = threading.Lock()
        self._entries: dict[tuple[str, str], GenerationResult] = {}
        if path.is_file():
            with path.open(encoding="utf-8") as handle:
                for line_no, line in enumerate(handle, start=1):
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        record = json.loads(line)
                        if record.get("model") != model:
                            continue
                        result = GenerationResult.from_dict(record["result"])
                    except (ValueError, KeyError) as exc:
                        logger.warning(
                            "skipping malformed journal line %d in %s: %s", line_no, path, exc
                        )
                        continue
                    self._entries[(record["sample_id"], record["task"])] = result

    def get(self, sample_id: str, task: Task) -> GenerationResult | None:
        return self._entries.get((sample_id, task.value))

    def put(self, result: GenerationResult) -> None:
        record = {
            "sample_id": result.sample_id,
            "task": result.task.value,
            "model": self.model,
            "result": result.to_dict(),
        }
        with self._lock:
            self._entries[(result.sample_id, result.task.value)] = result
            with self.path.open("a", encoding="utf-8") as handle:
                handle.write(canonical_json(record) + "\n")
                handle.flush()


def evaluate_sample(
    sample: ChartSample,
    task: Task,
    gateway: Gateway,
    model_backend: str,
    judge_backend: str,
    renderer: RenderProvider,
    *,
    media_root: str = "",
    temperature: float = 0.0,
    max_output: int = 8192,
    query_to_judge: bool = False,
    judge_workdir: Path | None = None,
) -> GenerationResult:
    """Run one (sample, task) cell end to end."""
    query = TaskQuery.for_sample(sample, task, media_root)
    n_code = len(sample.qa_code)
    n_video = len(sample.qa_video)

    def zeroes() -> tuple[Score, Score]:
        return Score(0, n_code), Score(0, n_video)

    raw = ""
    code: str | None = None
    try:
        raw = gateway.complete(
            build_model_request(
                query, model_backend, temperature=temperature, max_output=max_output
            )
        )
    except RetryExhaustedError as exc:
        render = _model_failure(f"model backend gave no answer after retries: {exc}")
        s_code, s_video = zeroes()
        return GenerationResult(sample.id, task, raw, None, render, s_code, s_video)

    code = extract_code(raw)
    if code is None:
        render = _model_failure("model output contained no usable chart document")
        s_code, s_video = zeroes()
        return GenerationResult(sample.id, task, raw, None, render, s_code, s_video)

    render = renderer.render(code, job_name=f"{sample.id}-{task.value}")
    if render.status is not RenderStatus.RENDERED:
        s_code, s_video = zeroes()
        return GenerationResult(sample.id, task, raw, code, render, s_code, s_video)

    query_text = query.instruction_text if query_to_judge else None
    transcript = ()
    try:
        s_code, steps_code = score_code(
            code, sample.qa_code, gateway, judge_backend, query_text=query_text
        )
        transcript = steps_code
    except RetryExhaustedError as exc:
        logger.warning("judge unavailable for %s/%s code QA: %s", sample.id, task.value, exc)
        s_code = None
    try:
        assert render.video_path is not None
        s_video, steps_video = score_video(
            render.video_path,
            sample.qa_video,
            gateway,
            judge_backend,
            query_text=query_text,
            workdir=judge_workdir,
        )
        transcript = transcript + steps_video
    except RetryExhaustedError as exc:
        logger.warning("judge unavailable for %s/%s video QA: %s", sample.id, task.value, exc)
        s_video = None
    result = GenerationResult(sample.id, task, raw, code, render, s_code, s_video, transcript)
    result.validate()
    return result


def aggregate_task(task: Task, results: Sequence[GenerationResult]) -> TaskScores:
    """Exact per-task means; unscored results are excluded, not zeroed."""
    if not results:
        raise ValueError(f"no results to aggregate for {task.display}")
    rendered = sum(1 for r in results if r.render.status is RenderStatus.RENDERED)
    code_fractions = [r.s_code.fraction for r in results if r.s_code is not None]
    video_fractions = [r.s_video.fraction for r in results if r.s_video is not None]
    return TaskScores(
        task=task,
        n_samples=len(results),
        n_rendered=rendered,
        s_code=(
            sum(code_fractions, Fraction(0)) / len(code_fractions) if code_fractions else None
        ),
        s_video=(
            sum(video_fractions, Fraction(0)) / len(video_fractions)
            if video_fractions
            else None
        ),
        unscored=sum(1 for r in results if r.unscored),
    )


def run_benchmark(
    samples: Sequence[ChartSample],
    tasks: Iterable[Task],
    gateway: Gateway,
    model_backend: str,
    judge_backend: str,
    renderer: RenderProvider,
    *,
    workdir: Path | str,
    media_root: str = "",
    max_workers: int = 4,
    temperature: float = 0.0,
    max_output: int = 8192,
    query_to_judge: bool = False,
    require_test_split: bool = True,
) -> ScoreReport:
    """Evaluate every sample on every requested task and aggregate."""
    samples = list(samples)
    if not samples:
        raise ValueError("benchmark needs at least one sample")
    task_order = tuple(t for t in Task if t in set(tasks))
    if not task_order:
        raise ValueError("benchmark needs at least one task")
    if require_test_split:
        offenders = sorted({s.split.value for s in samples if s.split is not Split.TEST})
        if offenders:
            raise ValueError(
                f"benchmark expects the test split; got samples from {offenders}"
            )
    backend = gateway.backend(model_backend)
    gateway.backend(judge_backend)
    if Task.V2C in task_order and not ({"video", "image"} & backend.capabilities):
        raise CapabilityError(
            f"V2C requested but model backend {model_backend!r} is text-only"
        )

    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    journal = _Journal(workdir / "benchmark.journal.jsonl", model_backend)
    judge_workdir = workdir / "judge_frames"

    pending = [
        (sample, task)
        for task in task_order
        for sample in samples
        if journal.get(sample.id, task) is None
    ]
    if pending:
        with ThreadPoolExecutor(
            max_workers=max(1, max_workers), thread_name_prefix="bench"
        ) as pool:
            futures = {
                pool.submit(
                    evaluate_sample,
                    sample,
                    task,
                    gateway,
                    model_backend,
                    judge_backend,
                    renderer,
                    media_root=media_root,
                    temperature=temperature,
                    max_output=max_output,
                    query_to_judge=query_to_judge,
                    judge_workdir=judge_workdir / f"{sample.id}-{task.value}",
                ): (sample, task)
                for sample, task in pending
            }
            for future in as_completed(futures):
                journal.put(future.result())

    per_task = []
    for task in task_order:
        results = []
        for sample in samples:
            result = journal.get(sample.id, task)
            if result is None:
                raise BenchmarkError(f"missing journal entry for {sample.id}/{task.value}")
            results.append(result)
        per_task.append(aggregate_task(task, results))
    return ScoreReport(
        model=model_backend,
        judge=judge_backend,
        tasks=tuple(per_task),
        metadata={
            "temperature": temperature,
            "max_output": max_output,
            "n_samples": len(samples),
            "query_to_judge": query_to_judge,
        },
    )
