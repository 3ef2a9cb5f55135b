"""QA-based scoring of generated charts: means of binary judge verdicts.

``score_code`` asks every code-targeted question about the generated source;
``score_video`` does the same for the rendered animation.  Both return exact
rational scores (hit count over question count) plus the judge transcript,
so nothing is rounded before display time.
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from dcgkit.gateway import CodeArtifact, Gateway, VideoArtifact
from dcgkit.model import GenerationResult, JudgeStep, QAPair, RenderStatus, Score


def _score(
    artifact: CodeArtifact | VideoArtifact,
    questions: Sequence[QAPair],
    gateway: Gateway,
    judge_backend: str,
    *,
    query_text: str | None,
    workdir: Path | None,
) -> tuple[Score, tuple[JudgeStep, ...]]:
    hits = 0
    steps: list[JudgeStep] = []
    for question in questions:
        verdict = gateway.judge_question(
            artifact, question, judge_backend, query_text=query_text, workdir=workdir
        )
        answered = "yes" if verdict.bit else "no"
        # Credit requires a parseable reply matching the expected answer; an
        # unparseable judge never scores a hit, even on no-expected questions.
        hit = 1 if (verdict.parse_ok and answered == question.expected_answer) else 0
        hits += hit
        steps.append(
            JudgeStep(
                target=question.target,
                question=question.question,
                judge_answer=verdict.raw_answer,
                verdict=hit,
            )
        )
    return Score(hits=hits, total=len(questions)), tuple(steps)


def score_code(
    extracted_code: str,
    qa_code: Sequence[QAPair],
    gateway: Gateway,
    judge_backend: str,
    *,
    query_text: str | None = None,
) -> tuple[Score, tuple[JudgeStep, ...]]:
    """Fraction of code-targeted questions the judge answers yes to."""
    if not extracted_code:
        raise ValueError("score_code needs non-empty code; failed renders score 0 upstream")
    if not qa_code:
        raise ValueError("score_code needs at least one question")
    for question in qa_code:
        if question.target != "code":
            raise ValueError(f"question targets {question.target!r}, expected 'code'")
    return _score(
        CodeArtifact(extracted_code),
        qa_code,
        gateway,
        judge_backend,
        query_text=query_text,
        workdir=None,
    )


def score_video(
    video_path: str,
    qa_video: Sequence[QAPair],
    gateway: Gateway,
    judge_backend: str,
    *,
    query_text: str | None = None,
    workdir: Path | None = None,
) -> tuple[Score, tuple[JudgeStep, ...]]:
    """Fraction of video-targeted questions the judge answers yes to."""
    if not video_path:
        raise ValueError("score_video needs a video path; failed renders score 0 upstream")
    if not qa_video:
        raise ValueError("score_video needs at least one question")
    for question in qa_video:
        if question.target != "video":
            raise ValueError(f"question targets {question.target!r}, expected 'video'")
    return _score(
        VideoArtifact(video_path),
        qa_video,
        gateway,
        judge_backend,
        query_text=query_text,
        workdir=workdir,
    )


def exec_pass_rate(results: Iterable[GenerationResult]) -> Fraction:
    """Share of results whose chart actually rendered."""
    results = list(results)
    if not results:
        raise ValueError("exec_pass_rate needs at least one result")
    rendered = sum(1 for r in results if r.render.status is RenderStatus.RENDERED)
    return Fraction(rendered, len(results))
