"""Generator-backed curation steps: rewrite, describe, and QA synthesis.

All calls run at temperature 0 so the gateway cache makes stage reruns
reproducible.  Retry prompts embed an attempt marker, otherwise the cache
would replay the same failed answer.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Optional, Sequence

from dcgkit.gateway import (
    Gateway,
    ImagePart,
    ModelRequest,
    TextPart,
    UserPart,
    VideoPart,
    extract_video_frames,
)
from dcgkit.model import ModificationSpec, QAPair
from dcgkit.renderer.extract import extract_code


class CurationError(RuntimeError):
    """A curation step produced unusable output after its allowed retries."""


REWRITE_SYSTEM_PROMPT = (
    "You are an expert front-end engineer who edits animated chart documents. "
    "You receive a complete standalone HTML chart and a list of required "
    "modifications. Apply every modification faithfully while keeping the "
    "document self-contained (no network access at runtime) and renderable. "
    "Reply with the complete rewritten document in a single fenced ```html "
    "block and nothing else."
)

DESCRIBE_SYSTEM_PROMPT = (
    "You are a meticulous chart analyst. Describe animated charts precisely: "
    "chart type, plotted series and values, layout, colors, and how the "
    "animation unfolds over time."
)

SUMMARIZE_SYSTEM_PROMPT = (
    "You compress chart descriptions. Reply with a summary of at most 3 "
    "sentences that keeps the chart type and the essence of the animation."
)

DATA_SYSTEM_PROMPT = (
    "You extract the underlying data from chart source code. Reply with a "
    "single fenced ```json block holding the data sequence (arrays and "
    "objects only), and nothing else."
)

QA_SYSTEM_PROMPT = (
    "You write verification questions for animated charts. Every question "
    "must be answerable with yes or no, and must be decidable from the "
    "single modality you are told to target. Aim for a mix of yes-expected "
    "and no-expected questions. Reply with a single fenced ```json block "
    "holding an array of objects with keys \"question\", \"expected_answer\" "
    "(\"yes\" or \"no\"), and \"rationale\"."
)


def parse_json_reply(text: str) -> Any:
    """Pull the first JSON value out of a model reply.

    Prefers fenced blocks; falls back to scanning for an inline object or
    array. Raises ValueError when nothing parses.
    """
    import re

    for match in re.finditer(r"```(?:json)?\s*\n([\s\S]*?)```", text):
        try:
            return json.loads(match.group(1))
        except json.JSONDecodeError:
            continue
    decoder = json.JSONDecoder()
    for start in range(len(text)):
        if text[start] in "[{":
            try:
                value, _ = decoder.raw_decode(text, start)
                return value
            except json.JSONDecodeError:
                continue
    raise ValueError("reply contained no parseable JSON value")


def _video_parts(
    video_path: str | Path,
    gateway: Gateway,
    backend_id: str,
    workdir: Optional[Path],
) -> list[UserPart]:
    """Video as a native part, frames for image-only backends, else nothing."""
    capabilities = gateway.backend(backend_id).capabilities
    if "video" in capabilities:
        return [VideoPart(str(video_path))]
    if "image" in capabilities:
        import tempfile

        frame_dir = workdir if workdir else Path(tempfile.mkdtemp(prefix="curate-"))
        return [ImagePart(str(f)) for f in extract_video_frames(str(video_path), frame_dir)]
    return []


def apply_modifications(
    seed_html: str,
    mods: Sequence[ModificationSpec],
    gateway: Gateway,
    generator_backend: str,
) -> str:
    """One generator call applies all sampled modifications jointly."""
    if not mods:
        raise ValueError("apply_modifications needs at least one modification")
    numbered = "\n".join(
        f"{i}. [{m.category.value}] {m.instruction}" for i, m in enumerate(mods, start=1)
    )
    prompt = (
        "Apply all of the following modifications to the chart document:\n"
        f"{numbered}\n\nChart document:\n```html\n{seed_html}\n```"
    )
    reply = gateway.complete(
        ModelRequest(
            backend_id=generator_backend,
            system_prompt=REWRITE_SYSTEM_PROMPT,
            user_parts=(TextPart(prompt),),
        )
    )
    code = extract_code(reply)
    if code is None:
        raise CurationError("generator reply contained no usable chart document")
    return code


def describe(
    html: str,
    video_path: str | Path,
    gateway: Gateway,
    generator_backend: str,
    *,
    workdir: Optional[Path] = None,
) -> tuple[str, str, Any]:
    """Three generator calls: detailed description, summary, data sequence.

    The data sequence must parse as JSON; one repair retry is allowed, after
    which the sample is rejected.
    """
    detail_parts: list[UserPart] = [
        TextPart(
            "Describe this animated chart in detail: chart type, series and "
            "their values, layout, colors, and the animation timeline.\n\n"
            f"Chart source code:\n```html\n{html}\n```"
        )
    ]
    detail_parts.extend(_video_parts(video_path, gateway, generator_backend, workdir))
    detailed = gateway.complete(
        ModelRequest(
            backend_id=generator_backend,
            system_prompt=DESCRIBE_SYSTEM_PROMPT,
            user_parts=tuple(detail_parts),
        )
    ).strip()
    if not detailed:
        raise CurationError("generator returned an empty detailed description")

    simple = gateway.complete(
        ModelRequest(
            backend_id=generator_backend,
            system_prompt=SUMMARIZE_SYSTEM_PROMPT,
            user_parts=(TextPart(f"Summarize this chart description:\n\n{detailed}"),),
        )
    ).strip()
    if not simple:
        raise CurationError("generator returned an empty summary")

    data_prompt = (
        "Extract the data sequence plotted by this chart:\n"
        f"```html\n{html}\n```"
    )
    reply = gateway.complete(
        ModelRequest(
            backend_id=generator_backend,
            system_prompt=DATA_SYSTEM_PROMPT,
            user_parts=(TextPart(data_prompt),),
        )
    )
    try:
        data = parse_json_reply(reply)
    except ValueError:
        retry = gateway.complete(
            ModelRequest(
                backend_id=generator_backend,
                system_prompt=DATA_SYSTEM_PROMPT,
                user_parts=(
                    TextPart(
                        "Attempt 2: your previous reply was not valid JSON. "
                        + data_prompt
                    ),
                ),
            )
        )
        try:
            data = parse_json_reply(retry)
        except ValueError:
            raise CurationError(
                "generator could not produce a parseable data sequence in two attempts"
            ) from None
    return detailed, simple, data


def _parse_qa_batch(reply: str, target: str) -> list[QAPair]:
    try:
        items = parse_json_reply(reply)
    except ValueError:
        return []
    if not isinstance(items, list):
        return []
    pairs: list[QAPair] = []
    seen: set[str] = set()
    for item in items:
        if not isinstance(item, dict):
            continue
        question = str(item.get("question", "")).strip()
        answer = str(item.get("expected_answer", "")).strip().lower()
        if not question or answer not in ("yes", "no") or question in seen:
            continue
        seen.add(question)
        pairs.append(
            QAPair(
                question=question,
                expected_answer=answer,
                target=target,
                rationale=str(item.get("rationale", "")).strip(),
            )
        )
    return pairs


QA_PAIRS_PER_MODALITY = 10


def generate_qa(
    html: str,
    video_path: str | Path,
    gateway: Gateway,
    generator_backend: str,
    *,
    workdir: Optional[Path] = None,
) -> tuple[tuple[QAPair, ...], tuple[QAPair, ...]]:
    """Ten validated QA pairs per modality, with one regeneration attempt."""

    def request(target: str, attempt: int) -> list[QAPair]:
        if target == "code":
            body = (
                f"Write exactly {QA_PAIRS_PER_MODALITY} yes/no questions that can be "
                "answered by reading the chart source code alone (structure, options, "
                "series, configured colors). Do not ask about rendered pixels.\n\n"
                f"Chart source code:\n```html\n{html}\n```"
            )
            parts: list[UserPart] = [TextPart(body)]
        else:
            body = (
                f"Write exactly {QA_PAIRS_PER_MODALITY} yes/no questions that can be "
                "answered by watching the chart animation alone (visible shapes, "
                "motion, timing, layout). Do not ask about source code details.\n\n"
                "The chart animation follows."
            )
            parts = [TextPart(body)]
            parts.extend(_video_parts(video_path, gateway, generator_backend, workdir))
        if attempt > 1:
            parts.insert(
                0,
                TextPart(
                    f"Attempt {attempt}: the previous batch had too few valid entries. "
                    "Follow the format exactly."
                ),
            )
        reply = gateway.complete(
            ModelRequest(
                backend_id=generator_backend,
                system_prompt=QA_SYSTEM_PROMPT,
                user_parts=tuple(parts),
            )
        )
        return _parse_qa_batch(reply, target)

    results: dict[str, tuple[QAPair, ...]] = {}
    for target in ("code", "video"):
        pairs = request(target, attempt=1)
        if len(pairs) < QA_PAIRS_PER_MODALITY:
            pairs = request(target, attempt=2)
        if len(pairs) < QA_PAIRS_PER_MODALITY:
            raise CurationError(
                f"generator produced only {len(pairs)} valid {target} QA pairs "
                f"after regeneration; need {QA_PAIRS_PER_MODALITY}"
            )
        results[target] = tuple(pairs[:QA_PAIRS_PER_MODALITY])
    return results["code"], results["video"]
