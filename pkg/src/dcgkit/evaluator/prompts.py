"""Prompts sent to the model under test, one template per task."""

from __future__ import annotations

import json

from dcgkit.gateway import ModelRequest, TextPart, UserPart, VideoPart
from dcgkit.model import Task, TaskQuery

SYSTEM_PROMPT = (
    "You are an expert front-end engineer. Produce a complete, standalone "
    "HTML document implementing the requested animated chart. The document "
    "must run with no network access and draw onto a <canvas>. Reply with a "
    "single fenced ```html code block and nothing else."
)

_TEXT_TASK_HEADER = {
    Task.D2C: "Implement the animated chart specified by this detailed description.",
    Task.S2C: "Implement an animated chart matching this brief description.",
}

_V2C_HEADER = (
    "Reproduce the animated chart shown in the reference video as closely "
    "as you can."
)


def build_model_request(
    query: TaskQuery,
    backend_id: str,
    *,
    temperature: float = 0.0,
    max_output: int = 8192,
) -> ModelRequest:
    """Turn a task query into the request the model under test receives."""
    query.validate()
    data_block = (
        "Underlying data sequence (JSON):\n"
        + json.dumps(query.data_sequence, ensure_ascii=False, sort_keys=True)
    )
    parts: list[UserPart] = []
    if query.task is Task.V2C:
        assert query.instruction_video is not None
        parts.append(TextPart(f"{_V2C_HEADER}\n\n{data_block}"))
        parts.append(VideoPart(query.instruction_video))
    else:
        assert query.instruction_text is not None
        header = _TEXT_TASK_HEADER[query.task]
        parts.append(TextPart(f"{header}\n\n{query.instruction_text}\n\n{data_block}"))
    return ModelRequest(
        backend_id=backend_id,
        system_prompt=SYSTEM_PROMPT,
        user_parts=tuple(parts),
        max_output=max_output,
        temperature=temperature,
    )
