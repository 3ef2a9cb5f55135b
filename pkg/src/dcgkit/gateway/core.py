"""Request model and backend contract for text/vision model calls.

A request is a system prompt plus an ordered list of typed user parts
(text, image, video).  Its cache key digests everything that can change the
response: backend id, prompts, media file contents, and generation
parameters.  Media is digested by content, not path, so moving files around
does not invalidate caches.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Union, runtime_checkable

from dcgkit.model import canonical_json


class GatewayError(RuntimeError):
    """Base class for model-call failures."""


class UnknownBackendError(GatewayError):
    """Requested backend id is not registered."""


class CapabilityError(GatewayError):
    """Request carries media the backend does not accept."""


class AuthError(GatewayError):
    """Missing or rejected credentials."""


class TransientBackendError(GatewayError):
    """Retryable failure: timeout, rate limit, 5xx."""


class RetryExhaustedError(GatewayError):
    """Transient failures persisted through every retry attempt."""


class BudgetExceededError(GatewayError):
    """The gateway-wide upstream call budget ran out."""


@dataclass(frozen=True, slots=True)
class TextPart:
    text: str
    kind: str = field(default="text", init=False)


@dataclass(frozen=True, slots=True)
class ImagePart:
    path: str
    kind: str = field(default="image", init=False)


@dataclass(frozen=True, slots=True)
class VideoPart:
    path: str
    kind: str = field(default="video", init=False)


UserPart = Union[TextPart, ImagePart, VideoPart]


def _file_digest(path: str) -> str:
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError as exc:
        raise GatewayError(f"cannot digest media file {path}: {exc}") from exc


@dataclass(frozen=True, slots=True)
class ModelRequest:
    """One call to a model backend.

    ``max_output`` and ``temperature`` default to deterministic evaluation
    settings: greedy decoding with an 8192-token output budget.
    """

    backend_id: str
    system_prompt: str
    user_parts: tuple[UserPart, ...]
    max_output: int = 8192
    temperature: float = 0.0

    def __post_init__(self) -> None:
        if not self.user_parts:
            raise ValueError("a request needs at least one user part")
        if self.max_output <= 0:
            raise ValueError("max_output must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")

    @property
    def media_kinds(self) -> frozenset[str]:
        return frozenset(part.kind for part in self.user_parts)

    def cache_key(self) -> str:
        """Content digest identifying this request exactly."""
        parts_repr = []
        for part in self.user_parts:
            if isinstance(part, TextPart):
                parts_repr.append({"kind": "text", "text": part.text})
            else:
                parts_repr.append({"kind": part.kind, "digest": _file_digest(part.path)})
        payload = {
            "backend_id": self.backend_id,
            "system_prompt": self.system_prompt,
            "user_parts": parts_repr,
            "max_output": self.max_output,
            "temperature": self.temperature,
        }
        return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()

    def text_content(self) -> str:
        """All text visible to the backend, for substring-scripted mocks."""
        texts = [self.system_prompt]
        texts.extend(part.text for part in self.user_parts if isinstance(part, TextPart))
        return "\n".join(texts)


@runtime_checkable
class Backend(Protocol):
    """A model endpoint: anything that can answer a ModelRequest."""

    backend_id: str
    capabilities: frozenset[str]

    def complete(self, request: ModelRequest) -> str: ...
