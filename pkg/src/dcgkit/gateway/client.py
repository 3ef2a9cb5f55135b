"""The gateway: routing, caching, retries, concurrency bounds, judging.

One :class:`Gateway` instance is shared across threads.  Responses for
temperature-0 requests are cached on disk keyed by the request digest, which
makes evaluations resumable and repeated runs cheap.  Each backend gets a
semaphore so no more than a configured number of upstream calls are in
flight at once.
"""

from __future__ import annotations

import json
import logging
import os
import re
import tempfile
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Union

from dcgkit.gateway.core import (
    Backend,
    BudgetExceededError,
    CapabilityError,
    GatewayError,
    ImagePart,
    ModelRequest,
    RetryExhaustedError,
    TextPart,
    TransientBackendError,
    UnknownBackendError,
    UserPart,
    VideoPart,
)
from dcgkit.model import QAPair

logger = logging.getLogger(__name__)

#: Frames sent to image-only judges in place of a video.
VIDEO_FALLBACK_FRAMES = 8

JUDGE_SYSTEM_PROMPT = (
    "You are a strict evaluator of charts. You will be shown one chart "
    "artifact (source code, a video, or video frames) and one yes/no "
    "question about it. Answer strictly 'yes' or 'no' first, then one "
    "sentence of justification."
)

_VERDICT_RE = re.compile(r"^\W*(yes|no)\b", re.IGNORECASE)


@dataclass(frozen=True, slots=True)
class CodeArtifact:
    """Chart source code under judgment."""

    code: str
    kind: str = "code"


@dataclass(frozen=True, slots=True)
class VideoArtifact:
    """Rendered chart animation under judgment."""

    path: str
    kind: str = "video"


Artifact = Union[CodeArtifact, VideoArtifact]


@dataclass(frozen=True, slots=True)
class JudgeVerdict:
    """One binary judgment: the parsed bit plus the raw answer.

    ``parse_ok`` False means the judge did not lead with yes/no; the bit is
    forced to 0 and the event is logged.  ``media`` records how a video
    artifact was delivered (``video`` natively, ``frames`` as still images).
    """

    bit: int
    raw_answer: str
    parse_ok: bool
    media: str = "text"

    def __post_init__(self) -> None:
        if self.bit not in (0, 1):
            raise ValueError("verdict bit must be 0 or 1")
        if not self.parse_ok and self.bit != 0:
            raise ValueError("unparseable answers must score 0")


def parse_verdict(answer: str) -> tuple[int, bool]:
    """Leading yes/no, case-insensitive, punctuation tolerated."""
    match = _VERDICT_RE.match(answer.strip())
    if not match:
        return 0, False
    return (1 if match.group(1).lower() == "yes" else 0), True


def extract_video_frames(
    video_path: str, out_dir: Path, count: int = VIDEO_FALLBACK_FRAMES
) -> list[Path]:
    """Pull ``count`` uniformly spaced frames from a video as PNG files."""
    import cv2

    capture = cv2.VideoCapture(str(video_path))
    if not capture.isOpened():
        raise GatewayError(f"cannot open video for frame extraction: {video_path}")
    try:
        frames = []
        while True:
            ok, frame = capture.read()
            if not ok:
                break
            frames.append(frame)
    finally:
        capture.release()
    if not frames:
        raise GatewayError(f"video has no decodable frames: {video_path}")
    count = min(count, len(frames))
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(count):
        index = round(i * (len(frames) - 1) / max(1, count - 1)) if count > 1 else 0
        path = out_dir / f"judge_frame_{i:02d}.png"
        if not cv2.imwrite(str(path), frames[index]):
            raise GatewayError(f"cannot write extracted frame {path}")
        paths.append(path)
    return paths


class Gateway:
    """Shared client over registered backends."""

    def __init__(
        self,
        backends: Iterable[Backend],
        *,
        cache_dir: Path | str | None = None,
        max_in_flight: int = 4,
        retries: int = 3,
        backoff: float = 0.25,
        call_budget: int | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self._backends: dict[str, Backend] = {}
        for backend in backends:
            if backend.backend_id in self._backends:
                raise GatewayError(f"duplicate backend id {backend.backend_id!r}")
            self._backends[backend.backend_id] = backend
        self._cache_dir = Path(cache_dir) if cache_dir else None
        self._semaphores = {
            backend_id: threading.BoundedSemaphore(max_in_flight)
            for backend_id in self._backends
        }
        if retries < 0:
            raise ValueError("retries must be >= 0")
        self._retries = retries
        self._backoff = backoff
        self._sleep = sleep
        self._budget_lock = threading.Lock()
        self._budget_left = call_budget
        self._upstream_calls = 0

    @property
    def upstream_calls(self) -> int:
        with self._budget_lock:
            return self._upstream_calls

    def backend(self, backend_id: str) -> Backend:
        try:
            return self._backends[backend_id]
        except KeyError:
            raise UnknownBackendError(
                f"no backend registered as {backend_id!r}; "
                f"known: {sorted(self._backends)}"
            ) from None

    def complete(self, request: ModelRequest) -> str:
        """Answer a request, consulting the cache and retrying transients."""
        backend = self.backend(request.backend_id)
        missing = request.media_kinds - backend.capabilities - {"text"}
        if missing:
            raise CapabilityError(
                f"backend {backend.backend_id!r} does not accept {sorted(missing)} parts"
            )
        cache_path = self._cache_path(request)
        if cache_path is not None and cache_path.is_file():
            return json.loads(cache_path.read_text(encoding="utf-8"))["response"]
        response = self._call_with_retries(backend, request)
        if cache_path is not None:
            self._cache_store(cache_path, request, response)
        return response

    def judge_question(
        self,
        artifact: Artifact,
        question: QAPair,
        backend_id: str,
        *,
        query_text: str | None = None,
        workdir: Path | str | None = None,
    ) -> JudgeVerdict:
        """Ask one yes/no question about an artifact; always returns a bit.

        ``query_text`` optionally shows the judge the original task query.
        Image-only backends receive uniformly spaced video frames instead of
        the video file itself.
        """
        if question.target != artifact.kind:
            raise GatewayError(
                f"question targets {question.target!r} but artifact is {artifact.kind!r}"
            )
        backend = self.backend(backend_id)
        parts: list[UserPart] = []
        media = "text"
        preamble = f"Question: {question.question}"
        if query_text:
            preamble = f"Original task query: {query_text}\n\n{preamble}"
        if isinstance(artifact, CodeArtifact):
            parts.append(
                TextPart(f"{preamble}\n\nChart source code:\n```html\n{artifact.code}\n```")
            )
        else:
            parts.append(TextPart(f"{preamble}\n\nThe chart animation follows."))
            if "video" in backend.capabilities:
                parts.append(VideoPart(artifact.path))
                media = "video"
            elif "image" in backend.capabilities:
                frame_dir = Path(workdir) if workdir else Path(tempfile.mkdtemp(prefix="judge-"))
                for frame in extract_video_frames(artifact.path, frame_dir):
                    parts.append(ImagePart(str(frame)))
                media = "frames"
                logger.info(
                    "backend %s lacks video support; sent %d frames for %s",
                    backend_id,
                    VIDEO_FALLBACK_FRAMES,
                    artifact.path,
                )
            else:
                raise CapabilityError(
                    f"backend {backend_id!r} accepts neither video nor images"
                )
        request = ModelRequest(
            backend_id=backend_id,
            system_prompt=JUDGE_SYSTEM_PROMPT,
            user_parts=tuple(parts),
            temperature=0.0,
        )
        answer = self.complete(request)
        bit, parse_ok = parse_verdict(answer)
        if not parse_ok:
            logger.warning(
                "judge %s gave an unparseable answer (%r); scoring 0", backend_id, answer[:80]
            )
        return JudgeVerdict(bit=bit, raw_answer=answer, parse_ok=parse_ok, media=media)

    # -- internals ----------------------------------------------------------

    def _cache_path(self, request: ModelRequest) -> Path | None:
        if self._cache_dir is None or request.temperature != 0:
            return None
        return self._cache_dir / request.backend_id / f"{request.cache_key()}.json"

    @staticmethod
    def _cache_store(path: Path, request: ModelRequest, response: str) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = json.dumps(
            {"backend_id": request.backend_id, "response": response}, ensure_ascii=False
        )
        # Atomic publish: concurrent writers of the same key are benign
        # because temperature-0 responses are deterministic.
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(payload)
            os.replace(tmp, path)
        except OSError:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise

    def _call_with_retries(self, backend: Backend, request: ModelRequest) -> str:
        semaphore = self._semaphores[backend.backend_id]
        last: TransientBackendError | None = None
        for attempt in range(self._retries + 1):
            if attempt:
                self._sleep(self._backoff * (2 ** (attempt - 1)))
            self._charge_budget()
            with semaphore:
                try:
                    return backend.complete(request)
                except TransientBackendError as exc:
                    last = exc
                    logger.info(
                        "transient failure from %s (attempt %d/%d): %s",
                        backend.backend_id,
                        attempt + 1,
                        self._retries + 1,
                        exc,
                    )
        raise RetryExhaustedError(
            f"backend {backend.backend_id} failed {self._retries + 1} attempts: {last}"
        ) from last

    def _charge_budget(self) -> None:
        with self._budget_lock:
            if self._budget_left is not None:
                if self._budget_left <= 0:
                    raise BudgetExceededError("gateway call budget exhausted")
                self._budget_left -= 1
            self._upstream_calls += 1
