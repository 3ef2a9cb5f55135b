"""Remote backend speaking the OpenAI-compatible chat completions protocol.

Covers hosted judges and generators behind a common API shape.  Credentials
come from an environment variable only, never from config files, so runs are
reproducible from config plus dataset without leaking secrets.
"""

from __future__ import annotations

import base64
import mimetypes
import os
from pathlib import Path

import httpx

from dcgkit.gateway.core import (
    AuthError,
    GatewayError,
    ModelRequest,
    TextPart,
    TransientBackendError,
)

_RETRYABLE_STATUS = {408, 409, 429, 500, 502, 503, 504}


def _data_url(path: str) -> str:
    mime, _ = mimetypes.guess_type(path)
    mime = mime or "application/octet-stream"
    try:
        payload = base64.b64encode(Path(path).read_bytes()).decode("ascii")
    except OSError as exc:
        raise GatewayError(f"cannot read media file {path}: {exc}") from exc
    return f"data:{mime};base64,{payload}"


class HttpBackend:
    """Chat-completions client over HTTPS."""

    def __init__(
        self,
        backend_id: str,
        *,
        base_url: str,
        model: str,
        api_key_env: str = "DCGKIT_API_KEY",
        capabilities: frozenset[str] = frozenset({"text"}),
        timeout: float = 120.0,
    ):
        self.backend_id = backend_id
        self.capabilities = capabilities
        self._base_url = base_url.rstrip("/")
        self._model = model
        self._api_key_env = api_key_env
        self._timeout = timeout

    def _headers(self) -> dict[str, str]:
        key = os.environ.get(self._api_key_env, "")
        if not key:
            raise AuthError(
                f"backend {self.backend_id} needs credentials in ${self._api_key_env}"
            )
        return {"Authorization": f"Bearer {key}"}

    def _content_parts(self, request: ModelRequest) -> list[dict]:
        parts: list[dict] = []
        for part in request.user_parts:
            if isinstance(part, TextPart):
                parts.append({"type": "text", "text": part.text})
            elif part.kind == "image":
                parts.append({"type": "image_url", "image_url": {"url": _data_url(part.path)}})
            else:
                parts.append({"type": "video_url", "video_url": {"url": _data_url(part.path)}})
        return parts

    def complete(self, request: ModelRequest) -> str:
        payload = {
            "model": self._model,
            "temperature": request.temperature,
            "max_tokens": request.max_output,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": self._content_parts(request)},
            ],
        }
        try:
            response = httpx.post(
                f"{self._base_url}/chat/completions",
                json=payload,
                headers=self._headers(),
                timeout=self._timeout,
            )
        except httpx.TimeoutException as exc:
            raise TransientBackendError(f"{self.backend_id} timed out: {exc}") from exc
        except httpx.HTTPError as exc:
            raise TransientBackendError(f"{self.backend_id} transport error: {exc}") from exc
        if response.status_code in (401, 403):
            raise AuthError(f"{self.backend_id} rejected credentials ({response.status_code})")
        if response.status_code in _RETRYABLE_STATUS:
            raise TransientBackendError(
                f"{self.backend_id} returned {response.status_code}: {response.text[:200]}"
            )
        if response.status_code != 200:
            raise GatewayError(
                f"{self.backend_id} returned {response.status_code}: {response.text[:200]}"
            )
        try:
            return response.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise GatewayError(f"{self.backend_id} returned an unexpected body") from exc
