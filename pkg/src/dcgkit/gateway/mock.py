"""Scripted backend for deterministic tests and offline runs.

The script is JSON (file or dict):

.. code-block:: json

    {
      "default": "no",
      "rules": [
        {"contains": "axes and gridlines", "reply": "yes"},
        {"digest": "3f7a...", "reply": "yes. matches the recorded request"},
        {"contains": "rewrite", "replies": ["first call", "second call"]}
      ]
    }

Rules are checked in order; the first match answers.  ``contains`` matches a
substring of the request's visible text, ``digest`` matches the exact cache
key.  ``replies`` lists are consumed sequentially (the last entry repeats),
which lets a test script a regeneration attempt.  Every served call is
counted, so tests can assert judge-call budgets.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any

from dcgkit.gateway.core import GatewayError, ModelRequest, TransientBackendError

ALL_CAPABILITIES = frozenset({"text", "image", "video"})


class MockBackend:
    """Deterministic scripted backend; thread-safe call counting."""

    def __init__(
        self,
        backend_id: str,
        script: dict[str, Any] | Path | str,
        *,
        capabilities: frozenset[str] = ALL_CAPABILITIES,
    ):
        if isinstance(script, (str, Path)):
            try:
                script = json.loads(Path(script).read_text(encoding="utf-8"))
            except OSError as exc:
                raise GatewayError(f"cannot read mock script: {exc}") from exc
            except ValueError as exc:
                raise GatewayError(f"mock script is not valid JSON: {exc}") from exc
        if not isinstance(script, dict):
            raise GatewayError("mock script must be a JSON object")
        self.backend_id = backend_id
        self.capabilities = capabilities
        self._default = script.get("default")
        self._fail_times = int(script.get("fail_times", 0))
        self._rules = []
        for i, rule in enumerate(script.get("rules", [])):
            if "contains" not in rule and "digest" not in rule:
                raise GatewayError(f"mock rule {i} needs 'contains' or 'digest'")
            replies = rule.get("replies")
            if replies is None:
                if "reply" not in rule:
                    raise GatewayError(f"mock rule {i} needs 'reply' or 'replies'")
                replies = [rule["reply"]]
            if not replies:
                raise GatewayError(f"mock rule {i} has an empty reply list")
            self._rules.append(
                {
                    "contains": rule.get("contains"),
                    "digest": rule.get("digest"),
                    "replies": [str(r) for r in replies],
                    "served": 0,
                }
            )
        self._lock = threading.Lock()
        self._calls = 0
        self._failures_left = self._fail_times

    @property
    def call_count(self) -> int:
        with self._lock:
            return self._calls

    def reset_counts(self) -> None:
        with self._lock:
            self._calls = 0
            self._failures_left = self._fail_times
            for rule in self._rules:
                rule["served"] = 0

    def complete(self, request: ModelRequest) -> str:
        text = request.text_content()
        digest = None
        with self._lock:
            self._calls += 1
            if self._failures_left > 0:
                self._failures_left -= 1
                raise TransientBackendError(
                    f"mock backend {self.backend_id} scripted transient failure"
                )
            for rule in self._rules:
                if rule["contains"] is not None:
                    if rule["contains"] in text:
                        return self._serve(rule)
                    continue
                if digest is None:
                    digest = request.cache_key()
                if rule["digest"] == digest:
                    return self._serve(rule)
            if self._default is not None:
                return str(self._default)
        raise GatewayError(
            f"mock backend {self.backend_id} has no rule matching the request "
            f"(first 80 chars: {text[:80]!r})"
        )

    @staticmethod
    def _serve(rule: dict[str, Any]) -> str:
        index = min(rule["served"], len(rule["replies"]) - 1)
        rule["served"] += 1
        return rule["replies"][index]


class EchoBackend:
    """Replies with the request's visible text; handy for wiring checks."""

    def __init__(self, backend_id: str, *, capabilities: frozenset[str] = ALL_CAPABILITIES):
        self.backend_id = backend_id
        self.capabilities = capabilities
        self._lock = threading.Lock()
        self._calls = 0

    @property
    def call_count(self) -> int:
        with self._lock:
            return self._calls

    def complete(self, request: ModelRequest) -> str:
        with self._lock:
            self._calls += 1
        return request.text_content()
