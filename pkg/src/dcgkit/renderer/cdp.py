"""Synchronous client for the browser DevTools wire protocol.

One client per render job keeps the concurrency story simple: commands and
events for a job flow over a dedicated WebSocket, so no cross-job locking is
needed.  Events that arrive while waiting for a command response are buffered
and can be drained or awaited later.
"""

from __future__ import annotations

import itertools
import json
import time
import urllib.error
import urllib.request
from collections import deque
from typing import Any

from websockets.exceptions import ConnectionClosed
from websockets.sync.client import connect as _ws_connect

# Screenshots arrive base64-encoded in a single message; leave headroom.
MAX_MESSAGE_BYTES = 64 * 1024 * 1024


class CdpConnectionError(RuntimeError):
    """The endpoint is unreachable or the connection dropped mid-command."""


class CdpCommandError(RuntimeError):
    """The browser rejected a command."""

    def __init__(self, method: str, error: dict[str, Any]):
        self.method = method
        self.code = error.get("code")
        self.message = str(error.get("message", "unknown error"))
        super().__init__(f"{method} failed: {self.message}")


def discover_websocket_url(endpoint: str, *, timeout: float = 10.0) -> str:
    """Resolve an HTTP debugging endpoint to its WebSocket URL.

    Accepts ``ws://`` URLs unchanged, otherwise asks ``/json/version``.
    """
    if endpoint.startswith(("ws://", "wss://")):
        return endpoint
    url = endpoint.rstrip("/") + "/json/version"
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            info = json.loads(resp.read().decode("utf-8"))
    except (urllib.error.URLError, OSError, ValueError) as exc:
        raise CdpConnectionError(f"cannot reach browser endpoint {endpoint}: {exc}") from exc
    ws_url = info.get("webSocketDebuggerUrl")
    if not ws_url:
        raise CdpConnectionError(f"{url} did not advertise webSocketDebuggerUrl")
    return ws_url


def list_pages(endpoint: str, *, timeout: float = 10.0) -> list[dict[str, Any]]:
    """Return the browser's open page descriptors from ``/json/list``."""
    url = endpoint.rstrip("/") + "/json/list"
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            return json.loads(resp.read().decode("utf-8"))
    except (urllib.error.URLError, OSError, ValueError) as exc:
        raise CdpConnectionError(f"cannot list pages at {endpoint}: {exc}") from exc


def _remaining(deadline: float | None) -> float | None:
    if deadline is None:
        return None
    return deadline - time.monotonic()


class CdpClient:
    """A single protocol connection with flat session routing."""

    def __init__(self, endpoint: str, *, open_timeout: float = 10.0):
        ws_url = discover_websocket_url(endpoint, timeout=open_timeout)
        try:
            self._ws = _ws_connect(
                ws_url, open_timeout=open_timeout, max_size=MAX_MESSAGE_BYTES
            )
        except (OSError, TimeoutError, ConnectionClosed) as exc:
            raise CdpConnectionError(f"cannot open {ws_url}: {exc}") from exc
        self._ids = itertools.count(1)
        self._events: deque[dict[str, Any]] = deque()

    def __enter__(self) -> "CdpClient":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()

    def close(self) -> None:
        try:
            self._ws.close()
        except Exception:
            pass

    def call(
        self,
        method: str,
        params: dict[str, Any] | None = None,
        *,
        session_id: str | None = None,
        deadline: float | None = None,
    ) -> dict[str, Any]:
        """Send a command and wait for its response, buffering events."""
        msg_id = next(self._ids)
        payload: dict[str, Any] = {"id": msg_id, "method": method, "params": params or {}}
        if session_id is not None:
            payload["sessionId"] = session_id
        try:
            self._ws.send(json.dumps(payload))
        except ConnectionClosed as exc:
            raise CdpConnectionError(f"connection closed while sending {method}") from exc
        while True:
            message = self._recv(deadline, waiting_for=method)
            if message.get("id") == msg_id:
                if "error" in message:
                    raise CdpCommandError(method, message["error"])
                return message.get("result", {})
            self._events.append(message)

    def wait_for_event(
        self,
        method: str,
        *,
        session_id: str | None = None,
        deadline: float | None = None,
    ) -> dict[str, Any]:
        """Return the params of the next matching event, oldest first."""
        for i, event in enumerate(self._events):
            if self._event_matches(event, method, session_id):
                del self._events[i]
                return event.get("params", {})
        while True:
            message = self._recv(deadline, waiting_for=f"event {method}")
            if self._event_matches(message, method, session_id):
                return message.get("params", {})
            self._events.append(message)

    def drain_events(
        self, *, method: str | None = None, session_id: str | None = None
    ) -> list[dict[str, Any]]:
        """Pop buffered plus already-arrived events, filtered if requested."""
        self._poll()
        kept: deque[dict[str, Any]] = deque()
        drained: list[dict[str, Any]] = []
        for event in self._events:
            matches = "method" in event
            if matches and method is not None and event.get("method") != method:
                matches = False
            if matches and session_id is not None and event.get("sessionId") != session_id:
                matches = False
            (drained if matches else kept).append(event)
        self._events = kept
        return drained

    @staticmethod
    def _event_matches(
        message: dict[str, Any], method: str, session_id: str | None
    ) -> bool:
        if message.get("method") != method:
            return False
        return session_id is None or message.get("sessionId") == session_id

    def _poll(self) -> None:
        # Pull everything the socket already holds without blocking.
        while True:
            try:
                raw = self._ws.recv(timeout=0)
            except TimeoutError:
                return
            except ConnectionClosed:
                return
            self._events.append(json.loads(raw))

    def _recv(self, deadline: float | None, *, waiting_for: str) -> dict[str, Any]:
        timeout = _remaining(deadline)
        if timeout is not None and timeout <= 0:
            raise TimeoutError(f"deadline exceeded while waiting for {waiting_for}")
        try:
            raw = self._ws.recv(timeout=timeout)
        except TimeoutError:
            raise TimeoutError(f"deadline exceeded while waiting for {waiting_for}") from None
        except ConnectionClosed as exc:
            raise CdpConnectionError(f"connection closed while waiting for {waiting_for}") from exc
        return json.loads(raw)
