"""The render pipeline: chart HTML in, frames plus video plus status out.

Determinism comes from three pieces working together:

* a virtual clock injected before any page script, so animation time is
  stepped explicitly instead of following the wall clock;
* frame digests computed over decoded RGBA pixels, independent of codecs;
* one protocol connection and one fresh page per job, so jobs cannot
  observe each other.

``BrowserRenderer`` drives a live DevTools endpoint.  ``ReplayRenderer``
serves previously recorded outcomes keyed by the digest of the HTML, which
lets scoring and reporting run in environments with no browser at all.
"""

from __future__ import annotations

import base64
import hashlib
import itertools
import json
import shutil
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Protocol, Sequence

from dcgkit.model import ErrorClass, RenderOutcome, RenderSettings, RenderStatus
from dcgkit.renderer.cdp import CdpClient, CdpCommandError, CdpConnectionError
from dcgkit.renderer.classify import classify_error
from dcgkit.renderer.encode import EncoderCommand, encode_video, resolve_encoder
from dcgkit.renderer.fileserver import FileServer, rewrite_external_scripts
from dcgkit.renderer.frames import (
    DEFAULT_BLANK_STD_THRESHOLD,
    decode_frame,
    frame_hash,
    frame_is_uniform,
)

_FAILURE_CLASSED = frozenset(
    {RenderStatus.SCRIPT_ERROR, RenderStatus.TIMEOUT, RenderStatus.LOAD_ERROR}
)


class RenderError(RuntimeError):
    """Infrastructure failure: endpoint unreachable, encoder broken, etc.

    Page-level failures never raise; they come back as a failed
    :class:`RenderOutcome` so batch runs keep going.
    """


class RenderProvider(Protocol):
    """Anything that can turn chart HTML into a :class:`RenderOutcome`."""

    def render(self, html: str, *, job_name: str | None = None) -> RenderOutcome: ...


@lru_cache(maxsize=1)
def _shim_source() -> str:
    ref = resources.files("dcgkit.renderer").joinpath("assets/virtual_clock_shim.js")
    return ref.read_text(encoding="utf-8")


def code_digest(html: str) -> str:
    """Stable identity of a chart document, used as the replay key."""
    return hashlib.sha256(html.encode("utf-8")).hexdigest()


@dataclass
class _JobLog:
    """Mutable per-job console state collected from protocol events."""

    console: list[str] = field(default_factory=list)
    exceptions: list[str] = field(default_factory=list)

    def absorb(self, events: Iterable[dict]) -> None:
        for event in events:
            method = event.get("method")
            params = event.get("params", {})
            if method == "Runtime.exceptionThrown":
                details = params.get("exceptionDetails", {})
                text = details.get("text") or "Uncaught exception"
                exception = details.get("exception") or {}
                description = exception.get("description")
                if description and description not in text:
                    message = f"{text}: {description.splitlines()[0]}"
                else:
                    message = text
                self.exceptions.append(message)
                self.console.append(message)
            elif method == "Runtime.consoleAPICalled":
                if params.get("type") in ("error", "assert"):
                    args = params.get("args", [])
                    rendered = " ".join(str(a.get("value", a.get("description", ""))) for a in args)
                    self.console.append(rendered or "console.error")


class BrowserRenderer:
    """Renders chart documents against a DevTools-compatible endpoint.

    Each job gets its own page (browser target) and its own WebSocket, so the
    renderer object is safe to share between threads.  HTML is served from a
    loopback HTTP origin rather than ``file://`` so relative URLs behave
    normally; script tags pointing at CDNs are rewritten to local copies when
    a vendored file with the same basename exists.
    """

    def __init__(
        self,
        endpoint: str,
        workdir: Path | str,
        settings: RenderSettings | None = None,
        *,
        vendor_dir: Path | str | None = None,
        encoder: EncoderCommand | None = None,
        blank_threshold: float = DEFAULT_BLANK_STD_THRESHOLD,
        keep_frames: bool = True,
    ):
        self.endpoint = endpoint
        self.settings = settings or RenderSettings()
        self.blank_threshold = blank_threshold
        self.keep_frames = keep_frames
        self._workdir = Path(workdir)
        self._www = self._workdir / "www"
        self._jobs_dir = self._workdir / "jobs"
        (self._www / "jobs").mkdir(parents=True, exist_ok=True)
        self._jobs_dir.mkdir(parents=True, exist_ok=True)
        self._vendor = self._www / "vendor"
        if vendor_dir is not None:
            self._vendor.mkdir(parents=True, exist_ok=True)
            for item in Path(vendor_dir).iterdir():
                if item.is_file():
                    shutil.copy2(item, self._vendor / item.name)
        self._encoder = encoder if encoder is not None else resolve_encoder()
        self._server = FileServer(self._www)
        self._job_counter = itertools.count(1)
        self._lock = threading.Lock()

    def close(self) -> None:
        self._server.close()

    def __enter__(self) -> "BrowserRenderer":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()

    # -- public API ---------------------------------------------------------

    def render(self, html: str, *, job_name: str | None = None) -> RenderOutcome:
        """Render one chart document; never raises for page-level failures."""
        name = job_name or self._next_name()
        prepared = rewrite_external_scripts(html, self._vendor)
        page_path = self._www / "jobs" / f"{name}.html"
        page_path.write_text(prepared, encoding="utf-8")
        try:
            return self._run_job(self._server.url_for(f"jobs/{name}.html"), name)
        finally:
            page_path.unlink(missing_ok=True)

    def render_url(self, url: str, *, job_name: str | None = None) -> RenderOutcome:
        """Render a page that is already reachable at ``url``."""
        return self._run_job(url, job_name or self._next_name())

    def render_many(
        self, htmls: Sequence[str], *, max_workers: int = 4
    ) -> list[RenderOutcome]:
        """Render a batch concurrently, preserving input order."""
        if not htmls:
            return []
        workers = max(1, min(max_workers, len(htmls)))
        with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="render") as pool:
            return list(pool.map(self.render, htmls))

    # -- internals ------------------------------------------------------------

    def _next_name(self) -> str:
        with self._lock:
            return f"job-{next(self._job_counter):06d}"

    def _job_dir(self, name: str) -> Path:
        path = self._jobs_dir / name
        if path.exists():
            shutil.rmtree(path)
        path.mkdir(parents=True)
        return path

    def _run_job(self, url: str, name: str) -> RenderOutcome:
        settings = self.settings
        deadline = time.monotonic() + settings.per_job_timeout
        job_dir = self._job_dir(name)
        frames_dir = job_dir / "frames"
        frames_dir.mkdir()
        log = _JobLog()
        target_id: str | None = None
        client: CdpClient | None = None
        try:
            client = CdpClient(self.endpoint)
        except CdpConnectionError as exc:
            raise RenderError(str(exc)) from exc
        try:
            target_id = client.call(
                "Target.createTarget", {"url": "about:blank"}, deadline=deadline
            )["targetId"]
            return self._drive_page(client, target_id, url, frames_dir, log, deadline)
        except TimeoutError:
            log.console.append(
                f"render exceeded the {settings.per_job_timeout:g}s job budget"
            )
            return self._failed(RenderStatus.TIMEOUT, frames_dir, log)
        except CdpCommandError as exc:
            raise RenderError(f"browser rejected a command: {exc}") from exc
        except CdpConnectionError as exc:
            raise RenderError(f"browser connection lost mid-job: {exc}") from exc
        finally:
            self._cleanup(client, target_id)

    def _drive_page(
        self,
        client: CdpClient,
        target_id: str,
        url: str,
        frames_dir: Path,
        log: _JobLog,
        deadline: float,
    ) -> RenderOutcome:
        settings = self.settings
        session = client.call(
            "Target.attachToTarget",
            {"targetId": target_id, "flatten": True},
            deadline=deadline,
        )["sessionId"]

        def cmd(method: str, params: dict | None = None) -> dict:
            return client.call(method, params, session_id=session, deadline=deadline)

        cmd("Page.enable")
        cmd("Runtime.enable")
        width, height = settings.viewport
        cmd(
            "Emulation.setDeviceMetricsOverride",
            {"width": width, "height": height, "deviceScaleFactor": 1, "mobile": False},
        )
        cmd("Page.addScriptToEvaluateOnNewDocument", {"source": _shim_source()})

        nav = cmd("Page.navigate", {"url": url})
        if nav.get("errorText"):
            log.console.append(f"navigation failed: {nav['errorText']}")
            return self._failed(RenderStatus.LOAD_ERROR, frames_dir, log)
        client.wait_for_event("Page.loadEventFired", session_id=session, deadline=deadline)
        log.absorb(client.drain_events(session_id=session))
        if log.exceptions:
            return self._failed(RenderStatus.SCRIPT_ERROR, frames_dir, log)

        probe = cmd(
            "Runtime.evaluate",
            {"expression": "typeof window.__vclock__ === 'object'", "returnByValue": True},
        )
        if probe.get("result", {}).get("value") is not True:
            log.console.append("virtual clock missing after load; page replaced harness globals")
            return self._failed(RenderStatus.SCRIPT_ERROR, frames_dir, log)

        hashes: list[str] = []
        all_uniform = True
        for index in range(settings.frame_count):
            virtual_ms = settings.settle_delay + index * 1000.0 / settings.fps
            step = cmd(
                "Runtime.evaluate",
                {"expression": f"window.__vclock__.advanceTo({virtual_ms!r})"},
            )
            if "exceptionDetails" in step:
                text = step["exceptionDetails"].get("text", "Uncaught exception")
                log.console.append(f"virtual clock step failed: {text}")
                log.exceptions.append(text)
                return self._failed(RenderStatus.SCRIPT_ERROR, frames_dir, log)
            shot = cmd("Page.captureScreenshot", {"format": "png"})
            png = base64.b64decode(shot["data"])
            (frames_dir / f"frame_{index:04d}.png").write_bytes(png)
            rgba = decode_frame(png)
            hashes.append(frame_hash(rgba))
            if all_uniform and not frame_is_uniform(rgba, self.blank_threshold):
                all_uniform = False
        log.absorb(client.drain_events(session_id=session))

        if all_uniform:
            return RenderOutcome(
                status=RenderStatus.BLANK,
                frames_dir=str(frames_dir),
                frame_hashes=tuple(hashes),
                console_errors=tuple(log.console),
            )
        try:
            video = encode_video(frames_dir, settings.fps, encoder=self._encoder)
        except Exception as exc:
            raise RenderError(f"video encoding failed: {exc}") from exc
        outcome = RenderOutcome(
            status=RenderStatus.RENDERED,
            frames_dir=str(frames_dir) if self.keep_frames else None,
            video_path=str(video),
            frame_hashes=tuple(hashes),
            console_errors=tuple(log.console),
        )
        if not self.keep_frames:
            shutil.rmtree(frames_dir, ignore_errors=True)
        return outcome

    def _failed(
        self, status: RenderStatus, frames_dir: Path, log: _JobLog
    ) -> RenderOutcome:
        has_frames = any(frames_dir.glob("frame_*.png"))
        return RenderOutcome(
            status=status,
            frames_dir=str(frames_dir) if has_frames else None,
            console_errors=tuple(log.console),
            error_class=(
                classify_error(log.console, status) if status in _FAILURE_CLASSED else None
            ),
        )

    def _cleanup(self, client: CdpClient | None, target_id: str | None) -> None:
        if client is None:
            return
        closed = False
        if target_id is not None:
            grace = time.monotonic() + 5.0
            try:
                client.call("Target.closeTarget", {"targetId": target_id}, deadline=grace)
                closed = True
            except (TimeoutError, CdpCommandError, CdpConnectionError):
                pass
        client.close()
        if target_id is not None and not closed:
            # The job socket wedged; close the stray page over a fresh one.
            try:
                with CdpClient(self.endpoint) as control:
                    control.call(
                        "Target.closeTarget",
                        {"targetId": target_id},
                        deadline=time.monotonic() + 5.0,
                    )
            except (TimeoutError, CdpCommandError, CdpConnectionError):
                pass


class RenderPool:
    """Bounded worker pool over a shared renderer.

    Keeps at most ``size`` jobs in flight; ``render_many`` preserves input
    order. The pool does not own the renderer unless asked to.
    """

    def __init__(self, renderer: BrowserRenderer, size: int = 4, *, own_renderer: bool = False):
        if size < 1:
            raise ValueError("pool size must be >= 1")
        self.renderer = renderer
        self._own = own_renderer
        self._executor = ThreadPoolExecutor(max_workers=size, thread_name_prefix="render-pool")

    def submit(self, html: str):
        return self._executor.submit(self.renderer.render, html)

    def render_many(self, htmls: Sequence[str]) -> list[RenderOutcome]:
        return list(self._executor.map(self.renderer.render, htmls))

    def close(self) -> None:
        self._executor.shutdown(wait=True)
        if self._own:
            self.renderer.close()

    def __enter__(self) -> "RenderPool":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()


class ReplayRenderer:
    """Serves recorded render outcomes keyed by HTML digest.

    The manifest is JSON: ``{"outcomes": {digest: outcome}, "media": {digest:
    relative_path}}``.  Media paths are resolved relative to the manifest, so
    a recorded corpus can be committed and replayed anywhere, including on
    machines with no browser and no encoder.
    """

    def __init__(self, manifest_path: Path | str):
        self._path = Path(manifest_path)
        try:
            raw = json.loads(self._path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise RenderError(f"replay manifest not found: {self._path}") from None
        except ValueError as exc:
            raise RenderError(f"replay manifest is not valid JSON: {self._path}") from exc
        self._outcomes: dict[str, dict] = raw.get("outcomes", {})
        self._media: dict[str, str] = raw.get("media", {})

    def render(self, html: str, *, job_name: str | None = None) -> RenderOutcome:
        digest = code_digest(html)
        entry = self._outcomes.get(digest)
        if entry is None:
            raise RenderError(
                f"no recorded outcome for digest {digest[:16]}...; "
                "re-record the replay manifest against a live endpoint"
            )
        outcome = RenderOutcome.from_dict(entry)
        media = self._media.get(digest)
        if media is not None:
            video = (self._path.parent / media).resolve()
            outcome = RenderOutcome(
                status=outcome.status,
                frames_dir=None,
                video_path=str(video),
                frame_hashes=outcome.frame_hashes,
                console_errors=outcome.console_errors,
                error_class=outcome.error_class,
            )
        return outcome

    @classmethod
    def record(
        cls,
        renderer: RenderProvider,
        htmls: Iterable[str],
        manifest_path: Path | str,
    ) -> "ReplayRenderer":
        """Render every document and persist outcomes next to their media."""
        manifest_path = Path(manifest_path)
        media_dir = manifest_path.parent / "media"
        outcomes: dict[str, dict] = {}
        media: dict[str, str] = {}
        for html in htmls:
            digest = code_digest(html)
            outcome = renderer.render(html)
            entry = outcome.to_dict()
            # Paths on the recording machine are meaningless elsewhere.
            entry["frames_dir"] = None
            entry["video_path"] = None
            outcomes[digest] = entry
            if outcome.video_path:
                media_dir.mkdir(parents=True, exist_ok=True)
                suffix = Path(outcome.video_path).suffix or ".webm"
                target = media_dir / f"{digest}{suffix}"
                shutil.copy2(outcome.video_path, target)
                media[digest] = str(target.relative_to(manifest_path.parent))
        manifest_path.parent.mkdir(parents=True, exist_ok=True)
        manifest_path.write_text(
            json.dumps({"outcomes": outcomes, "media": media}, indent=2, sort_keys=True),
            encoding="utf-8",
        )
        return cls(manifest_path)
