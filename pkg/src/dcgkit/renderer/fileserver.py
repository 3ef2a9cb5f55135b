"""Loopback static file server backing render jobs.

Pages are always navigated to an ``http://`` origin rather than ``file://``
so relative script URLs and same-origin rules behave the way they will in
production.  The server binds an ephemeral port on localhost and serves a
single root directory.
"""

from __future__ import annotations

import http.server
import re
import threading
from functools import partial
from pathlib import Path

_SRC_RE = re.compile(r"(<script\b[^>]*?\bsrc\s*=\s*)([\"'])([^\"']+)\2", re.IGNORECASE)


class _QuietHandler(http.server.SimpleHTTPRequestHandler):
    def log_message(self, format: str, *args: object) -> None:  # noqa: A002
        pass


class FileServer:
    """Threaded static server over one directory; context manager."""

    def __init__(self, root: Path, *, host: str = "127.0.0.1"):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        handler = partial(_QuietHandler, directory=str(self.root))
        self._httpd = http.server.ThreadingHTTPServer((host, 0), handler)
        self._httpd.daemon_threads = True
        self._thread = threading.Thread(
            target=self._httpd.serve_forever, name="render-fileserver", daemon=True
        )
        self._thread.start()

    @property
    def base_url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def url_for(self, relative: str | Path) -> str:
        rel = str(relative).replace("\\", "/").lstrip("/")
        return f"{self.base_url}/{rel}"

    def close(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        self._thread.join(timeout=5)

    def __enter__(self) -> "FileServer":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()


def rewrite_external_scripts(html: str, vendor_dir: Path, *, prefix: str = "/vendor") -> str:
    """Point CDN script tags at locally vendored copies when available.

    A ``src`` whose basename matches a file in ``vendor_dir`` is rewritten to
    ``{prefix}/{basename}``; everything else is left alone, including inline
    scripts and unknown libraries.
    """
    vendor_dir = Path(vendor_dir)
    if not vendor_dir.is_dir():
        return html

    def replace(match: re.Match[str]) -> str:
        src = match.group(3)
        if not src.lower().startswith(("http://", "https://", "//")):
            return match.group(0)
        basename = src.rsplit("/", 1)[-1].split("?")[0].split("#")[0]
        if basename and (vendor_dir / basename).is_file():
            return f"{match.group(1)}{match.group(2)}{prefix}/{basename}{match.group(2)}"
        return match.group(0)

    return _SRC_RE.sub(replace, html)
