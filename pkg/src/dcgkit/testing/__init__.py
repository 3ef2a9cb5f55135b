"""Test doubles for the rendering and scoring stack.

The headless render pipeline speaks the DevTools wire protocol to whatever
endpoint it is pointed at.  :class:`MockBrowser` provides such an endpoint
without a real browser: a small Node server with deterministic pages, a
software canvas, and a pinned build string, so frame digests are stable
across runs and machines.
"""

from dcgkit.testing.browser import MockBrowser, MockBrowserError, node_available

__all__ = ["MockBrowser", "MockBrowserError", "node_available"]
