"""Deterministic chart-HTML rendering: virtual-clock frame capture over the
browser debugging protocol, blank detection, video encoding, and error
classification."""

from .classify import classify_error
from .extract import extract_code
from .frames import detect_blank, frame_hash
from .encode import EncoderMissingError, FrameSequenceError, encode_video, resolve_encoder
from .pipeline import BrowserRenderer, RenderError, RenderPool, ReplayRenderer

__all__ = [
    "BrowserRenderer",
    "EncoderMissingError",
    "FrameSequenceError",
    "RenderError",
    "RenderPool",
    "ReplayRenderer",
    "classify_error",
    "detect_blank",
    "encode_video",
    "extract_code",
    "frame_hash",
    "resolve_encoder",
]
