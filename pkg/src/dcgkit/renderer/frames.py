"""Frame-level analysis: digests over raw pixels and blank detection.

Hashes are computed on decoded RGBA bytes, not on encoded files, so the
determinism guarantee is independent of any codec or PNG writer quirks.
"""

from __future__ import annotations

import hashlib
import re
from io import BytesIO
from pathlib import Path

import numpy as np
from PIL import Image

#: A frame whose per-channel pixel standard deviation stays below this (8-bit
#: scale) on every channel is considered uniform. Calibrated on the fixture
#: set; imperceptible noise (std ~0.5) still counts as blank.
DEFAULT_BLANK_STD_THRESHOLD = 2.0

_FRAME_RE = re.compile(r"^frame_(\d{4})\.png$")


def decode_frame(png_bytes: bytes) -> np.ndarray:
    """Decode PNG bytes to an HxWx4 uint8 RGBA array."""
    with Image.open(BytesIO(png_bytes)) as img:
        return np.asarray(img.convert("RGBA"), dtype=np.uint8)


def frame_hash(rgba: np.ndarray) -> str:
    """SHA-256 over raw RGBA bytes."""
    return hashlib.sha256(np.ascontiguousarray(rgba).tobytes()).hexdigest()


def list_frames(frames_dir: Path | str) -> list[Path]:
    """Frame files in index order. Does not check contiguity (encode does)."""
    frames_dir = Path(frames_dir)
    found = []
    for entry in frames_dir.iterdir():
        match = _FRAME_RE.match(entry.name)
        if match:
            found.append((int(match.group(1)), entry))
    return [path for _, path in sorted(found)]


def frame_is_uniform(rgba: np.ndarray, threshold: float = DEFAULT_BLANK_STD_THRESHOLD) -> bool:
    stds = rgba.reshape(-1, rgba.shape[-1]).astype(np.float64).std(axis=0)
    return bool(stds.max() < threshold)


def detect_blank(frames_dir: Path | str, threshold: float = DEFAULT_BLANK_STD_THRESHOLD) -> bool:
    """True iff every frame in the directory is uniform within tolerance.

    Monotone in the threshold: raising it can only turn more frames uniform,
    never fewer, so a blank verdict never flips back.
    """
    frames = list_frames(frames_dir)
    if not frames:
        raise FileNotFoundError(f"no frames found in {frames_dir}")
    for path in frames:
        try:
            rgba = decode_frame(path.read_bytes())
        except Exception as exc:
            raise ValueError(f"undecodable frame {path.name}: {exc}") from exc
        if not frame_is_uniform(rgba, threshold):
            return False
    return True
