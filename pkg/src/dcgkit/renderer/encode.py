"""Frame sequence to video via an external encoder subprocess.

The encoder is a command template with ``{fps}``, ``{frames}``, and ``{out}``
placeholders. Resolution order:

1. an explicitly configured command,
2. ``ffmpeg`` on PATH (production default),
3. the packaged fallback encoder (``python -m dcgkit.renderer.frame_encoder``,
   WebM/VP8 via OpenCV's bundled codecs).

Output container defaults to WebM so the annotation UI can play results in any
browser. The chosen encoder is recorded in report metadata.
"""

from __future__ import annotations

import shutil
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path

from .frames import list_frames

VIDEO_EXT = "webm"


class EncoderMissingError(RuntimeError):
    pass


class EncoderFailedError(RuntimeError):
    pass


class FrameSequenceError(ValueError):
    """Frame files are missing or non-contiguous; raised before any encoding."""


@dataclass(frozen=True)
class EncoderCommand:
    name: str
    argv_template: tuple[str, ...]

    def argv(self, fps: int, frames_pattern: str, out_path: str) -> list[str]:
        return [
            part.format(fps=fps, frames=frames_pattern, out=out_path)
            for part in self.argv_template
        ]


FFMPEG_COMMAND = EncoderCommand(
    name="ffmpeg",
    argv_template=(
        "ffmpeg",
        "-y",
        "-framerate",
        "{fps}",
        "-i",
        "{frames}",
        "-an",
        "-c:v",
        "libvpx",
        "-pix_fmt",
        "yuv420p",
        "-b:v",
        "1M",
        "{out}",
    ),
)

FALLBACK_COMMAND = EncoderCommand(
    name="dcgkit-frame-encoder",
    argv_template=(
        sys.executable,
        "-m",
        "dcgkit.renderer.frame_encoder",
        "--fps",
        "{fps}",
        "--frames",
        "{frames}",
        "--out",
        "{out}",
    ),
)


def _have_cv2() -> bool:
    try:
        import cv2  # noqa: F401
    except ImportError:
        return False
    return True


def resolve_encoder(configured: list[str] | None = None) -> EncoderCommand:
    """Pick the encoder command to use, or raise naming the missing binary."""
    if configured:
        binary = configured[0]
        if shutil.which(binary) is None and not Path(binary).exists():
            raise EncoderMissingError(
                f"configured encoder binary {binary!r} not found; install it or "
                "change renderer.encoder"
            )
        return EncoderCommand(name=Path(binary).name, argv_template=tuple(configured))
    if shutil.which("ffmpeg"):
        return FFMPEG_COMMAND
    if _have_cv2():
        return FALLBACK_COMMAND
    raise EncoderMissingError(
        "no video encoder available: 'ffmpeg' is not on PATH and the bundled "
        "fallback needs opencv-python-headless; install ffmpeg or set "
        "renderer.encoder"
    )


def encode_video(
    frames_dir: Path | str,
    fps: int,
    out_path: Path | str | None = None,
    encoder: EncoderCommand | None = None,
) -> Path:
    """Encode ``frame_%04d.png`` under ``frames_dir`` into a video.

    The sequence must be contiguous from frame 0; gaps abort before the
    encoder is invoked.
    """
    frames_dir = Path(frames_dir)
    frames = list_frames(frames_dir)
    if not frames:
        raise FrameSequenceError(f"no frames in {frames_dir}")
    for index, path in enumerate(frames):
        expected = f"frame_{index:04d}.png"
        if path.name != expected:
            raise FrameSequenceError(
                f"frame sequence has a gap: expected {expected}, found {path.name}"
            )
    if out_path is None:
        out_path = frames_dir.parent / f"video.{VIDEO_EXT}"
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    if encoder is None:
        encoder = resolve_encoder()
    argv = encoder.argv(fps, str(frames_dir / "frame_%04d.png"), str(out_path))
    proc = subprocess.run(argv, capture_output=True, text=True)
    if proc.returncode != 0:
        tail = (proc.stderr or proc.stdout or "").strip().splitlines()[-5:]
        raise EncoderFailedError(
            f"encoder {encoder.name} exited {proc.returncode}: " + " | ".join(tail)
        )
    if not out_path.exists():
        raise EncoderFailedError(f"encoder {encoder.name} produced no output file")
    return out_path
