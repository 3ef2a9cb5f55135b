"""Fallback frame-sequence encoder: WebM/VP8 via OpenCV's bundled codecs.

Invoked as a subprocess (``python -m dcgkit.renderer.frame_encoder``) so it
honors the same external-encoder contract as ffmpeg. Used where ffmpeg is
not installed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="Encode frame_%04d.png into a WebM video")
    parser.add_argument("--fps", type=int, required=True)
    parser.add_argument("--frames", required=True, help="printf-style frame pattern")
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)

    import cv2

    frames: list[Path] = []
    index = 0
    while True:
        candidate = Path(args.frames % index)
        if not candidate.exists():
            break
        frames.append(candidate)
        index += 1
    if not frames:
        print(f"no frames matching {args.frames}", file=sys.stderr)
        return 2

    first = cv2.imread(str(frames[0]))
    if first is None:
        print(f"cannot decode {frames[0]}", file=sys.stderr)
        return 2
    height, width = first.shape[:2]
    writer = cv2.VideoWriter(
        args.out, cv2.VideoWriter_fourcc(*"VP80"), float(args.fps), (width, height)
    )
    if not writer.isOpened():
        print("VP8 encoder unavailable in this OpenCV build", file=sys.stderr)
        return 2
    try:
        for path in frames:
            image = cv2.imread(str(path))
            if image is None:
                print(f"cannot decode {path}", file=sys.stderr)
                return 2
            writer.write(image)
    finally:
        writer.release()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
