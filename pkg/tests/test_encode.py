"""Frame-sequence encoding and encoder discovery."""

from __future__ import annotations

import io

import numpy as np
import pytest
from PIL import Image

from dcgkit.renderer.encode import (
    EncoderCommand,
    EncoderFailedError,
    EncoderMissingError,
    FrameSequenceError,
    encode_video,
    resolve_encoder,
)


def write_frames(tmp_path, count=6, size=(64, 48)):
    for i in range(count):
        frame = np.zeros((size[1], size[0], 4), dtype=np.uint8)
        frame[:, :, 0] = (i * 40) % 256
        frame[:, :, 3] = 255
        buffer = io.BytesIO()
        Image.fromarray(frame, "RGBA").save(buffer, "PNG")
        (tmp_path / f"frame_{i:04d}.png").write_bytes(buffer.getvalue())


def test_resolve_encoder_finds_something_usable():
    encoder = resolve_encoder()
    assert encoder.name


def test_resolve_encoder_rejects_missing_binary():
    with pytest.raises(EncoderMissingError):
        resolve_encoder(["definitely-not-a-real-encoder-binary", "{frames}", "{out}"])


def test_encode_produces_a_playable_video(tmp_path):
    write_frames(tmp_path)
    out = encode_video(tmp_path, fps=24)
    assert out.is_file()
    assert out.suffix == ".webm"
    assert out.stat().st_size > 0
    import cv2

    capture = cv2.VideoCapture(str(out))
    try:
        frames = 0
        while True:
            ok, _ = capture.read()
            if not ok:
                break
            frames += 1
    finally:
        capture.release()
    assert frames == 6


def test_encode_requires_frames(tmp_path):
    with pytest.raises(FrameSequenceError):
        encode_video(tmp_path, fps=24)


def test_encode_surfaces_command_failures(tmp_path):
    write_frames(tmp_path, count=2)
    broken = EncoderCommand(
        name="false-encoder", argv_template=("/bin/false", "{frames}", "{out}")
    )
    with pytest.raises(EncoderFailedError):
        encode_video(tmp_path, fps=24, encoder=broken)
