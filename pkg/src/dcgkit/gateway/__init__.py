"""Uniform client layer over text/vision model backends.

Used in two roles: as the generator during dataset curation and as the
judge during scoring.  Ships a scripted mock backend so every downstream
metric can be made bit-reproducible in tests and offline runs.
"""

from dcgkit.gateway.client import (
    Artifact,
    CodeArtifact,
    Gateway,
    JudgeVerdict,
    VideoArtifact,
    extract_video_frames,
    parse_verdict,
)
from dcgkit.gateway.core import (
    AuthError,
    Backend,
    BudgetExceededError,
    CapabilityError,
    GatewayError,
    ImagePart,
    ModelRequest,
    RetryExhaustedError,
    TextPart,
    TransientBackendError,
    UnknownBackendError,
    UserPart,
    VideoPart,
)
from dcgkit.gateway.http import HttpBackend
from dcgkit.gateway.mock import EchoBackend, MockBackend

__all__ = [
    "Artifact",
    "AuthError",
    "Backend",
    "BudgetExceededError",
    "CapabilityError",
    "CodeArtifact",
    "Gateway",
    "GatewayError",
    "HttpBackend",
    "ImagePart",
    "JudgeVerdict",
    "EchoBackend",
    "MockBackend",
    "ModelRequest",
    "RetryExhaustedError",
    "TextPart",
    "TransientBackendError",
    "UnknownBackendError",
    "UserPart",
    "VideoArtifact",
    "VideoPart",
    "extract_video_frames",
    "parse_verdict",
]
