"""HTTP reward service for training loops.

``POST /v1/rewards`` scores one rollout group and returns rewards plus
group-normalized advantages.  A bounded admission semaphore caps in-flight
batches; when the cap is hit the service answers 429 immediately so the
trainer backs off instead of piling work onto the renderer.
"""

from __future__ import annotations

import logging
import threading
from pathlib import Path
from typing import Iterable, Optional

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from dcgkit.gateway import Gateway
from dcgkit.model import ChartSample
from dcgkit.renderer.pipeline import RenderProvider
from dcgkit.reward.engine import RewardBatchError, RewardConfig, reward_batch

logger = logging.getLogger(__name__)


class RewardRequest(BaseModel):
    query_id: str
    rollouts: list[str]


class _Admission:
    """Non-blocking admission gate around a fixed batch budget."""

    def __init__(self, limit: int) -> None:
        if limit < 1:
            raise ValueError("max_in_flight must be >= 1")
        self.limit = limit
        self._lock = threading.Lock()
        self._active = 0

    def try_enter(self) -> bool:
        with self._lock:
            if self._active >= self.limit:
                return False
            self._active += 1
            return True

    def leave(self) -> None:
        with self._lock:
            self._active -= 1

    @property
    def active(self) -> int:
        with self._lock:
            return self._active


def create_reward_app(
    samples: Iterable[ChartSample],
    gateway: Gateway,
    renderer: RenderProvider,
    config: Optional[RewardConfig] = None,
    *,
    max_in_flight: int = 4,
    workers_per_batch: int = 4,
    judge_workdir: Path | None = None,
) -> FastAPI:
    """Build the reward app over a dataset index keyed by sample id.

    At most ``max_in_flight * workers_per_batch`` renders run at once.
    In-flight batches finish during shutdown because the server drains its
    worker threads before exiting.
    """
    cfg = config or RewardConfig()
    index = {sample.id: sample for sample in samples}
    if not index:
        raise ValueError("reward service needs at least one sample")
    admission = _Admission(max_in_flight)
    app = FastAPI(title="dcgkit reward service")

    @app.get("/v1/health")
    def health() -> dict:
        return {
            "status": "ok",
            "in_flight": admission.active,
            "max_in_flight": admission.limit,
            "group_size": cfg.group_size,
            "queries": len(index),
        }

    @app.post("/v1/rewards")
    def rewards(request: RewardRequest) -> JSONResponse:
        sample = index.get(request.query_id)
        if sample is None:
            return JSONResponse(
                status_code=404,
                content={"error": f"unknown query_id {request.query_id!r}"},
            )
        if len(request.rollouts) != cfg.group_size:
            return JSONResponse(
                status_code=400,
                content={
                    "error": (
                        f"expected {cfg.group_size} rollouts per group, "
                        f"got {len(request.rollouts)}"
                    )
                },
            )
        if not admission.try_enter():
            return JSONResponse(
                status_code=429,
                content={"error": "reward queue full, retry later"},
                headers={"Retry-After": "1"},
            )
        try:
            group = reward_batch(
                sample,
                request.rollouts,
                cfg,
                gateway,
                renderer,
                max_workers=workers_per_batch,
                judge_workdir=judge_workdir,
            )
        except RewardBatchError as exc:
            logger.error("reward batch for %s failed: %s", request.query_id, exc)
            return JSONResponse(status_code=503, content={"error": str(exc)})
        except Exception as exc:  # pragma: no cover - defensive
            logger.exception("unexpected reward failure for %s", request.query_id)
            return JSONResponse(status_code=500, content={"error": str(exc)})
        finally:
            admission.leave()
        return JSONResponse(status_code=200, content=group.to_dict())

    return app


def serve_rewards(app: FastAPI, host: str = "127.0.0.1", port: int = 8700) -> None:
    """Run the reward app under uvicorn until interrupted."""
    import uvicorn

    uvicorn.run(app, host=host, port=port, log_level="warning")
