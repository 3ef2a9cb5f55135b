"""Four-stage dataset construction pipeline with stage files on disk.

Stage files, all JSONL with canonical key order so reruns are byte-identical::

    stage1_seeds.jsonl       renderable seed templates
    stage2_candidates.jsonl  modified candidates (generator rewrites)
    stage3_described.jsonl   rendered + described candidates, media copied
    dataset/{split}.jsonl    final samples with QA sets and splits
    rejections.jsonl         everything dropped, tagged by stage, with audit info

Each stage rewrites its own outputs wholesale and replaces only its own
records in the rejection report, so rerunning a stage with identical inputs
and seeds leaves every byte unchanged.
"""

from __future__ import annotations

import hashlib
import json
import logging
import shutil
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

from dcgkit.curation.generate import (
    CurationError,
    apply_modifications,
    describe,
    generate_qa,
)
from dcgkit.curation.pool import load_modification_pool, sample_modifications
from dcgkit.curation.splits import DEFAULT_SPLIT_RATIOS, assign_splits
from dcgkit.dataset import save_dataset
from dcgkit.gateway import Gateway
from dcgkit.model import (
    ChartSample,
    ModificationSpec,
    Provenance,
    RenderOutcome,
    RenderStatus,
    Split,
    canonical_json,
)
from dcgkit.renderer.pipeline import RenderProvider

logger = logging.getLogger(__name__)

STAGE_ORDER = ("ingest", "modify", "render", "describe", "qa")


class PipelineError(RuntimeError):
    """A stage cannot run: bad inputs or missing upstream files."""


@dataclass(frozen=True, slots=True)
class SeedTemplate:
    """A cleaned seed chart: id, chart type label, and the document itself."""

    template_id: str
    chart_type: str
    html_code: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "template_id": self.template_id,
            "chart_type": self.chart_type,
            "html_code": self.html_code,
        }


@dataclass(frozen=True, slots=True)
class Rejection:
    """One dropped item: which stage dropped it and why."""

    stage: str
    id: str
    reason: str
    outcome: Optional[RenderOutcome] = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "stage": self.stage,
            "id": self.id,
            "reason": self.reason,
            "outcome": self.outcome.to_dict() if self.outcome else None,
        }


@dataclass(frozen=True, slots=True)
class StagePaths:
    """Canonical locations of every pipeline artifact under one root."""

    root: Path

    @property
    def stage1(self) -> Path:
        return self.root / "stage1_seeds.jsonl"

    @property
    def stage2(self) -> Path:
        return self.root / "stage2_candidates.jsonl"

    @property
    def stage3(self) -> Path:
        return self.root / "stage3_described.jsonl"

    @property
    def dataset_dir(self) -> Path:
        return self.root / "dataset"

    @property
    def media_dir(self) -> Path:
        return self.dataset_dir / "media"

    @property
    def rejections(self) -> Path:
        return self.root / "rejections.jsonl"


def _write_jsonl(path: Path, records: Sequence[Mapping[str, Any]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        "".join(canonical_json(dict(r)) + "\n" for r in records), encoding="utf-8"
    )


def _read_jsonl(path: Path) -> list[dict[str, Any]]:
    if not path.exists():
        raise PipelineError(f"missing stage file: {path} (run the previous stage first)")
    records = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise PipelineError(f"{path}:{lineno}: malformed JSON: {exc.msg}") from None
    return records


def update_rejections(path: Path, stage: str, rejections: Sequence[Rejection]) -> None:
    """Replace one stage's records in the rejection report, keep the rest."""
    if stage not in STAGE_ORDER:
        raise ValueError(f"unknown stage {stage!r}")
    existing = _read_jsonl(path) if path.exists() else []
    kept = [r for r in existing if r.get("stage") != stage]
    merged = kept + [r.to_dict() for r in rejections]
    merged.sort(key=lambda r: (STAGE_ORDER.index(r["stage"]), r["id"]))
    _write_jsonl(path, merged)


def _candidate_seed(rng_seed: int, template_id: str, index: int) -> int:
    """Stable per-candidate RNG seed derived from the run seed."""
    digest = hashlib.sha256(f"{rng_seed}:{template_id}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


# -- stage 1: seed ingestion -------------------------------------------------


def ingest_seeds(
    seed_dir: Path | str,
    renderer: RenderProvider,
) -> tuple[list[SeedTemplate], list[Rejection]]:
    """Load seeds plus their category manifest; keep only renderable ones.

    The directory must contain ``manifest.json`` mapping each HTML filename
    to its chart type. Failures are reported, never silently dropped.
    """
    seed_dir = Path(seed_dir)
    if not seed_dir.is_dir():
        raise PipelineError(f"seed directory does not exist: {seed_dir}")
    manifest_path = seed_dir / "manifest.json"
    if not manifest_path.exists():
        raise PipelineError(f"missing category manifest: {manifest_path}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    files = sorted(seed_dir.glob("*.html"))
    if not files:
        raise PipelineError(f"no seed templates in {seed_dir}")

    templates: list[SeedTemplate] = []
    rejections: list[Rejection] = []
    for file in files:
        chart_type = manifest.get(file.name) or manifest.get(file.stem)
        if not chart_type:
            raise PipelineError(f"seed {file.name} has no chart type in the manifest")
        html = file.read_text(encoding="utf-8")
        outcome = renderer.render(html, job_name=f"seed-{file.stem}")
        if outcome.status is RenderStatus.RENDERED:
            templates.append(
                SeedTemplate(template_id=file.stem, chart_type=chart_type, html_code=html)
            )
        else:
            rejections.append(
                Rejection(
                    stage="ingest",
                    id=file.stem,
                    reason=f"seed failed to render: {outcome.status.value}",
                    outcome=outcome,
                )
            )
    return templates, rejections


def run_stage1(
    seed_dir: Path | str,
    renderer: RenderProvider,
    paths: StagePaths,
) -> tuple[int, int]:
    """Write stage1_seeds.jsonl; returns (kept, rejected) counts."""
    templates, rejections = ingest_seeds(seed_dir, renderer)
    templates.sort(key=lambda t: t.template_id)
    _write_jsonl(paths.stage1, [t.to_dict() for t in templates])
    update_rejections(paths.rejections, "ingest", rejections)
    return len(templates), len(rejections)


# -- stage 2: modification application ---------------------------------------


def run_stage2(
    paths: StagePaths,
    gateway: Gateway,
    generator_backend: str,
    *,
    rng_seed: int = 0,
    candidates_per_seed: int = 2,
    pool_path: Optional[Path | str] = None,
) -> tuple[int, int]:
    """Sample modifications per seed and apply them with the generator."""
    if candidates_per_seed < 1:
        raise ValueError("candidates_per_seed must be >= 1")
    pool = load_modification_pool(pool_path)
    seeds = _read_jsonl(paths.stage1)
    candidates: list[dict[str, Any]] = []
    rejections: list[Rejection] = []
    for seed in seeds:
        for index in range(candidates_per_seed):
            candidate_id = f"{seed['template_id']}-m{index:02d}"
            mods = sample_modifications(
                _candidate_seed(rng_seed, seed["template_id"], index), pool
            )
            try:
                html = apply_modifications(
                    seed["html_code"], mods, gateway, generator_backend
                )
            except CurationError as exc:
                rejections.append(Rejection(stage="modify", id=candidate_id, reason=str(exc)))
                continue
            candidates.append(
                {
                    "candidate_id": candidate_id,
                    "seed_template_id": seed["template_id"],
                    "chart_type": seed["chart_type"],
                    "html_code": html,
                    "modifications": [m.to_dict() for m in mods],
                }
            )
    candidates.sort(key=lambda c: c["candidate_id"])
    _write_jsonl(paths.stage2, candidates)
    update_rejections(paths.rejections, "modify", rejections)
    return len(candidates), len(rejections)


# -- stage 3: render, filter, describe ----------------------------------------


def filter_renderable(
    candidates: Sequence[Mapping[str, Any]],
    renderer: RenderProvider,
) -> tuple[list[tuple[dict[str, Any], RenderOutcome]], list[tuple[dict[str, Any], RenderOutcome]]]:
    """Split candidates into (kept, rejected) by render outcome.

    Kept means status rendered; any other status (including blank) carries
    its full outcome into the rejected list for audit.
    """
    kept: list[tuple[dict[str, Any], RenderOutcome]] = []
    rejected: list[tuple[dict[str, Any], RenderOutcome]] = []
    for candidate in candidates:
        outcome = renderer.render(
            candidate["html_code"], job_name=f"cand-{candidate['candidate_id']}"
        )
        if outcome.status is RenderStatus.RENDERED:
            kept.append((dict(candidate), outcome))
        else:
            rejected.append((dict(candidate), outcome))
    return kept, rejected


def run_stage3(
    paths: StagePaths,
    renderer: RenderProvider,
    gateway: Gateway,
    generator_backend: str,
    *,
    workdir: Optional[Path] = None,
) -> tuple[int, int]:
    """Render every candidate, copy media, and describe the keepers."""
    candidates = _read_jsonl(paths.stage2)
    kept, render_rejected = filter_renderable(candidates, renderer)
    rejections = [
        Rejection(
            stage="render",
            id=candidate["candidate_id"],
            reason=f"candidate failed to render: {outcome.status.value}",
            outcome=outcome,
        )
        for candidate, outcome in render_rejected
    ]

    described: list[dict[str, Any]] = []
    describe_rejections: list[Rejection] = []
    for candidate, outcome in kept:
        candidate_id = candidate["candidate_id"]
        if not outcome.video_path:
            raise PipelineError(f"rendered candidate {candidate_id} has no video")
        media_rel = f"media/{candidate_id}/reference.webm"
        media_abs = paths.dataset_dir / media_rel
        media_abs.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(outcome.video_path, media_abs)
        try:
            detailed, simple, data = describe(
                candidate["html_code"],
                media_abs,
                gateway,
                generator_backend,
                workdir=workdir,
            )
        except CurationError as exc:
            describe_rejections.append(
                Rejection(stage="describe", id=candidate_id, reason=str(exc))
            )
            continue
        record = dict(candidate)
        record.update(
            {
                "video_path": media_rel,
                "detailed_desc": detailed,
                "simple_desc": simple,
                "data_sequence": data,
            }
        )
        described.append(record)

    described.sort(key=lambda r: r["candidate_id"])
    _write_jsonl(paths.stage3, described)
    update_rejections(paths.rejections, "render", rejections)
    update_rejections(paths.rejections, "describe", describe_rejections)
    return len(described), len(rejections) + len(describe_rejections)


# -- stage 4: QA generation and split assignment -------------------------------


def run_stage4(
    paths: StagePaths,
    gateway: Gateway,
    generator_backend: str,
    *,
    ratios: Optional[Mapping[Split, float]] = None,
    rng_seed: int = 0,
    workdir: Optional[Path] = None,
) -> dict[str, int]:
    """Generate QA sets, assign splits, and write the final dataset files."""
    records = _read_jsonl(paths.stage3)
    samples: list[ChartSample] = []
    rejections: list[Rejection] = []
    for record in records:
        candidate_id = record["candidate_id"]
        video_abs = paths.dataset_dir / record["video_path"]
        try:
            qa_code, qa_video = generate_qa(
                record["html_code"],
                video_abs,
                gateway,
                generator_backend,
                workdir=workdir,
            )
        except CurationError as exc:
            rejections.append(Rejection(stage="qa", id=candidate_id, reason=str(exc)))
            continue
        samples.append(
            ChartSample(
                id=candidate_id,
                split=Split.TRAIN_SFT,  # placeholder until assignment below
                chart_type=record["chart_type"],
                html_code=record["html_code"],
                video_path=record["video_path"],
                detailed_desc=record["detailed_desc"],
                simple_desc=record["simple_desc"],
                data_sequence=record["data_sequence"],
                qa_code=qa_code,
                qa_video=qa_video,
                provenance=Provenance(
                    seed_template_id=record["seed_template_id"],
                    modifications=tuple(
                        ModificationSpec.from_dict(m) for m in record["modifications"]
                    ),
                ),
            )
        )

    assigned = assign_splits(samples, ratios or DEFAULT_SPLIT_RATIOS, rng_seed=rng_seed)
    counts: dict[str, int] = {}
    for split in Split:
        members = sorted(
            (s for s in assigned if s.split is split), key=lambda s: s.id
        )
        counts[split.value] = len(members)
        save_dataset(members, paths.dataset_dir / f"{split.value}.jsonl")
    update_rejections(paths.rejections, "qa", rejections)
    counts["rejected"] = len(rejections)
    return counts
