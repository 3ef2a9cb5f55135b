"""Human study domain: pairwise preference and curation vetting.

State lives in an append-only JSONL event log; the in-memory view is
rebuilt by replaying the log, so a service restart loses nothing.  Each
pairwise item shows two systems' videos for the same sample with a seeded
left/right shuffle; the presentation order is stored on the item and echoed
into every judgment so aggregates can report order effects.
"""

from __future__ import annotations

import json
import random
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Optional

from dcgkit.model import canonical_json


class StudyError(ValueError):
    """Base for study domain failures."""


class UnknownStudyError(StudyError):
    pass


class UnknownItemError(StudyError):
    pass


class UnknownAnnotatorError(StudyError):
    pass


class DuplicateJudgmentError(StudyError):
    pass


class StudyKind(str, Enum):
    PAIRWISE_PREFERENCE = "pairwise_preference"
    CURATION_VETTING = "curation_vetting"


PAIRWISE_CHOICES = frozenset({"left", "right", "tie"})
VETTING_CHOICES = frozenset({"approve", "reject"})


@dataclass(frozen=True, slots=True)
class StudyItem:
    """One decision unit: a video pair (pairwise) or one candidate (vetting)."""

    item_id: str
    sample_id: str
    kind: StudyKind
    left_system: Optional[str] = None
    right_system: Optional[str] = None
    left_video: Optional[str] = None
    right_video: Optional[str] = None
    video_path: Optional[str] = None
    html_code: Optional[str] = None

    def validate(self) -> None:
        if self.kind is StudyKind.PAIRWISE_PREFERENCE:
            if not (self.left_system and self.right_system and self.left_video and self.right_video):
                raise StudyError(f"item {self.item_id}: pairwise items need two systems and two videos")
            if self.left_system == self.right_system:
                raise StudyError(f"item {self.item_id}: both sides belong to {self.left_system!r}")
            if self.left_video == self.right_video:
                raise StudyError(f"item {self.item_id}: both sides show the same video")
        else:
            if not self.video_path:
                raise StudyError(f"item {self.item_id}: vetting items need a video")

    def to_dict(self) -> dict[str, Any]:
        return {
            "item_id": self.item_id,
            "sample_id": self.sample_id,
            "kind": self.kind.value,
            "left_system": self.left_system,
            "right_system": self.right_system,
            "left_video": self.left_video,
            "right_video": self.right_video,
            "video_path": self.video_path,
            "html_code": self.html_code,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "StudyItem":
        item = cls(
            item_id=d["item_id"],
            sample_id=d["sample_id"],
            kind=StudyKind(d["kind"]),
            left_system=d.get("left_system"),
            right_system=d.get("right_system"),
            left_video=d.get("left_video"),
            right_video=d.get("right_video"),
            video_path=d.get("video_path"),
            html_code=d.get("html_code"),
        )
        item.validate()
        return item


@dataclass(frozen=True, slots=True)
class Study:
    """A set of items shown to a roster of annotators."""

    id: str
    kind: StudyKind
    items: tuple[StudyItem, ...]
    systems: tuple[str, ...]
    annotators: tuple[str, ...]

    def validate(self) -> None:
        if not self.id:
            raise StudyError("study id must be non-empty")
        if not self.items:
            raise StudyError(f"study {self.id}: needs at least one item")
        if not self.annotators:
            raise StudyError(f"study {self.id}: needs at least one annotator")
        ids = [i.item_id for i in self.items]
        if len(set(ids)) != len(ids):
            raise StudyError(f"study {self.id}: duplicate item ids")
        for item in self.items:
            if item.kind is not self.kind:
                raise StudyError(f"study {self.id}: item {item.item_id} has kind {item.kind.value}")
            item.validate()
        if self.kind is StudyKind.PAIRWISE_PREFERENCE and len(self.systems) != 2:
            raise StudyError(f"study {self.id}: pairwise studies compare exactly 2 systems")

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "items": [i.to_dict() for i in self.items],
            "systems": list(self.systems),
            "annotators": list(self.annotators),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Study":
        study = cls(
            id=d["id"],
            kind=StudyKind(d["kind"]),
            items=tuple(StudyItem.from_dict(i) for i in d["items"]),
            systems=tuple(d["systems"]),
            annotators=tuple(d["annotators"]),
        )
        study.validate()
        return study


@dataclass(frozen=True, slots=True)
class Judgment:
    """One annotator's decision on one item."""

    item_id: str
    annotator_id: str
    choice: str
    reason: str = ""
    timestamp: float = 0.0
    presentation_order: Optional[str] = None  # system shown on the left

    def to_dict(self) -> dict[str, Any]:
        return {
            "item_id": self.item_id,
            "annotator_id": self.annotator_id,
            "choice": self.choice,
            "reason": self.reason,
            "timestamp": self.timestamp,
            "presentation_order": self.presentation_order,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Judgment":
        return cls(
            item_id=d["item_id"],
            annotator_id=d["annotator_id"],
            choice=d["choice"],
            reason=d.get("reason", ""),
            timestamp=d.get("timestamp", 0.0),
            presentation_order=d.get("presentation_order"),
        )


def create_pairwise_study(
    study_id: str,
    system_a: tuple[str, Mapping[str, str]],
    system_b: tuple[str, Mapping[str, str]],
    annotators: Iterable[str],
    *,
    rng_seed: int = 0,
) -> Study:
    """Pair up two systems' videos per shared sample, seeded left/right.

    Each system argument is (name, {sample_id: video_path}).  The two result
    sets must cover the same sample ids.
    """
    name_a, videos_a = system_a
    name_b, videos_b = system_b
    if name_a == name_b:
        raise StudyError("pairwise studies need two distinct system names")
    if set(videos_a) != set(videos_b):
        only_a = sorted(set(videos_a) - set(videos_b))[:5]
        only_b = sorted(set(videos_b) - set(videos_a))[:5]
        raise StudyError(
            f"sample-id mismatch between systems: only in {name_a}: {only_a}, "
            f"only in {name_b}: {only_b}"
        )
    if not videos_a:
        raise StudyError("pairwise study needs at least one shared sample")
    rng = random.Random(rng_seed)
    items = []
    for index, sample_id in enumerate(sorted(videos_a)):
        a_left = rng.random() < 0.5
        left, right = (name_a, name_b) if a_left else (name_b, name_a)
        left_video = videos_a[sample_id] if a_left else videos_b[sample_id]
        right_video = videos_b[sample_id] if a_left else videos_a[sample_id]
        items.append(
            StudyItem(
                item_id=f"{study_id}-i{index:04d}",
                sample_id=sample_id,
                kind=StudyKind.PAIRWISE_PREFERENCE,
                left_system=left,
                right_system=right,
                left_video=left_video,
                right_video=right_video,
            )
        )
    study = Study(
        id=study_id,
        kind=StudyKind.PAIRWISE_PREFERENCE,
        items=tuple(items),
        systems=(name_a, name_b),
        annotators=tuple(dict.fromkeys(annotators)),
    )
    study.validate()
    return study


def create_vetting_study(
    study_id: str,
    candidates: Iterable[tuple[str, str, str]],
    annotators: Iterable[str],
) -> Study:
    """Approve/reject queue over (sample_id, video_path, html_code) triples."""
    items = tuple(
        StudyItem(
            item_id=f"{study_id}-i{index:04d}",
            sample_id=sample_id,
            kind=StudyKind.CURATION_VETTING,
            video_path=video_path,
            html_code=html_code,
        )
        for index, (sample_id, video_path, html_code) in enumerate(candidates)
    )
    study = Study(
        id=study_id,
        kind=StudyKind.CURATION_VETTING,
        items=items,
        systems=(),
        annotators=tuple(dict.fromkeys(annotators)),
    )
    study.validate()
    return study


@dataclass(frozen=True, slots=True)
class SystemTally:
    """Win/loss/tie counts for one system, with order breakdown."""

    system: str
    wins: int
    losses: int
    ties: int
    wins_shown_left: int
    wins_shown_right: int

    @property
    def judgments(self) -> int:
        return self.wins + self.losses + self.ties

    @property
    def win_rate(self) -> Fraction:
        return Fraction(self.wins, self.judgments) if self.judgments else Fraction(0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "system": self.system,
            "wins": self.wins,
            "losses": self.losses,
            "ties": self.ties,
            "judgments": self.judgments,
            "win_rate": float(self.win_rate),
            "wins_shown_left": self.wins_shown_left,
            "wins_shown_right": self.wins_shown_right,
        }


class StudyStore:
    """Event-sourced study state: one JSONL log, replayed on startup."""

    def __init__(self, log_path: Path | str, *, clock: Callable[[], float] = time.time):
        self._log_path = Path(log_path)
        self._clock = clock
        self._lock = threading.RLock()
        self._studies: dict[str, Study] = {}
        self._judgments: dict[str, dict[tuple[str, str], Judgment]] = {}
        self._item_index: dict[str, dict[str, StudyItem]] = {}
        if self._log_path.exists():
            self._replay()

    # -- persistence ---------------------------------------------------------

    def _replay(self) -> None:
        for lineno, line in enumerate(
            self._log_path.read_text(encoding="utf-8").splitlines(), start=1
        ):
            if not line.strip():
                continue
            event = json.loads(line)
            kind = event.get("event")
            if kind == "study_created":
                self._apply_study(Study.from_dict(event["study"]))
            elif kind == "judgment":
                judgment = Judgment.from_dict(event["judgment"])
                study_id = event["study_id"]
                key = (judgment.item_id, judgment.annotator_id)
                self._judgments.setdefault(study_id, {})[key] = judgment
            else:
                raise StudyError(f"{self._log_path}:{lineno}: unknown event {kind!r}")

    def _append(self, event: dict[str, Any]) -> None:
        self._log_path.parent.mkdir(parents=True, exist_ok=True)
        with self._log_path.open("a", encoding="utf-8") as fh:
            fh.write(canonical_json(event) + "\n")
            fh.flush()

    def _apply_study(self, study: Study) -> None:
        self._studies[study.id] = study
        self._item_index[study.id] = {item.item_id: item for item in study.items}
        self._judgments.setdefault(study.id, {})

    # -- operations ----------------------------------------------------------

    def create(self, study: Study) -> Study:
        study.validate()
        with self._lock:
            if study.id in self._studies:
                raise StudyError(f"study {study.id!r} already exists")
            self._apply_study(study)
            self._append({"event": "study_created", "study": study.to_dict()})
        return study

    def get(self, study_id: str) -> Study:
        with self._lock:
            study = self._studies.get(study_id)
        if study is None:
            raise UnknownStudyError(f"unknown study {study_id!r}")
        return study

    def list_studies(self) -> list[Study]:
        with self._lock:
            return sorted(self._studies.values(), key=lambda s: s.id)

    def next_item(self, study_id: str, annotator_id: str) -> Optional[StudyItem]:
        """First unjudged item for this annotator; stable until judged."""
        study = self.get(study_id)
        if annotator_id not in study.annotators:
            raise UnknownAnnotatorError(
                f"annotator {annotator_id!r} is not enrolled in study {study_id!r}"
            )
        with self._lock:
            judged = self._judgments[study_id]
            for item in study.items:
                if (item.item_id, annotator_id) not in judged:
                    return item
        return None

    def record_judgment(
        self, study_id: str, item_id: str, annotator_id: str, choice: str, reason: str = ""
    ) -> Judgment:
        study = self.get(study_id)
        if annotator_id not in study.annotators:
            raise UnknownAnnotatorError(
                f"annotator {annotator_id!r} is not enrolled in study {study_id!r}"
            )
        item = self._item_index[study_id].get(item_id)
        if item is None:
            raise UnknownItemError(f"unknown item {item_id!r} in study {study_id!r}")
        allowed = (
            PAIRWISE_CHOICES if study.kind is StudyKind.PAIRWISE_PREFERENCE else VETTING_CHOICES
        )
        if choice not in allowed:
            raise StudyError(
                f"choice {choice!r} invalid for {study.kind.value}; allowed: {sorted(allowed)}"
            )
        if choice == "reject" and not reason.strip():
            raise StudyError("reject judgments need a reason")
        judgment = Judgment(
            item_id=item_id,
            annotator_id=annotator_id,
            choice=choice,
            reason=reason,
            timestamp=self._clock(),
            presentation_order=item.left_system,
        )
        with self._lock:
            key = (item_id, annotator_id)
            if key in self._judgments[study_id]:
                raise DuplicateJudgmentError(
                    f"annotator {annotator_id!r} already judged item {item_id!r}"
                )
            self._judgments[study_id][key] = judgment
            self._append(
                {"event": "judgment", "study_id": study_id, "judgment": judgment.to_dict()}
            )
        return judgment

    def judgments(self, study_id: str) -> list[Judgment]:
        self.get(study_id)
        with self._lock:
            return list(self._judgments[study_id].values())

    def progress(self, study_id: str) -> dict[str, Any]:
        study = self.get(study_id)
        with self._lock:
            done = len(self._judgments[study_id])
        return {
            "study_id": study_id,
            "items": len(study.items),
            "annotators": len(study.annotators),
            "judgments": done,
            "expected_judgments": len(study.items) * len(study.annotators),
        }

    def aggregate(self, study_id: str) -> dict[str, Any]:
        """Win-rate table (pairwise) or approval tally (vetting)."""
        study = self.get(study_id)
        judgments = self.judgments(study_id)
        if not judgments:
            raise StudyError(f"study {study_id!r} has no judgments to aggregate")
        items = self._item_index[study_id]
        if study.kind is StudyKind.CURATION_VETTING:
            approved = sum(1 for j in judgments if j.choice == "approve")
            rejected = [j for j in judgments if j.choice == "reject"]
            return {
                "study_id": study_id,
                "kind": study.kind.value,
                "judgments": len(judgments),
                "approved": approved,
                "rejected": len(rejected),
                "reject_reasons": sorted(j.reason for j in rejected),
            }

        tallies = {
            name: {"wins": 0, "losses": 0, "ties": 0, "wins_left": 0, "wins_right": 0}
            for name in study.systems
        }
        for judgment in judgments:
            item = items[judgment.item_id]
            assert item.left_system and item.right_system
            if judgment.choice == "tie":
                tallies[item.left_system]["ties"] += 1
                tallies[item.right_system]["ties"] += 1
                continue
            winner = item.left_system if judgment.choice == "left" else item.right_system
            loser = item.right_system if judgment.choice == "left" else item.left_system
            tallies[winner]["wins"] += 1
            tallies[loser]["losses"] += 1
            side = "wins_left" if winner == item.left_system else "wins_right"
            tallies[winner][side] += 1
        table = [
            SystemTally(
                system=name,
                wins=t["wins"],
                losses=t["losses"],
                ties=t["ties"],
                wins_shown_left=t["wins_left"],
                wins_shown_right=t["wins_right"],
            )
            for name, t in tallies.items()
        ]
        table.sort(key=lambda t: t.system)
        return {
            "study_id": study_id,
            "kind": study.kind.value,
            "judgments": len(judgments),
            "systems": [t.to_dict() for t in table],
        }
