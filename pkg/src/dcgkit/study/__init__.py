"""Pairwise preference and vetting studies with an event-sourced store."""

from dcgkit.study.core import (
    DuplicateJudgmentError,
    Judgment,
    PAIRWISE_CHOICES,
    Study,
    StudyError,
    StudyItem,
    StudyKind,
    StudyStore,
    SystemTally,
    UnknownAnnotatorError,
    UnknownItemError,
    UnknownStudyError,
    VETTING_CHOICES,
    create_pairwise_study,
    create_vetting_study,
)
from dcgkit.study.service import create_study_app, serve_study

__all__ = [
    "DuplicateJudgmentError",
    "Judgment",
    "PAIRWISE_CHOICES",
    "Study",
    "StudyError",
    "StudyItem",
    "StudyKind",
    "StudyStore",
    "SystemTally",
    "UnknownAnnotatorError",
    "UnknownItemError",
    "UnknownStudyError",
    "VETTING_CHOICES",
    "create_pairwise_study",
    "create_vetting_study",
    "create_study_app",
    "serve_study",
]
