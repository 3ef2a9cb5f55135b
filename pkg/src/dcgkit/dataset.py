"""JSONL dataset I/O and summary statistics.

Layout convention::

    dataset/{split}.jsonl
    dataset/media/{id}/reference.webm

One sample per line, canonical key ordering, so identical sample lists always
produce identical bytes. Media files live beside the JSONL and are referenced
by relative path.
"""

from __future__ import annotations

import json
import re
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional

from .model import ChartSample, DEFAULT_CHART_TYPES, SchemaError, Split, canonical_json


class DatasetError(ValueError):
    """A dataset file could not be loaded. Carries the offending line number."""

    def __init__(self, path: Path | str, line: int | None, message: str):
        self.path = str(path)
        self.line = line
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")


_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


def approx_tokens(text: str) -> int:
    """Approximate token count: words and punctuation runs. Pluggable in stats."""
    return len(_TOKEN_RE.findall(text))


def load_dataset(
    path: Path | str,
    expected_split: Optional[Split] = None,
    chart_types: frozenset[str] = DEFAULT_CHART_TYPES,
) -> list[ChartSample]:
    """Load and validate a JSONL dataset file.

    Every record must satisfy the sample invariants; ids must be unique within
    the file. Any violation aborts the load with a line-precise error; there
    are no partially loaded datasets.
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(path, None, "file does not exist")
    samples: list[ChartSample] = []
    seen_ids: set[str] = set()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(path, lineno, f"malformed JSON: {exc.msg}") from None
            try:
                sample = ChartSample.from_dict(record, chart_types)
            except SchemaError as exc:
                raise DatasetError(path, lineno, str(exc)) from None
            if sample.id in seen_ids:
                raise DatasetError(path, lineno, f"duplicate id {sample.id!r}")
            seen_ids.add(sample.id)
            if expected_split is not None and sample.split is not expected_split:
                raise DatasetError(
                    path,
                    lineno,
                    f"split mismatch: expected {expected_split.value}, got {sample.split.value}",
                )
            samples.append(sample)
    return samples


def save_dataset(samples: Iterable[ChartSample], path: Path | str) -> None:
    """Write samples as canonical JSONL. Saving twice yields identical bytes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    for sample in samples:
        sample.validate()
        lines.append(canonical_json(sample.to_dict()))
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


@dataclass(frozen=True)
class DatasetStats:
    n_samples: int
    split_counts: dict[str, int]
    chart_type_histogram: dict[str, int]
    mean_code_tokens: float
    median_code_tokens: float

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "split_counts": dict(sorted(self.split_counts.items())),
            "chart_type_histogram": dict(sorted(self.chart_type_histogram.items())),
            "mean_code_tokens": self.mean_code_tokens,
            "median_code_tokens": self.median_code_tokens,
        }


def dataset_stats(
    samples: list[ChartSample],
    tokenizer: Callable[[str], int] = approx_tokens,
) -> DatasetStats:
    """Histogram by chart type, split counts, and code-length summary."""
    if not samples:
        raise DatasetError("<memory>", None, "cannot summarize an empty dataset")
    split_counts: dict[str, int] = {}
    hist: dict[str, int] = {}
    lengths: list[int] = []
    for sample in samples:
        split_counts[sample.split.value] = split_counts.get(sample.split.value, 0) + 1
        hist[sample.chart_type] = hist.get(sample.chart_type, 0) + 1
        lengths.append(tokenizer(sample.html_code))
    return DatasetStats(
        n_samples=len(samples),
        split_counts=split_counts,
        chart_type_histogram=hist,
        mean_code_tokens=statistics.fmean(lengths),
        median_code_tokens=float(statistics.median(lengths)),
    )
