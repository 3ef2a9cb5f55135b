"""Deterministic stratified split assignment.

Global split totals come from largest-remainder rounding of the ratios.
Within each chart-type stratum the same rounding runs again, then a
reconciliation pass moves single seats between strata (highest fractional
remainder first) until column sums match the global totals.  Sample order
inside a stratum is shuffled with the seeded RNG, so the whole assignment
is a pure function of (samples, ratios, rng_seed).
"""

from __future__ import annotations

import math
import random
from dataclasses import replace
from typing import Mapping, Sequence

from dcgkit.model import ChartSample, Split

#: Mirrors a 4000/1000/2300/700 breakdown over an 8000-sample corpus.
DEFAULT_SPLIT_RATIOS: dict[Split, float] = {
    Split.TRAIN_SFT: 0.5,
    Split.TRAIN_RL: 0.125,
    Split.VALIDATION: 0.2875,
    Split.TEST: 0.0875,
}

_RATIO_TOLERANCE = 1e-9


def largest_remainder(total: int, weights: Sequence[float]) -> list[int]:
    """Integer apportionment of ``total`` by ``weights`` (largest remainder).

    Ties break toward lower index, so the result is deterministic.
    """
    if total < 0:
        raise ValueError("total must be non-negative")
    if any(w < 0 for w in weights):
        raise ValueError("weights must be non-negative")
    scale = sum(weights)
    if scale <= 0:
        raise ValueError("weights must sum to a positive value")
    quotas = [total * w / scale for w in weights]
    counts = [math.floor(q) for q in quotas]
    leftover = total - sum(counts)
    order = sorted(range(len(weights)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:leftover]:
        counts[i] += 1
    return counts


def _stratum_matrix(
    strata: dict[str, int],
    ratios: Sequence[float],
    totals: Sequence[int],
) -> dict[str, list[int]]:
    """Per-stratum counts whose column sums equal the global totals."""
    names = sorted(strata)
    base: dict[str, list[int]] = {}
    remainders: list[tuple[float, str, int]] = []
    for name in names:
        size = strata[name]
        quotas = [size * r for r in ratios]
        floors = [math.floor(q) for q in quotas]
        base[name] = floors
        for col, (q, f) in enumerate(zip(quotas, floors)):
            remainders.append((q - f, name, col))
    row_deficit = {name: strata[name] - sum(base[name]) for name in names}
    col_deficit = [t - sum(base[name][c] for name in names) for c, t in enumerate(totals)]
    # Seat-by-seat fill: keep sweeping cells in remainder order while any
    # deficit remains; a cell can win more than one seat if feasibility
    # demands it.
    remainders.sort(key=lambda item: (-item[0], item[1], item[2]))
    while any(row_deficit[name] for name in names):
        progressed = False
        for _, name, col in remainders:
            if row_deficit[name] > 0 and col_deficit[col] > 0:
                base[name][col] += 1
                row_deficit[name] -= 1
                col_deficit[col] -= 1
                progressed = True
        if not progressed:  # pragma: no cover - deficits always pair up
            raise RuntimeError("split reconciliation stalled")
    return base


def assign_splits(
    samples: Sequence[ChartSample],
    ratios: Mapping[Split, float] | None = None,
    rng_seed: int = 0,
) -> list[ChartSample]:
    """Return copies of the samples with splits assigned, input order kept."""
    table = dict(DEFAULT_SPLIT_RATIOS if ratios is None else ratios)
    for split in Split:
        table.setdefault(split, 0.0)
    if any(v < 0 for v in table.values()):
        raise ValueError("split ratios must be non-negative")
    if abs(sum(table.values()) - 1.0) > _RATIO_TOLERANCE:
        raise ValueError(f"split ratios must sum to 1, got {sum(table.values())!r}")
    if not samples:
        return []
    ids = [s.id for s in samples]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate sample ids")

    splits = list(Split)
    ratio_row = [table[s] for s in splits]
    totals = largest_remainder(len(samples), ratio_row)

    strata: dict[str, list[ChartSample]] = {}
    for sample in samples:
        strata.setdefault(sample.chart_type, []).append(sample)
    matrix = _stratum_matrix(
        {name: len(group) for name, group in strata.items()}, ratio_row, totals
    )

    rng = random.Random(rng_seed)
    assigned: dict[str, Split] = {}
    for name in sorted(strata):
        group = sorted(strata[name], key=lambda s: s.id)
        rng.shuffle(group)
        cursor = 0
        for split, count in zip(splits, matrix[name]):
            for sample in group[cursor : cursor + count]:
                assigned[sample.id] = split
            cursor += count
    return [replace(sample, split=assigned[sample.id]) for sample in samples]
