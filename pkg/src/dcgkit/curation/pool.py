"""Modification pool loading and seeded sampling.

The pool is an editable JSON file mapping each modification category to a
list of instruction templates.  A packaged default ships with the library;
projects can point the pipeline at their own file.
"""

from __future__ import annotations

import json
import random
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from dcgkit.model import ModificationCategory, ModificationSpec

#: Sampled modification counts are drawn uniformly from this inclusive range.
MIN_MODIFICATIONS = 1
MAX_MODIFICATIONS = 10


class PoolError(ValueError):
    """The modification pool file is missing, malformed, or incomplete."""


def default_pool_path() -> Path:
    """Path of the packaged modification pool."""
    return Path(resources.files("dcgkit.curation").joinpath("data/modification_pool.json"))


def load_modification_pool(path: Optional[Path | str] = None) -> dict[ModificationCategory, list[str]]:
    """Load and validate a pool file: every category present and non-empty."""
    pool_path = Path(path) if path is not None else default_pool_path()
    if not pool_path.exists():
        raise PoolError(f"modification pool not found: {pool_path}")
    try:
        raw = json.loads(pool_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise PoolError(f"{pool_path}: malformed JSON: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise PoolError(f"{pool_path}: expected an object of category -> instructions")
    pool: dict[ModificationCategory, list[str]] = {}
    for key, entries in raw.items():
        try:
            category = ModificationCategory(key)
        except ValueError:
            raise PoolError(f"{pool_path}: unknown category {key!r}") from None
        if not isinstance(entries, list) or not all(
            isinstance(e, str) and e.strip() for e in entries
        ):
            raise PoolError(f"{pool_path}: category {key!r} must hold non-empty strings")
        pool[category] = list(entries)
    for category in ModificationCategory:
        if not pool.get(category):
            raise PoolError(f"{pool_path}: category {category.value!r} needs at least one entry")
    return pool


def flatten_pool(pool: dict[ModificationCategory, Sequence[str]]) -> list[ModificationSpec]:
    """Pool as a flat spec list, ordered by category then position."""
    return [
        ModificationSpec(category=category, instruction=instruction)
        for category in ModificationCategory
        for instruction in pool.get(category, ())
    ]


def sample_modifications(
    rng_seed: int,
    pool: dict[ModificationCategory, Sequence[str]],
    k: Optional[int] = None,
) -> list[ModificationSpec]:
    """Draw k distinct modifications from the pool, seeded.

    When k is not given it is drawn uniformly from {1..10} first, so the
    draw count itself is part of the seeded stream.
    """
    rng = random.Random(rng_seed)
    if k is None:
        k = rng.randint(MIN_MODIFICATIONS, MAX_MODIFICATIONS)
    if not MIN_MODIFICATIONS <= k <= MAX_MODIFICATIONS:
        raise ValueError(f"k must lie in [{MIN_MODIFICATIONS}, {MAX_MODIFICATIONS}], got {k}")
    entries = flatten_pool(pool)
    if len(entries) < k:
        raise PoolError(f"pool holds {len(entries)} entries, cannot draw {k} without replacement")
    return rng.sample(entries, k)
