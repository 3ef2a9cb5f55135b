"""Dataset construction: seeds, modifications, descriptions, QA, splits."""

from dcgkit.curation.generate import (
    CurationError,
    apply_modifications,
    describe,
    generate_qa,
    parse_json_reply,
)
from dcgkit.curation.pipeline import (
    PipelineError,
    Rejection,
    SeedTemplate,
    StagePaths,
    filter_renderable,
    ingest_seeds,
    run_stage1,
    run_stage2,
    run_stage3,
    run_stage4,
)
from dcgkit.curation.pool import (
    MAX_MODIFICATIONS,
    MIN_MODIFICATIONS,
    PoolError,
    default_pool_path,
    flatten_pool,
    load_modification_pool,
    sample_modifications,
)
from dcgkit.curation.splits import (
    DEFAULT_SPLIT_RATIOS,
    assign_splits,
    largest_remainder,
)

__all__ = [
    "CurationError",
    "apply_modifications",
    "describe",
    "generate_qa",
    "parse_json_reply",
    "PipelineError",
    "Rejection",
    "SeedTemplate",
    "StagePaths",
    "filter_renderable",
    "ingest_seeds",
    "run_stage1",
    "run_stage2",
    "run_stage3",
    "run_stage4",
    "MAX_MODIFICATIONS",
    "MIN_MODIFICATIONS",
    "PoolError",
    "default_pool_path",
    "flatten_pool",
    "load_modification_pool",
    "sample_modifications",
    "DEFAULT_SPLIT_RATIOS",
    "assign_splits",
    "largest_remainder",
]
