"""Benchmark harness: dataset ingestion, eval runs, ablations, reports."""

from meol.bench.ablation import ABLATION_KINDS, default_grid, run_ablation
from meol.bench.dataset import (
    DatasetRecord,
    adapt_upstream_dump,
    export,
    ingest,
    make_query,
)
from meol.bench.report import (
    write_ablation_figure,
    write_ablation_report,
    write_eval_report,
    write_histogram,
)
from meol.bench.runner import (
    DATABASE_FORMATS,
    EmbeddingCache,
    RunArtifacts,
    RunConfig,
    run_eval,
)

__all__ = [
    "ABLATION_KINDS",
    "DATABASE_FORMATS",
    "DatasetRecord",
    "EmbeddingCache",
    "RunArtifacts",
    "RunConfig",
    "adapt_upstream_dump",
    "default_grid",
    "export",
    "ingest",
    "make_query",
    "run_ablation",
    "run_eval",
    "write_ablation_figure",
    "write_ablation_report",
    "write_eval_report",
    "write_histogram",
]
