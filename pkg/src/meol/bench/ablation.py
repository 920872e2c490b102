"""Ablation grids: layer sweep, pooling, prompt length, database format,
and the one-word-template family comparison."""

from __future__ import annotations

import dataclasses
from pathlib import Path

from meol.bench.runner import RunArtifacts, RunConfig, run_eval
from meol.client import Backend
from meol.prompts import LENGTH_VARIANTS
from meol.rewrite import PlanBackend

ABLATION_KINDS = (
    "layer_sweep",
    "pooling",
    "prompt_length",
    "database_format",
    "eol_family",
)

# grid kinds whose embeddings warrant a self-similarity histogram per point
HISTOGRAM_KINDS = ("layer_sweep", "pooling")


def default_grid(kind: str, base: RunConfig, layer_count: int = 33) -> list[dict]:
    """Grid points as {label, config} entries."""
    if kind == "layer_sweep":
        return [
            {
                "label": str(offset),
                "config": dataclasses.replace(base, layer_offset=offset),
            }
            for offset in range(layer_count)
        ]
    if kind == "pooling":
        grid = []
        for offset, layer_name in ((1, "penultimate"), (0, "last")):
            for pooling in ("last_token", "mean_all_tokens"):
                grid.append(
                    {
                        "label": f"{layer_name}/{pooling}",
                        "config": dataclasses.replace(
                            base, layer_offset=offset, pooling=pooling
                        ),
                    }
                )
        return grid
    if kind == "prompt_length":
        return [
            {
                "label": variant,
                "config": dataclasses.replace(base, length_variant=variant),
            }
            for variant in LENGTH_VARIANTS
        ]
    if kind == "database_format":
        return [
            {
                "label": fmt,
                "config": dataclasses.replace(base, database_format=fmt),
            }
            for fmt in ("image", "image_plus_raw_svg", "image_plus_generated_svg")
        ]
    if kind == "eol_family":
        return [
            {
                "label": template_id,
                "config": dataclasses.replace(
                    base,
                    template_id=template_id,
                    database_format="svg_only"
                    if template_id != "meol-text"
                    else base.database_format,
                ),
            }
            for template_id in ("prompteol", "keeol", "meol-text")
        ]
    raise ValueError(f"unknown ablation kind {kind!r}")


def run_ablation(
    kind: str,
    grid: list[dict],
    records,
    backend: Backend,
    plan_backend: PlanBackend | None = None,
    cache_dir: str | Path | None = None,
    parallelism: int = 1,
) -> list[dict]:
    """One eval run per grid point; returns rows of {label, config, run, artifacts}."""
    if kind not in ABLATION_KINDS:
        raise ValueError(f"unknown ablation kind {kind!r}")
    rows = []
    for point in grid:
        artifacts: RunArtifacts = run_eval(
            point["config"],
            records,
            backend,
            plan_backend=plan_backend,
            cache_dir=cache_dir,
            parallelism=parallelism,
        )
        rows.append(
            {
                "label": point["label"],
                "config": point["config"],
                "run": artifacts.run,
                "artifacts": artifacts,
            }
        )
    return rows
