"""Report emission: delimited outputs plus rendered figures.

Every eval run writes a summary CSV, a per-query rank CSV, a top-5 CSV, a
self-similarity histogram CSV with a matching PNG, and (for generated-SVG
formats) the rewrite audit JSONL. Assembly is single-threaded and ordered so
reruns produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from meol.bench.runner import RunArtifacts, RunConfig, histogram_for


def write_eval_report(
    out_dir: str | Path, config: RunConfig, artifacts: RunArtifacts
) -> dict:
    """Write all run outputs into out_dir; returns the JSON summary."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    run = artifacts.run

    with open(out / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        for k in run.k_values:
            writer.writerow([f"recall@{k}", f"{run.recall_table[k]:.6f}"])
        writer.writerow(["mrr", f"{run.mrr:.6f}"])

    with open(out / "ranks.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["query_id", "rank"])
        for query_id in sorted(run.per_query_rank):
            writer.writerow([query_id, run.per_query_rank[query_id]])

    with open(out / "top5.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["query_id", "rank1", "rank2", "rank3", "rank4", "rank5"])
        for query_id in sorted(artifacts.topk):
            row = artifacts.topk[query_id]
            writer.writerow([query_id] + row + [""] * (5 - len(row)))

    if artifacts.audit:
        with open(out / "rewrite_audit.jsonl", "w", encoding="utf-8") as fh:
            for entry in sorted(artifacts.audit, key=lambda e: e["item_id"]):
                fh.write(json.dumps(entry, ensure_ascii=False) + "\n")

    edges, counts = histogram_for(artifacts)
    write_histogram(out / "self_similarity", edges, counts)

    summary = {
        "config": {
            "database_format": config.database_format,
            "template_id": config.template_id,
            "length_variant": config.length_variant,
            "layer_offset": config.layer_offset,
            "pooling": config.pooling,
            "backend": config.backend,
            "k_values": list(config.k_values),
        },
        "fingerprint": artifacts.fingerprint,
        "model_id": artifacts.model_id,
        "records": artifacts.records_embedded,
        "recall": {str(k): run.recall_table[k] for k in run.k_values},
        "mrr": run.mrr,
    }
    (out / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return summary


def write_histogram(stem: str | Path, edges: np.ndarray, counts: np.ndarray) -> None:
    """CSV of bin edges/counts plus a rendered PNG next to it."""
    stem = Path(stem)
    with open(stem.with_suffix(".csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_left", "bin_right", "count"])
        for i, count in enumerate(counts):
            writer.writerow([f"{edges[i]:.6f}", f"{edges[i + 1]:.6f}", int(count)])

    fig, ax = plt.subplots(figsize=(6, 4))
    centers = (edges[:-1] + edges[1:]) / 2.0
    ax.bar(centers, counts, width=(edges[1] - edges[0]) * 0.95, color="#4878cf")
    ax.set_xlabel("pairwise cosine similarity")
    ax.set_ylabel("pair count")
    ax.set_title("Self-similarity distribution")
    fig.tight_layout()
    fig.savefig(stem.with_suffix(".png"), dpi=120)
    plt.close(fig)


def write_ablation_report(
    out_dir: str | Path,
    kind: str,
    rows: list[dict],
    k_values: tuple[int, ...],
) -> Path:
    """One CSV row per grid point; returns the CSV path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"ablation_{kind}.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["grid_point"] + [f"recall@{k}" for k in k_values] + ["mrr"]
        writer.writerow(header)
        for row in rows:
            run = row["run"]
            writer.writerow(
                [row["label"]]
                + [f"{run.recall_table[k]:.6f}" for k in k_values]
                + [f"{run.mrr:.6f}"]
            )
    return path


def write_ablation_figure(
    out_dir: str | Path, kind: str, rows: list[dict], k: int
) -> None:
    """Recall-vs-grid-point line or bar chart for an ablation sweep."""
    out = Path(out_dir)
    labels = [row["label"] for row in rows]
    values = [row["run"].recall_table[k] for row in rows]
    fig, ax = plt.subplots(figsize=(7, 4))
    if all(str(lbl).lstrip("-").isdigit() for lbl in labels):
        ax.plot([int(lbl) for lbl in labels], values, marker="o", color="#d65f5f")
        ax.set_xlabel("layer offset from last")
    else:
        ax.bar(range(len(labels)), values, color="#6acc65")
        ax.set_xticks(range(len(labels)))
        ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylabel(f"Recall@{k}")
    ax.set_title(f"Ablation: {kind}")
    fig.tight_layout()
    fig.savefig(out / f"ablation_{kind}.png", dpi=120)
    plt.close(fig)
