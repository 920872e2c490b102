"""End-to-end smoke: a 20-record retrieval eval through the tiny model."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import pytest

meol_bench = pytest.importorskip("meol.bench")
meol_client = pytest.importorskip("meol.client")

FIXTURE = Path(__file__).resolve().parents[2] / "tests" / "fixtures" / "benchmark.jsonl"


def test_twenty_record_eval_emits_report(server, tmp_path):
    records = meol_bench.ingest(FIXTURE)[:20]
    host, port = server.server_address[:2]
    backend = meol_client.SocketBackend(host, port)
    config = meol_bench.RunConfig(
        database_format="image_plus_generated_svg", backend=f"{host}:{port}"
    )
    try:
        artifacts = meol_bench.run_eval(config, records, backend, parallelism=4)
    finally:
        backend.close()
    assert artifacts.records_embedded == 20
    assert artifacts.model_id == "tiny-mm"

    out = tmp_path / "report"
    summary = meol_bench.write_eval_report(out, config, artifacts)
    assert 0.0 <= summary["mrr"] <= 1.0
    for k, value in summary["recall"].items():
        assert 0.0 <= value <= 1.0, k

    with open(out / "summary.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["metric", "value"] and len(rows) == 6

    with open(out / "ranks.csv", newline="") as fh:
        ranks = list(csv.reader(fh))[1:]
    assert len(ranks) == 20
    assert all(1 <= int(rank) <= 20 for _, rank in ranks)

    audit = [json.loads(line) for line in (out / "rewrite_audit.jsonl").read_text().splitlines()]
    assert len(audit) == 20
    assert (out / "self_similarity.png").stat().st_size > 0
