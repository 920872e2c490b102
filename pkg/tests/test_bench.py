from __future__ import annotations

import json
from pathlib import Path

import pytest

from meol.bench.ablation import ABLATION_KINDS, default_grid, run_ablation
from meol.bench.dataset import DatasetRecord, export, ingest, make_query
from meol.bench.report import write_ablation_report, write_eval_report
from meol.bench.runner import EmbeddingCache, RunConfig, run_eval
from meol.errors import EmptyDataset, FileUnreadable
from meol.mocks import mock_semantic_backend
from meol.rewrite import ScriptedPlanBackend

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="module")
def records():
    return ingest(FIXTURES / "benchmark.jsonl")


@pytest.fixture(scope="module")
def plan_backend():
    plans = json.loads((FIXTURES / "benchmark_plans.json").read_text())
    return ScriptedPlanBackend(responses=plans)


def test_fixture_ingests_fully(records):
    assert len(records) == 50
    assert all(r.item_id.startswith("item_") for r in records)


def test_make_query_joins_with_single_space():
    record = DatasetRecord(
        item_id="x",
        svg_code="<svg/>",
        question="What does this SVG image likely represent?",
        options={"A": "Global connectivity issues", "B": "b", "C": "c", "D": "d"},
        answer="A",
    )
    expected = "What does this SVG image likely represent? Global connectivity issues"
    assert make_query(record) == expected


def test_make_query_empty_question_trims():
    record = DatasetRecord(
        item_id="x", svg_code="<svg/>", question="  ",
        options={"A": " fish market ", "B": "b", "C": "c", "D": "d"}, answer="A",
    )
    assert make_query(record) == "fish market"


def test_query_contains_answer(records):
    for record in records:
        assert record.options[record.answer].strip() in make_query(record)


def test_export_ingest_round_trip(records, tmp_path):
    path = tmp_path / "copy.jsonl"
    export(records, path)
    assert ingest(path) == records


def test_rejects_routed_with_reason(tmp_path):
    good = (
        '{"item_id": "ok", "svg": "<svg/>", "question": "q?",'
        ' "options": {"A": "a", "B": "b", "C": "c", "D": "d"}, "answer": "A"}'
    )
    bad_lines = [
        "{broken json",
        '{"item_id": "no_answer", "svg": "<svg/>", "question": "q",'
        ' "options": {"A": "a", "B": "b", "C": "c", "D": "d"}}',
        '{"item_id": "bad_svg", "svg": "<not-svg/>", "question": "q",'
        ' "options": {"A": "a", "B": "b", "C": "c", "D": "d"}, "answer": "A"}',
        good,  # duplicate id below
    ]
    data = tmp_path / "mixed.jsonl"
    data.write_text("\n".join([good] + bad_lines) + "\n")
    rejects = tmp_path / "rejects.jsonl"
    loaded = ingest(data, rejects_path=rejects)
    assert [r.item_id for r in loaded] == ["ok"]
    entries = [json.loads(line) for line in rejects.read_text().splitlines()]
    assert len(entries) == 4
    assert all({"line", "reason", "raw"} <= set(e) for e in entries)
    assert any("duplicate" in e["reason"] for e in entries)


def test_empty_and_unreadable_datasets(tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("\n\n")
    with pytest.raises(EmptyDataset):
        ingest(empty)
    with pytest.raises(FileUnreadable):
        ingest(tmp_path / "missing.jsonl")


def _run(config, records, plan_backend, **kwargs):
    return run_eval(config, records, mock_semantic_backend,
                    plan_backend=plan_backend, **kwargs)


def test_run_eval_deterministic_reports(records, plan_backend, tmp_path):
    config = RunConfig(database_format="svg_only")
    subset = records[:12]
    first = write_eval_report(tmp_path / "a", config, _run(config, subset, plan_backend))
    second = write_eval_report(tmp_path / "b", config, _run(config, subset, plan_backend))
    assert first == second
    for name in ("summary.csv", "ranks.csv", "top5.csv", "self_similarity.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert (tmp_path / "a" / "self_similarity.png").exists()
    assert json.loads((tmp_path / "a" / "summary.json").read_text())["fingerprint"] \
        == config.fingerprint()


def test_run_eval_parallel_matches_serial(records, plan_backend):
    config = RunConfig(database_format="svg_only")
    subset = records[:10]
    serial = _run(config, subset, plan_backend)
    parallel = _run(config, subset, plan_backend, parallelism=4)
    assert serial.run.per_query_rank == parallel.run.per_query_rank
    assert serial.topk == parallel.topk


def test_cache_resumption_equivalence(records, plan_backend, tmp_path):
    config = RunConfig(database_format="generated_svg_only")
    subset = records[:10]
    cache_dir = tmp_path / "cache"
    cold = _run(config, subset, plan_backend, cache_dir=cache_dir)

    class Refuses:
        def __call__(self, req):
            raise AssertionError("cache should have satisfied every request")

    warm = run_eval(config, subset, Refuses(), plan_backend=plan_backend,
                    cache_dir=cache_dir)
    assert warm.run.per_query_rank == cold.run.per_query_rank
    assert warm.run.mrr == cold.run.mrr


def test_cache_keyed_by_fingerprint(tmp_path):
    cache = EmbeddingCache(tmp_path)
    cache.put("item", "fp_a", "db", {"vector": [1.0], "dim": 1,
                                     "model_id": "m", "template_id": "t"})
    assert cache.get("item", "fp_a", "db") is not None
    assert cache.get("item", "fp_b", "db") is None
    assert cache.get("item", "fp_a", "query") is None


def test_generated_format_audit_is_safe(records, plan_backend):
    config = RunConfig(database_format="image_plus_generated_svg")
    artifacts = _run(config, records[:10], plan_backend)
    assert len(artifacts.audit) == 10
    for entry in artifacts.audit:
        if entry["status"] == "rewritten":
            assert entry["visual_rmse"] <= 2.0
        else:
            assert entry["failure_reason"]


def test_identical_query_and_database_text_ranks_first(plan_backend):
    # svg_only embeds the SVG text; craft a record whose Q+A equals its svg code
    svg = '<svg id="item_x"><circle r="1" fill="red"/></svg>'
    record = DatasetRecord(
        item_id="item_x", svg_code=svg, question="",
        options={"A": svg, "B": "b", "C": "c", "D": "d"}, answer="A",
    )
    other = DatasetRecord(
        item_id="item_y",
        svg_code='<svg id="item_y"><rect width="9" height="9" fill="navy"/></svg>',
        question="totally different", options={"A": "x", "B": "b", "C": "c", "D": "d"},
        answer="B",
    )
    config = RunConfig(database_format="svg_only")
    artifacts = _run(config, [record, other], plan_backend)
    assert artifacts.run.per_query_rank["item_x"] == 1


def test_trend_generated_beats_raw(records, plan_backend):
    raw = _run(RunConfig(database_format="image_plus_raw_svg"), records, plan_backend)
    generated = _run(
        RunConfig(database_format="image_plus_generated_svg"), records, plan_backend
    )
    assert generated.run.recall_table[10] >= raw.run.recall_table[10]


@pytest.mark.parametrize(
    "kind,expected",
    [("layer_sweep", 33), ("pooling", 4), ("prompt_length", 5),
     ("database_format", 3), ("eol_family", 3)],
)
def test_default_grid_row_counts(kind, expected):
    assert len(default_grid(kind, RunConfig(database_format="svg_only"))) == expected


def test_pooling_grid_row_structure():
    labels = [p["label"] for p in default_grid("pooling", RunConfig())]
    assert labels == [
        "penultimate/last_token", "penultimate/mean_all_tokens",
        "last/last_token", "last/mean_all_tokens",
    ]


def test_ablation_rows_and_csv(records, plan_backend, tmp_path):
    base = RunConfig(database_format="svg_only")
    grid = default_grid("prompt_length", base)
    rows = run_ablation("prompt_length", grid, records[:8], mock_semantic_backend,
                        plan_backend=plan_backend)
    assert [row["label"] for row in rows] == [p["label"] for p in grid]
    path = write_ablation_report(tmp_path, "prompt_length", rows, base.k_values)
    lines = path.read_text().splitlines()
    assert len(lines) == 1 + 5
    assert lines[0].startswith("grid_point,recall@1")


def test_unknown_ablation_kind_rejected(records):
    with pytest.raises(ValueError):
        run_ablation("nonsense", [], records, mock_semantic_backend)
    assert "layer_sweep" in ABLATION_KINDS


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(database_format="hologram")
    a, b = RunConfig(layer_offset=1), RunConfig(layer_offset=2)
    assert a.fingerprint() != b.fingerprint()
    assert a.fingerprint() == RunConfig(layer_offset=1).fingerprint()
