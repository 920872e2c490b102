from __future__ import annotations

import json
import socket
import subprocess
import sys
import time
from pathlib import Path

import pytest

from meol.cli import load_config_file, main
from meol.client import SocketBackend
from meol.protocol import EmbedRequest

FIXTURES = Path(__file__).parent / "fixtures"
DATASET = FIXTURES / "benchmark.jsonl"

SAMPLE_SVG = (
    '<svg viewBox="0 0 10 10"><g id="Layer_1">'
    '<circle id="path3" cx="5" cy="5" r="3" fill="red"/></g></svg>'
)


@pytest.fixture
def svg_file(tmp_path):
    path = tmp_path / "in.svg"
    path.write_text(SAMPLE_SVG, encoding="utf-8")
    return path


def test_rewrite_success(svg_file, tmp_path, capsys):
    out = tmp_path / "out.svg"
    audit = tmp_path / "audit.jsonl"
    code = main(["rewrite", str(svg_file), "--backend", "mock-hash",
                 "-o", str(out), "--audit", str(audit)])
    assert code == 0
    assert "Layer_1" not in out.read_text()
    entry = json.loads(audit.read_text().splitlines()[0])
    assert entry["status"] == "rewritten" and entry["visual_rmse"] <= 2.0


def test_rewrite_json_summary(svg_file, tmp_path, capsys):
    out = tmp_path / "out.svg"
    assert main(["rewrite", str(svg_file), "-o", str(out), "--json"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["replaced_ids"] == 2


def test_rewrite_missing_input_is_user_error(tmp_path, capsys):
    assert main(["rewrite", str(tmp_path / "nope.svg"), "-o", "x.svg"]) == 1


def test_rewrite_malformed_svg_is_user_error(tmp_path, capsys):
    bad = tmp_path / "bad.svg"
    bad.write_text("<svg><unclosed>")
    assert main(["rewrite", str(bad), "-o", str(tmp_path / "o.svg")]) == 1
    assert "error:" in capsys.readouterr().err


def test_embed_text(capsys):
    code = main(["embed", "--backend", "mock-hash", "--text", "a red bird", "--json"])
    assert code == 0
    result = json.loads(capsys.readouterr().out)
    assert result["dim"] == 64 and len(result["vector"]) == 64
    assert result["model_id"] == "mock-hash"


def test_embed_svg_with_image(svg_file, tmp_path, capsys):
    out = tmp_path / "vec.json"
    code = main(["embed", "--backend", "mock-hash", "--svg", str(svg_file),
                 "--with-image", "-o", str(out)])
    assert code == 0
    assert json.loads(out.read_text())["template_id"] == "meol-image-svg"


def test_embed_requires_exactly_one_input(capsys):
    assert main(["embed", "--backend", "mock-hash"]) == 1
    assert "usage" in capsys.readouterr().err.lower()


def test_unknown_flag_is_user_error(capsys):
    assert main(["embed", "--frobnicate"]) == 1


def test_index_then_query(tmp_path, capsys):
    idx = tmp_path / "db.idx"
    assert main(["index", "--dataset", str(DATASET), "--backend", "mock-semantic",
                 "--format", "svg_only", "-o", str(idx)]) == 0
    capsys.readouterr()
    code = main(["query", "--index", str(idx), "--backend", "mock-semantic",
                 "--text", "global connectivity issues", "-k", "5"])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 5
    rank, item_id, score = lines[0].split("\t")
    assert rank == "1" and item_id.startswith("item_") and float(score) <= 1.0


def test_eval_writes_reports(tmp_path, capsys):
    out = tmp_path / "report"
    code = main(["eval", "--dataset", str(DATASET), "--backend", "mock-semantic",
                 "--format", "svg_only", "--out", str(out), "--json"])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert 0.0 <= summary["mrr"] <= 1.0
    for name in ("summary.csv", "ranks.csv", "top5.csv",
                 "self_similarity.csv", "self_similarity.png", "summary.json"):
        assert (out / name).exists(), name


def test_eval_config_file_supplies_defaults(tmp_path, capsys):
    config = tmp_path / "run.cfg"
    config.write_text("pooling = mean_all_tokens  # comment\nlayer_offset = 3\n")
    out = tmp_path / "report"
    code = main(["eval", "--config", str(config), "--dataset", str(DATASET),
                 "--format", "svg_only", "--layer-offset", "2", "--out", str(out)])
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["config"]["pooling"] == "mean_all_tokens"  # from file
    assert summary["config"]["layer_offset"] == 2  # explicit flag wins


def test_load_config_file_rejects_bad_lines(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("this is not a pair\n")
    import click

    with pytest.raises(click.UsageError):
        load_config_file(path)


def test_ablate_pooling_outputs(tmp_path, capsys):
    out = tmp_path / "ablation"
    code = main(["ablate", "--kind", "pooling", "--dataset", str(DATASET),
                 "--format", "svg_only", "--out", str(out), "--json"])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["rows"] == 4
    csv_lines = (out / "ablation_pooling.csv").read_text().splitlines()
    assert len(csv_lines) == 5
    assert (out / "ablation_pooling.png").exists()
    histograms = list(out.glob("self_similarity_*.png"))
    assert len(histograms) == 4


def test_adapt_converts_upstream_dump(tmp_path, capsys):
    dump = tmp_path / "dump.jsonl"
    dump.write_text(json.dumps({
        "id": "q1", "code": "<svg/>", "question": "what?",
        "choices": ["a", "b", "c", "d"], "answer": "B",
    }) + "\n")
    dest = tmp_path / "canonical.jsonl"
    assert main(["adapt", str(dump), str(dest)]) == 0
    record = json.loads(dest.read_text())
    assert record["options"] == {"A": "a", "B": "b", "C": "c", "D": "d"}
    assert record["svg"] == "<svg/>"


def test_help_everywhere(capsys):
    assert main(["--help"]) == 0
    for sub in ("rewrite", "embed", "index", "query", "eval", "ablate",
                "serve-mock", "adapt"):
        assert main([sub, "--help"]) == 0, sub


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def test_serve_mock_end_to_end():
    port = _free_port()
    proc = subprocess.Popen(
        [sys.executable, "-m", "meol.cli", "serve-mock",
         "--backend", "mock-hash", "--addr", f"127.0.0.1:{port}"],
        stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL,
    )
    try:
        backend = SocketBackend("127.0.0.1", port)
        deadline = time.monotonic() + 10
        while True:
            try:
                resp = backend(EmbedRequest(text="ping", request_id="t1"))
                break
            except Exception:
                if time.monotonic() > deadline:
                    raise
                time.sleep(0.1)
        assert resp.model_id == "mock-hash" and resp.dim == 64
        again = backend(EmbedRequest(text="ping", request_id="t2"))
        assert again.vector == resp.vector
    finally:
        proc.terminate()
        proc.wait(timeout=10)
