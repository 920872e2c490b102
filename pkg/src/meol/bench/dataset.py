"""Benchmark dataset handling: JSONL ingestion, export, and query building.

Canonical record format is JSON lines with fields item_id, svg, question,
options {A..D}, answer. An adapter converts the upstream VGQA-style dump
(question/choices/answer/code) into this format. Malformed lines are routed
to a rejects file with a reason, never silently dropped.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from meol.errors import EmptyDataset, FileUnreadable
from meol.svg.model import parse_svg

OPTION_KEYS = ("A", "B", "C", "D")


@dataclass
class DatasetRecord:
    item_id: str
    svg_code: str
    question: str
    options: dict[str, str]
    answer: str

    def to_json(self) -> dict:
        return {
            "item_id": self.item_id,
            "svg": self.svg_code,
            "question": self.question,
            "options": self.options,
            "answer": self.answer,
        }


def make_query(record: DatasetRecord) -> str:
    """Concatenate question and correct answer text with a single space."""
    question = record.question.strip()
    answer = record.options[record.answer].strip()
    return f"{question} {answer}".strip()


def _validate_line(data: dict) -> DatasetRecord:
    for name in ("item_id", "svg", "question", "options", "answer"):
        if name not in data:
            raise ValueError(f"missing field {name!r}")
    options = data["options"]
    if not isinstance(options, dict) or set(options) != set(OPTION_KEYS):
        raise ValueError("options must map exactly A-D")
    if data["answer"] not in options:
        raise ValueError(f"answer {data['answer']!r} not an option key")
    parse_svg(data["svg"])  # raises on malformed SVG
    return DatasetRecord(
        item_id=str(data["item_id"]),
        svg_code=data["svg"],
        question=str(data["question"]),
        options={k: str(v) for k, v in options.items()},
        answer=data["answer"],
    )


def ingest(
    path: str | Path, rejects_path: str | Path | None = None
) -> list[DatasetRecord]:
    """Load records from canonical JSONL; collect bad lines into rejects."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise FileUnreadable(f"{path}: {exc}") from exc

    records: list[DatasetRecord] = []
    rejects: list[dict] = []
    seen_ids: set[str] = set()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
            if not isinstance(data, dict):
                raise ValueError("line is not a JSON object")
            record = _validate_line(data)
            if record.item_id in seen_ids:
                raise ValueError(f"duplicate item_id {record.item_id!r}")
            seen_ids.add(record.item_id)
            records.append(record)
        except Exception as exc:
            rejects.append({"line": lineno, "reason": str(exc), "raw": line})

    if rejects and rejects_path is not None:
        with open(rejects_path, "w", encoding="utf-8") as fh:
            for entry in rejects:
                fh.write(json.dumps(entry) + "\n")
    if not records:
        raise EmptyDataset(f"{path} contains no valid records")
    return records


def export(records: list[DatasetRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_json(), ensure_ascii=False) + "\n")


def adapt_upstream_dump(path: str | Path, out_path: str | Path) -> int:
    """Convert an upstream VGQA-style dump to the canonical JSONL format.

    Accepts objects with question/answer plus choices (list or dict) and SVG
    code under one of: svg, code, svg_code. Returns the number of converted
    records.
    """
    count = 0
    with open(path, encoding="utf-8") as src, open(
        out_path, "w", encoding="utf-8"
    ) as dst:
        for lineno, line in enumerate(src, start=1):
            if not line.strip():
                continue
            data = json.loads(line)
            svg = data.get("svg") or data.get("code") or data.get("svg_code")
            choices = data.get("options") or data.get("choices")
            if isinstance(choices, list):
                choices = dict(zip(OPTION_KEYS, choices))
            record = {
                "item_id": str(data.get("item_id") or data.get("id") or lineno),
                "svg": svg,
                "question": data.get("question", ""),
                "options": choices,
                "answer": data.get("answer"),
            }
            dst.write(json.dumps(record, ensure_ascii=False) + "\n")
            count += 1
    return count
