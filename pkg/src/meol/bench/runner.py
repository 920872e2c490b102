"""End-to-end evaluation runs: embed database + queries, rank, report.

Embeddings are cached on disk keyed by (item_id, config fingerprint, role) so
interrupted runs resume to identical reports, and rerunning a deterministic
backend is free. Cache writes are write-temp-then-rename.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from meol.bench.dataset import DatasetRecord, make_query
from meol.client import Backend
from meol.embedding import EmbeddingRecord, HiddenStateSelector, embed
from meol.prompts import (
    DEFAULT_TEMPLATES,
    MEOL_TEMPLATE_BY_MODALITY,
    ModalityInput,
    PromptTemplate,
    make_length_variant,
    render_prompt,
)
from meol.retrieval import (
    DEFAULT_K_VALUES,
    EvalRun,
    RetrievalIndex,
    build_index,
    evaluate,
    self_similarity_histogram,
)
from meol.rewrite import PlanBackend, RulePlanBackend, audit_record, rewrite_document
from meol.svg.model import parse_svg, serialize_svg
from meol.svg.raster import rasterize

DATABASE_FORMATS = (
    "image",
    "image_plus_raw_svg",
    "image_plus_generated_svg",
    "svg_only",
    "generated_svg_only",
)

_FORMAT_MODALITY = {
    "image": "image",
    "image_plus_raw_svg": "image_svg",
    "image_plus_generated_svg": "image_svg",
    "svg_only": "svg",
    "generated_svg_only": "svg",
}

_GENERATED_FORMATS = ("image_plus_generated_svg", "generated_svg_only")


@dataclass(frozen=True)
class RunConfig:
    database_format: str = "image"
    template_id: str = "meol-text"  # query template
    length_variant: str = "one_word"
    layer_offset: int = 1
    pooling: str = "last_token"
    backend: str = "mock-semantic"
    k_values: tuple[int, ...] = DEFAULT_K_VALUES

    def __post_init__(self):
        if self.database_format not in DATABASE_FORMATS:
            raise ValueError(f"unknown database format {self.database_format!r}")

    def fingerprint(self) -> str:
        payload = json.dumps(
            {
                "database_format": self.database_format,
                "template_id": self.template_id,
                "length_variant": self.length_variant,
                "layer_offset": self.layer_offset,
                "pooling": self.pooling,
                "backend": self.backend,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]

    @property
    def selector(self) -> HiddenStateSelector:
        return HiddenStateSelector(
            layer_offset=self.layer_offset, pooling=self.pooling
        )


def _variant(template: PromptTemplate, variant: str) -> PromptTemplate:
    if template.length_variant != "one_word" or variant == "one_word":
        return template
    return make_length_variant(template, variant)


def _query_template(config: RunConfig) -> PromptTemplate:
    template = DEFAULT_TEMPLATES[config.template_id]
    return _variant(template, config.length_variant)


def _database_template(config: RunConfig) -> PromptTemplate:
    query_template = DEFAULT_TEMPLATES[config.template_id]
    modality = _FORMAT_MODALITY[config.database_format]
    if query_template.length_variant != "one_word":
        # text-only baseline family: SVG code is treated as plain text
        if modality != "svg":
            raise ValueError(
                f"template {config.template_id!r} only supports SVG-as-text "
                f"database formats"
            )
        return query_template
    return _variant(
        DEFAULT_TEMPLATES[MEOL_TEMPLATE_BY_MODALITY[modality]],
        config.length_variant,
    )


class EmbeddingCache:
    """Disk cache of vectors keyed by (item_id, fingerprint, role)."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, item_id: str, fingerprint: str, role: str) -> Path:
        key = hashlib.sha256(
            f"{item_id}\x1f{fingerprint}\x1f{role}".encode("utf-8")
        ).hexdigest()
        return self.directory / f"{key}.json"

    def get(self, item_id: str, fingerprint: str, role: str):
        path = self._path(item_id, fingerprint, role)
        if not path.exists():
            return None
        data = json.loads(path.read_text(encoding="utf-8"))
        return data

    def put(self, item_id: str, fingerprint: str, role: str, data: dict) -> None:
        path = self._path(item_id, fingerprint, role)
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(data, fh)
        os.replace(tmp, path)


@dataclass
class RunArtifacts:
    run: EvalRun
    records_embedded: int
    model_id: str
    fingerprint: str
    audit: list[dict] = field(default_factory=list)
    topk: dict[str, list[str]] = field(default_factory=dict)
    index: RetrievalIndex | None = None


def _embed_cached(
    backend: Backend,
    cache: EmbeddingCache | None,
    config: RunConfig,
    item_id: str,
    role: str,
    payload,
) -> EmbeddingRecord:
    fingerprint = config.fingerprint()
    if cache is not None:
        hit = cache.get(item_id, fingerprint, role)
        if hit is not None:
            return EmbeddingRecord(
                vector=np.asarray(hit["vector"], dtype=np.float64),
                dim=hit["dim"],
                model_id=hit["model_id"],
                selector=config.selector,
                template_id=hit["template_id"],
                item_id=item_id,
            )
    record = embed(backend, payload, selector=config.selector, item_id=item_id)
    if cache is not None:
        cache.put(
            item_id,
            fingerprint,
            role,
            {
                "vector": record.vector.tolist(),
                "dim": record.dim,
                "model_id": record.model_id,
                "template_id": record.template_id,
            },
        )
    return record


def _database_input(
    record: DatasetRecord,
    config: RunConfig,
    plan_backend: PlanBackend,
    audit: list[dict],
) -> ModalityInput:
    doc = parse_svg(record.svg_code)
    svg_code = record.svg_code
    if config.database_format in _GENERATED_FORMATS:
        outcome = rewrite_document(doc, plan_backend)
        audit.append(audit_record(record.item_id, outcome))
        svg_code = serialize_svg(outcome.document)
        doc = outcome.document
    modality = _FORMAT_MODALITY[config.database_format]
    image = rasterize(doc) if modality in ("image", "image_svg") else None
    template = _database_template(config)
    if template.modality == "text":
        return ModalityInput(text=svg_code)
    return ModalityInput(
        image=image,
        svg=svg_code if modality in ("svg", "image_svg") else None,
    )


def run_eval(
    config: RunConfig,
    records: list[DatasetRecord],
    backend: Backend,
    plan_backend: PlanBackend | None = None,
    cache_dir: str | Path | None = None,
    parallelism: int = 1,
) -> RunArtifacts:
    """Embed the database under the configured format, embed Q+A queries,
    and compute ranking metrics."""
    if not records:
        raise ValueError("no records to evaluate")
    plan_backend = plan_backend or RulePlanBackend()
    cache = EmbeddingCache(cache_dir) if cache_dir is not None else None
    db_template = _database_template(config)
    query_template = _query_template(config)
    audit: list[dict] = []

    def embed_db(record: DatasetRecord) -> EmbeddingRecord:
        value = _database_input(record, config, plan_backend, audit)
        payload = render_prompt(db_template, value)
        return _embed_cached(backend, cache, config, record.item_id, "db", payload)

    def embed_query(record: DatasetRecord) -> EmbeddingRecord:
        payload = render_prompt(query_template, ModalityInput(text=make_query(record)))
        return _embed_cached(backend, cache, config, record.item_id, "query", payload)

    if parallelism > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=parallelism) as pool:
            db_records = list(pool.map(embed_db, records))
            query_records = list(pool.map(embed_query, records))
    else:
        db_records = [embed_db(r) for r in records]
        query_records = [embed_query(r) for r in records]

    index = build_index(db_records)
    queries = [
        (record.item_id, query_records[i].vector, record.item_id)
        for i, record in enumerate(records)
    ]
    run = evaluate(index, queries, k_values=config.k_values)

    from meol.retrieval import query_topk

    topk = {
        record.item_id: [
            r.item_id for r in query_topk(index, query_records[i].vector, 5)
        ]
        for i, record in enumerate(records)
    }
    return RunArtifacts(
        run=run,
        records_embedded=len(records),
        model_id=db_records[0].model_id,
        fingerprint=config.fingerprint(),
        audit=audit,
        topk=topk,
        index=index,
    )


def histogram_for(artifacts: RunArtifacts, bin_count: int = 50):
    return self_similarity_histogram(artifacts.index, bin_count)
