"""Exact cosine retrieval, ranking metrics, and self-similarity analysis.

Search is brute force over a unit-normalized matrix (databases here are a
few thousand items); ties break deterministically by ascending item_id.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from meol.embedding import EmbeddingRecord, normalize
from meol.errors import (
    DimMismatch,
    DuplicateItem,
    TooFewItems,
    UnknownGroundTruth,
    ZeroVector,
)

DEFAULT_K_VALUES = (1, 5, 10, 20)

_MAGIC = b"MEOLIDX1"
_VERSION = 1


@dataclass
class RetrievalIndex:
    item_ids: list[str]
    matrix: np.ndarray  # (N, dim) float32, unit rows

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1])

    def __len__(self) -> int:
        return int(self.matrix.shape[0])


@dataclass(frozen=True)
class RankedResult:
    item_id: str
    score: float
    rank: int


@dataclass
class EvalRun:
    per_query_rank: dict[str, int]
    k_values: tuple[int, ...]
    recall_table: dict[int, float]
    mrr: float


def build_index(records: list[EmbeddingRecord]) -> RetrievalIndex:
    """Normalize and stack records; item_ids must be unique, dims uniform."""
    if not records:
        raise ValueError("cannot build an index from zero records")
    dim = records[0].vector.shape[0]
    seen: set[str] = set()
    rows = []
    for record in records:
        if record.vector.shape[0] != dim:
            raise DimMismatch(
                f"record {record.item_id!r} has dim {record.vector.shape[0]}, "
                f"expected {dim}"
            )
        if record.item_id in seen:
            raise DuplicateItem(record.item_id)
        seen.add(record.item_id)
        rows.append(normalize(record.vector))
    matrix = np.asarray(rows, dtype=np.float32)
    return RetrievalIndex(item_ids=[r.item_id for r in records], matrix=matrix)


def _ranked_order(index: RetrievalIndex, query_vector) -> tuple[np.ndarray, np.ndarray]:
    """Full ranking: scores plus the permutation sorted by (-score, item_id)."""
    query = np.asarray(query_vector, dtype=np.float64)
    if query.shape != (index.dim,):
        raise DimMismatch(f"query dim {query.shape} != index dim {index.dim}")
    norm = float(np.linalg.norm(query))
    if norm == 0.0:
        raise ZeroVector("query vector has zero norm")
    scores = index.matrix.astype(np.float64) @ (query / norm)
    order = sorted(range(len(index)), key=lambda i: (-scores[i], index.item_ids[i]))
    return scores, np.asarray(order)


def query_topk(index: RetrievalIndex, query_vector, k: int) -> list[RankedResult]:
    if k < 1:
        raise ValueError("k must be >= 1")
    scores, order = _ranked_order(index, query_vector)
    top = order[: min(k, len(index))]
    return [
        RankedResult(item_id=index.item_ids[i], score=float(scores[i]), rank=rank)
        for rank, i in enumerate(top, start=1)
    ]


def evaluate(
    index: RetrievalIndex,
    queries: list[tuple[str, np.ndarray, str]],
    k_values: tuple[int, ...] = DEFAULT_K_VALUES,
) -> EvalRun:
    """Recall@k and MRR from each query's full-ranking ground-truth rank."""
    id_set = set(index.item_ids)
    per_query_rank: dict[str, int] = {}
    for query_id, vector, ground_truth in queries:
        if ground_truth not in id_set:
            raise UnknownGroundTruth(ground_truth)
        _, order = _ranked_order(index, vector)
        position = {index.item_ids[i]: rank for rank, i in enumerate(order, start=1)}
        per_query_rank[query_id] = position[ground_truth]
    n = len(per_query_rank)
    ranks = list(per_query_rank.values())
    recall_table = {
        k: sum(1 for r in ranks if r <= k) / n for k in k_values
    }
    mrr = sum(1.0 / r for r in ranks) / n
    return EvalRun(
        per_query_rank=per_query_rank,
        k_values=tuple(k_values),
        recall_table=recall_table,
        mrr=mrr,
    )


def self_similarity_histogram(
    index: RetrievalIndex, bin_count: int
) -> tuple[np.ndarray, np.ndarray]:
    """Histogram over cosines of all unordered distinct pairs.

    Returns (bin_edges over [-1, 1], counts); counts sum to N(N-1)/2.
    """
    if len(index) < 2:
        raise TooFewItems("need at least 2 items for pairwise similarities")
    if bin_count < 1:
        raise ValueError("bin_count must be >= 1")
    matrix = index.matrix.astype(np.float64)
    sims = matrix @ matrix.T
    iu = np.triu_indices(len(index), k=1)
    values = np.clip(sims[iu], -1.0, 1.0)
    edges = np.linspace(-1.0, 1.0, bin_count + 1)
    counts, _ = np.histogram(values, bins=edges)
    return edges, counts


# --- persistence -------------------------------------------------------------

def save_index(index: RetrievalIndex, path: str | Path) -> None:
    """Binary format: magic, version, dim, N, item_id table, float32 LE rows."""
    parts = [
        _MAGIC,
        struct.pack("<III", _VERSION, index.dim, len(index)),
    ]
    for item_id in index.item_ids:
        encoded = item_id.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
    parts.append(index.matrix.astype("<f4").tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_index(path: str | Path) -> RetrievalIndex:
    data = Path(path).read_bytes()
    if data[:8] != _MAGIC:
        raise ValueError(f"{path} is not an index file")
    version, dim, count = struct.unpack("<III", data[8:20])
    if version != _VERSION:
        raise ValueError(f"unsupported index version {version}")
    offset = 20
    item_ids = []
    for _ in range(count):
        (length,) = struct.unpack("<H", data[offset : offset + 2])
        offset += 2
        item_ids.append(data[offset : offset + length].decode("utf-8"))
        offset += length
    matrix = np.frombuffer(
        data[offset : offset + count * dim * 4], dtype="<f4"
    ).reshape(count, dim)
    return RetrievalIndex(item_ids=item_ids, matrix=matrix.copy())
