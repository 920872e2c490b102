"""Deterministic mock embedding backends.

Two test doubles let the whole pipeline run without a model:

* ``mock_hash_backend`` — a seeded pseudo-random unit vector keyed by a stable
  hash of the request content. Useful wherever only determinism matters.
* ``mock_semantic_backend`` — an L2-normalized character-3-gram count vector of
  the text+SVG content, so similar strings score high cosine and retrieval
  tests have real signal that a brute-force oracle can verify.

Both are pure functions of the request.
"""

from __future__ import annotations

import hashlib
import math

from meol.errors import BackendRejected
from meol.protocol import EmbedRequest, EmbedResponse

HASH_DIM = 64
SEMANTIC_DIM = 512
MOCK_LAYER_COUNT = 33  # typical decoder depth, fixed so fixtures freeze


def _request_key(req: EmbedRequest) -> bytes:
    parts = [
        req.text,
        req.image_b64 or "",
        req.svg_code or "",
        str(req.layer_offset),
        req.pooling,
    ]
    return "\x1f".join(parts).encode("utf-8")


def _check_layer(req: EmbedRequest) -> None:
    if req.layer_offset >= MOCK_LAYER_COUNT:
        raise BackendRejected(
            f"layer_offset {req.layer_offset} >= layer_count {MOCK_LAYER_COUNT}"
        )


def mock_hash_backend(req: EmbedRequest) -> EmbedResponse:
    """Seeded pseudo-random unit vector of dim 64 keyed by the request."""
    _check_layer(req)
    key = _request_key(req)
    values: list[float] = []
    counter = 0
    while len(values) < HASH_DIM:
        block = hashlib.sha256(key + counter.to_bytes(4, "big")).digest()
        for i in range(0, 32, 8):
            if len(values) >= HASH_DIM:
                break
            word = int.from_bytes(block[i : i + 8], "big")
            values.append(word / 2**63 - 1.0)  # uniform in [-1, 1)
        counter += 1
    norm = math.sqrt(sum(v * v for v in values))
    vector = tuple(v / norm for v in values)
    return EmbedResponse(
        vector=vector,
        dim=HASH_DIM,
        model_id="mock-hash",
        layer_count=MOCK_LAYER_COUNT,
        token_count=max(1, len(req.text.split())),
        request_id=req.request_id,
    )


def char_trigrams(text: str) -> list[str]:
    padded = f"  {text} "
    return [padded[i : i + 3] for i in range(len(padded) - 2)]


def _bucket(gram: str) -> int:
    digest = hashlib.sha256(gram.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big") % SEMANTIC_DIM


def semantic_vector(content: str) -> tuple[float, ...]:
    """L2-normalized hashed 3-gram counts; basis vector e_0 for empty input."""
    counts = [0.0] * SEMANTIC_DIM
    if not content:
        counts[0] = 1.0
        return tuple(counts)
    for gram in char_trigrams(content):
        counts[_bucket(gram)] += 1.0
    norm = math.sqrt(sum(c * c for c in counts))
    if norm == 0.0:
        counts[0] = 1.0
        return tuple(counts)
    return tuple(c / norm for c in counts)


def mock_semantic_backend(req: EmbedRequest) -> EmbedResponse:
    """3-gram bag-of-characters embedding over the request's textual content."""
    _check_layer(req)
    content = req.text + (req.svg_code or "")
    vector = semantic_vector(content)
    return EmbedResponse(
        vector=vector,
        dim=SEMANTIC_DIM,
        model_id="mock-semantic",
        layer_count=MOCK_LAYER_COUNT,
        token_count=max(1, len(req.text.split())),
        request_id=req.request_id,
    )


MOCK_BACKENDS = {
    "mock-hash": mock_hash_backend,
    "mock-semantic": mock_semantic_backend,
}
