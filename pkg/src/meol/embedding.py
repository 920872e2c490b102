"""Turn rendered prompts into embedding records via a backend handle."""

from __future__ import annotations

import base64
import math
import struct
import uuid
from dataclasses import dataclass

import numpy as np

from meol.client import Backend
from meol.errors import NonFiniteVector, ZeroVector
from meol.prompts import PromptPayload
from meol.protocol import EmbedRequest
from meol.svg.raster import RasterImage

_IMAGE_MAGIC = b"MEOLIMG1"


def encode_image_b64(image: RasterImage) -> str:
    """Lossless bitmap wire encoding: magic, dimensions, raw RGBA, base64."""
    raw = _IMAGE_MAGIC + struct.pack(">II", image.width, image.height) + image.pixels
    return base64.b64encode(raw).decode("ascii")


def decode_image_b64(data: str) -> RasterImage:
    raw = base64.b64decode(data)
    if raw[:8] != _IMAGE_MAGIC:
        raise ValueError("not a wire-encoded bitmap")
    width, height = struct.unpack(">II", raw[8:16])
    return RasterImage(width, height, raw[16:])


@dataclass(frozen=True)
class HiddenStateSelector:
    """Which hidden state becomes the embedding.

    layer_offset counts back from the last layer (0 = last, 1 = penultimate);
    pooling picks the final token or the mean over all tokens.
    """

    layer_offset: int = 1
    pooling: str = "last_token"


@dataclass
class EmbeddingRecord:
    vector: np.ndarray
    dim: int
    model_id: str
    selector: HiddenStateSelector
    template_id: str
    item_id: str


def embed(
    backend: Backend,
    payload: PromptPayload,
    selector: HiddenStateSelector = HiddenStateSelector(),
    item_id: str = "",
) -> EmbeddingRecord:
    """Send one prompt to the backend and wrap the response with provenance."""
    req = EmbedRequest(
        text=payload.text_segment,
        image_b64=(
            encode_image_b64(payload.image_attachment)
            if payload.image_attachment is not None
            else None
        ),
        svg_code=payload.svg_segment,
        layer_offset=selector.layer_offset,
        pooling=selector.pooling,
        request_id=uuid.uuid4().hex,
    )
    resp = backend(req)
    vector = np.asarray(resp.vector, dtype=np.float64)
    if not np.all(np.isfinite(vector)):
        raise NonFiniteVector(f"backend {resp.model_id} returned non-finite values")
    return EmbeddingRecord(
        vector=vector,
        dim=resp.dim,
        model_id=resp.model_id,
        selector=selector,
        template_id=payload.template_id,
        item_id=item_id,
    )


def normalize(vector) -> np.ndarray:
    """Scale to unit Euclidean norm, preserving direction."""
    arr = np.asarray(vector, dtype=np.float64)
    norm = float(np.linalg.norm(arr))
    if norm == 0.0 or not math.isfinite(norm):
        raise ZeroVector("cannot normalize a zero or non-finite vector")
    return arr / norm
