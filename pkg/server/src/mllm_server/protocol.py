"""Wire protocol: 4-byte big-endian length prefix, then a UTF-8 JSON body.

One request maps to one response; unknown JSON fields are ignored so either
side can add fields without breaking the other. Image attachments travel as
base64 of a fixed raw-RGBA container (magic, dimensions, pixels).
"""

from __future__ import annotations

import base64
import json
import struct
from dataclasses import dataclass

import numpy as np

POOLINGS = ("last_token", "mean_all_tokens")

_IMAGE_MAGIC = b"MEOLIMG1"


class WireError(Exception):
    """Malformed frame or message body."""


@dataclass(frozen=True)
class EmbedRequest:
    text: str
    image_b64: str | None = None
    svg_code: str | None = None
    layer_offset: int = 1
    pooling: str = "last_token"
    request_id: str = ""


@dataclass(frozen=True)
class EmbedResponse:
    vector: tuple[float, ...]
    dim: int
    model_id: str
    layer_count: int
    token_count: int
    request_id: str
    error: str | None = None


def _frame(body: dict) -> bytes:
    payload = json.dumps(body, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return struct.pack(">I", len(payload)) + payload


def _unframe(data: bytes) -> dict:
    if len(data) < 4:
        raise WireError("frame shorter than its length prefix")
    (length,) = struct.unpack(">I", data[:4])
    if len(data) - 4 != length:
        raise WireError(f"frame body is {len(data) - 4} bytes, prefix says {length}")
    try:
        body = json.loads(data[4:].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise WireError(f"frame body is not UTF-8 JSON: {exc}") from exc
    if not isinstance(body, dict):
        raise WireError("frame body is not a JSON object")
    return body


def _require(body: dict, name: str, kinds) -> object:
    if name not in body:
        raise WireError(f"missing field {name!r}")
    value = body[name]
    if not isinstance(value, kinds):
        raise WireError(f"field {name!r} has the wrong type")
    return value


def decode_request(data: bytes) -> EmbedRequest:
    body = _unframe(data)
    pooling = _require(body, "pooling", str)
    if pooling not in POOLINGS:
        raise WireError(f"unknown pooling {pooling!r}")
    image_b64 = body.get("image_b64")
    svg_code = body.get("svg_code")
    if image_b64 is not None and not isinstance(image_b64, str):
        raise WireError("field 'image_b64' has the wrong type")
    if svg_code is not None and not isinstance(svg_code, str):
        raise WireError("field 'svg_code' has the wrong type")
    layer_offset = _require(body, "layer_offset", int)
    if isinstance(layer_offset, bool) or layer_offset < 0:
        raise WireError("field 'layer_offset' must be a non-negative integer")
    return EmbedRequest(
        text=_require(body, "text", str),
        image_b64=image_b64,
        svg_code=svg_code,
        layer_offset=layer_offset,
        pooling=pooling,
        request_id=_require(body, "request_id", str),
    )


def encode_response(resp: EmbedResponse) -> bytes:
    return _frame(
        {
            "vector": list(resp.vector),
            "dim": resp.dim,
            "model_id": resp.model_id,
            "layer_count": resp.layer_count,
            "token_count": resp.token_count,
            "request_id": resp.request_id,
            "error": resp.error,
        }
    )


def encode_request(req: EmbedRequest) -> bytes:
    """Client-side encoding, used by the tests to probe the server."""
    return _frame(
        {
            "text": req.text,
            "image_b64": req.image_b64,
            "svg_code": req.svg_code,
            "layer_offset": req.layer_offset,
            "pooling": req.pooling,
            "request_id": req.request_id,
        }
    )


def decode_response(data: bytes) -> EmbedResponse:
    body = _unframe(data)
    vector = _require(body, "vector", list)
    dim = _require(body, "dim", int)
    if len(vector) != dim:
        raise WireError(f"vector has {len(vector)} entries, dim says {dim}")
    error = body.get("error")
    if error is not None and not isinstance(error, str):
        raise WireError("field 'error' has the wrong type")
    return EmbedResponse(
        vector=tuple(float(v) for v in vector),
        dim=dim,
        model_id=_require(body, "model_id", str),
        layer_count=_require(body, "layer_count", int),
        token_count=_require(body, "token_count", int),
        request_id=_require(body, "request_id", str),
        error=error,
    )


def decode_image(image_b64: str) -> np.ndarray:
    """Decode the raw-RGBA bitmap container into an (H, W, 4) uint8 array."""
    raw = base64.b64decode(image_b64)
    if raw[:8] != _IMAGE_MAGIC:
        raise WireError("image attachment is not in the bitmap container format")
    width, height = struct.unpack(">II", raw[8:16])
    pixels = raw[16:]
    if len(pixels) != width * height * 4:
        raise WireError("image attachment has a truncated pixel buffer")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width, 4)
