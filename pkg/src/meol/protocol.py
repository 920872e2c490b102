"""Embedding wire protocol: length-prefixed JSON request/response messages.

Frame layout (bit-exact): 4-byte big-endian body length, then a UTF-8 JSON
body. One in-flight request per connection. Unknown response fields are
ignored for forward compatibility.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

from meol.errors import ProtocolError

POOLINGS = ("last_token", "mean_all_tokens")


@dataclass(frozen=True)
class EmbedRequest:
    text: str
    image_b64: str | None = None
    svg_code: str | None = None
    layer_offset: int = 1
    pooling: str = "last_token"
    request_id: str = ""

    def validate(self) -> None:
        if self.layer_offset < 0:
            raise ProtocolError("layer_offset must be >= 0")
        if self.pooling not in POOLINGS:
            raise ProtocolError(f"unknown pooling {self.pooling!r}")


@dataclass(frozen=True)
class EmbedResponse:
    vector: tuple[float, ...]
    dim: int
    model_id: str
    layer_count: int
    token_count: int
    request_id: str
    error: str | None = field(default=None, compare=False)

    def validate(self) -> None:
        if self.error is None and self.dim != len(self.vector):
            raise ProtocolError(
                f"dim={self.dim} but vector has {len(self.vector)} entries"
            )


def _frame(body: dict) -> bytes:
    payload = json.dumps(body, separators=(",", ":"), sort_keys=True).encode("utf-8")
    return struct.pack(">I", len(payload)) + payload


def _unframe(data: bytes) -> dict:
    if len(data) < 4:
        raise ProtocolError("frame shorter than length prefix")
    (length,) = struct.unpack(">I", data[:4])
    if len(data) != 4 + length:
        raise ProtocolError(f"declared length {length}, got {len(data) - 4} bytes")
    try:
        body = json.loads(data[4:].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError(f"bad JSON body: {exc}") from exc
    if not isinstance(body, dict):
        raise ProtocolError("body is not a JSON object")
    return body


def _require(body: dict, name: str, kinds) -> object:
    if name not in body:
        raise ProtocolError(f"missing field {name!r}")
    value = body[name]
    if not isinstance(value, kinds):
        raise ProtocolError(f"field {name!r} has wrong type {type(value).__name__}")
    return value


def encode_request(req: EmbedRequest) -> bytes:
    req.validate()
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


def decode_request(data: bytes) -> EmbedRequest:
    body = _unframe(data)
    req = EmbedRequest(
        text=_require(body, "text", str),
        image_b64=body.get("image_b64") if isinstance(body.get("image_b64"), (str, type(None))) else None,
        svg_code=body.get("svg_code") if isinstance(body.get("svg_code"), (str, type(None))) else None,
        layer_offset=_require(body, "layer_offset", int),
        pooling=_require(body, "pooling", str),
        request_id=_require(body, "request_id", str),
    )
    req.validate()
    return req


def encode_response(resp: EmbedResponse) -> bytes:
    resp.validate()
    body = {
        "vector": list(resp.vector),
        "dim": resp.dim,
        "model_id": resp.model_id,
        "layer_count": resp.layer_count,
        "token_count": resp.token_count,
        "request_id": resp.request_id,
    }
    if resp.error is not None:
        body["error"] = resp.error
    return _frame(body)


def decode_response(data: bytes, expected_request_id: str | None = None) -> EmbedResponse:
    body = _unframe(data)
    error = body.get("error")
    if error is not None and not isinstance(error, str):
        raise ProtocolError("field 'error' has wrong type")
    vector = _require(body, "vector", list)
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in vector):
        raise ProtocolError("field 'vector' has non-numeric entries")
    resp = EmbedResponse(
        vector=tuple(float(v) for v in vector),
        dim=_require(body, "dim", int),
        model_id=_require(body, "model_id", str),
        layer_count=_require(body, "layer_count", int),
        token_count=_require(body, "token_count", int),
        request_id=_require(body, "request_id", str),
        error=error,
    )
    resp.validate()
    if expected_request_id is not None and resp.request_id != expected_request_id:
        raise ProtocolError(
            f"request_id echo mismatch: sent {expected_request_id!r}, "
            f"got {resp.request_id!r}"
        )
    return resp
