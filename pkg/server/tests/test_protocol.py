from __future__ import annotations

import base64
import json
import random
import struct

import numpy as np
import pytest

from mllm_server.protocol import (
    EmbedRequest,
    EmbedResponse,
    WireError,
    decode_image,
    decode_request,
    decode_response,
    encode_request,
    encode_response,
)


def _random_request(rng: random.Random) -> EmbedRequest:
    return EmbedRequest(
        text="".join(chr(rng.randint(32, 0x24F)) for _ in range(rng.randint(0, 60))),
        image_b64=None if rng.random() < 0.5 else base64.b64encode(b"x").decode(),
        svg_code=None if rng.random() < 0.5 else "<svg/>",
        layer_offset=rng.randint(0, 40),
        pooling=rng.choice(["last_token", "mean_all_tokens"]),
        request_id=f"r{rng.randint(0, 10**9)}",
    )


def test_request_round_trip_randomized():
    rng = random.Random(31)
    for _ in range(300):
        req = _random_request(rng)
        assert decode_request(encode_request(req)) == req


def test_response_round_trip_randomized():
    rng = random.Random(32)
    for _ in range(300):
        vector = tuple(rng.uniform(-2, 2) for _ in range(rng.randint(0, 24)))
        resp = EmbedResponse(
            vector=vector, dim=len(vector), model_id="tiny-mm",
            layer_count=5, token_count=rng.randint(0, 500),
            request_id=f"q{rng.randint(0, 10**6)}",
            error=None if rng.random() < 0.8 else "ModelError: oops",
        )
        assert decode_response(encode_response(resp)) == resp


def test_length_prefix_big_endian():
    frame = encode_request(EmbedRequest(text="x", request_id="r"))
    assert struct.unpack(">I", frame[:4])[0] == len(frame) - 4


def test_unknown_fields_ignored():
    frame = encode_request(EmbedRequest(text="x", request_id="r"))
    body = json.loads(frame[4:])
    body["future_field"] = [1, 2, 3]
    payload = json.dumps(body).encode()
    req = decode_request(struct.pack(">I", len(payload)) + payload)
    assert req.text == "x"


@pytest.mark.parametrize("drop", ["text", "pooling", "layer_offset", "request_id"])
def test_missing_required_field_rejected(drop):
    frame = encode_request(EmbedRequest(text="x", request_id="r"))
    body = json.loads(frame[4:])
    del body[drop]
    payload = json.dumps(body).encode()
    with pytest.raises(WireError):
        decode_request(struct.pack(">I", len(payload)) + payload)


def test_dim_vector_mismatch_rejected():
    frame = encode_response(EmbedResponse(
        vector=(1.0, 2.0), dim=2, model_id="m", layer_count=5,
        token_count=3, request_id="r",
    ))
    body = json.loads(frame[4:])
    body["dim"] = 3
    payload = json.dumps(body).encode()
    with pytest.raises(WireError):
        decode_response(struct.pack(">I", len(payload)) + payload)


def test_truncated_and_garbage_frames_rejected():
    frame = encode_request(EmbedRequest(text="x", request_id="r"))
    with pytest.raises(WireError):
        decode_request(frame[:-2])
    with pytest.raises(WireError):
        decode_request(struct.pack(">I", 3) + b"{{{")


def test_decode_image_container():
    pixels = bytes(range(8)) * 8  # 4x4 RGBA
    raw = b"MEOLIMG1" + struct.pack(">II", 4, 4) + pixels
    image = decode_image(base64.b64encode(raw).decode())
    assert image.shape == (4, 4, 4) and image.dtype == np.uint8
    assert image.tobytes() == pixels
    with pytest.raises(WireError):
        decode_image(base64.b64encode(b"JUNKJUNK" + pixels).decode())
    with pytest.raises(WireError):
        decode_image(base64.b64encode(raw[:-4]).decode())


def test_cross_implementation_wire_compatibility():
    """Frames from the retrieval toolkit's codec decode identically here."""
    meol_protocol = pytest.importorskip("meol.protocol")
    their_req = meol_protocol.EmbedRequest(
        text="a red bird", svg_code="<svg/>", layer_offset=1,
        pooling="last_token", request_id="x1",
    )
    ours = decode_request(meol_protocol.encode_request(their_req))
    assert (ours.text, ours.svg_code, ours.layer_offset, ours.pooling,
            ours.request_id) == ("a red bird", "<svg/>", 1, "last_token", "x1")

    our_resp = EmbedResponse(
        vector=(0.25, -0.5), dim=2, model_id="tiny-mm",
        layer_count=5, token_count=7, request_id="x1",
    )
    theirs = meol_protocol.decode_response(
        encode_response(our_resp), expected_request_id="x1"
    )
    assert theirs.vector == (0.25, -0.5) and theirs.model_id == "tiny-mm"
