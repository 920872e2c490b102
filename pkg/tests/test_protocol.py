from __future__ import annotations

import json
import struct

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meol.errors import ProtocolError
from meol.protocol import (
    EmbedRequest,
    EmbedResponse,
    decode_request,
    decode_response,
    encode_request,
    encode_response,
)

texts = st.text(max_size=200)
optional_texts = st.none() | st.text(max_size=100)


@st.composite
def requests(draw):
    return EmbedRequest(
        text=draw(texts),
        image_b64=draw(optional_texts),
        svg_code=draw(optional_texts),
        layer_offset=draw(st.integers(min_value=0, max_value=100)),
        pooling=draw(st.sampled_from(["last_token", "mean_all_tokens"])),
        request_id=draw(st.text(max_size=32)),
    )


@st.composite
def responses(draw):
    vector = tuple(
        draw(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=32),
                      min_size=0, max_size=16))
    )
    return EmbedResponse(
        vector=vector,
        dim=len(vector),
        model_id=draw(st.text(max_size=32)),
        layer_count=draw(st.integers(min_value=1, max_value=200)),
        token_count=draw(st.integers(min_value=0, max_value=10_000)),
        request_id=draw(st.text(max_size=32)),
    )


@settings(max_examples=200, deadline=None)
@given(requests())
def test_request_round_trip(req):
    assert decode_request(encode_request(req)) == req


@settings(max_examples=200, deadline=None)
@given(responses())
def test_response_round_trip(resp):
    assert decode_response(encode_response(resp)) == resp


def test_minimal_request_round_trip():
    req = EmbedRequest(text="hi", request_id="r")
    assert decode_request(encode_request(req)) == req


def test_dim_mismatch_rejected():
    frame = encode_response(
        EmbedResponse(vector=(0.0,) * 8, dim=8, model_id="m",
                      layer_count=2, token_count=1, request_id="r")
    )
    body = json.loads(frame[4:])
    body["vector"] = body["vector"][:7]
    payload = json.dumps(body).encode()
    with pytest.raises(ProtocolError):
        decode_response(struct.pack(">I", len(payload)) + payload)


def test_unknown_fields_ignored():
    frame = encode_response(
        EmbedResponse(vector=(1.0,), dim=1, model_id="m",
                      layer_count=2, token_count=1, request_id="r")
    )
    body = json.loads(frame[4:])
    body["debug"] = {"extra": True}
    payload = json.dumps(body).encode()
    resp = decode_response(struct.pack(">I", len(payload)) + payload)
    assert resp.vector == (1.0,)


def test_missing_field_rejected():
    frame = encode_request(EmbedRequest(text="x", request_id="r"))
    body = json.loads(frame[4:])
    del body["pooling"]
    payload = json.dumps(body).encode()
    with pytest.raises(ProtocolError):
        decode_request(struct.pack(">I", len(payload)) + payload)


def test_echo_mismatch_rejected():
    frame = encode_response(
        EmbedResponse(vector=(1.0,), dim=1, model_id="m",
                      layer_count=2, token_count=1, request_id="other")
    )
    with pytest.raises(ProtocolError):
        decode_response(frame, expected_request_id="mine")


def test_length_prefix_is_big_endian():
    frame = encode_request(EmbedRequest(text="x", request_id="r"))
    assert struct.unpack(">I", frame[:4])[0] == len(frame) - 4


def test_truncated_frame_rejected():
    frame = encode_request(EmbedRequest(text="x", request_id="r"))
    with pytest.raises(ProtocolError):
        decode_request(frame[:-1])
