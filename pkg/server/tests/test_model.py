from __future__ import annotations

import base64
import struct

import numpy as np

from mllm_server.config import ServerConfig
from mllm_server.model import TinyMultimodalModel
from mllm_server.protocol import EmbedRequest, decode_image
from mllm_server.service import serve_embed

PROMPT = 'This "a red bird" expresses the following meaning in one word:'

CONFIG = ServerConfig()


def _image_b64(width: int = 8, height: int = 8, value: int = 200) -> str:
    pixels = bytes([value, 0, 0, 255]) * (width * height)
    raw = b"MEOLIMG1" + struct.pack(">II", width, height) + pixels
    return base64.b64encode(raw).decode()


def _embed(model, **kwargs):
    kwargs.setdefault("text", PROMPT)
    kwargs.setdefault("request_id", "t")
    return serve_embed(model, EmbedRequest(**kwargs), CONFIG)


def test_shapes_and_metadata(model):
    resp = _embed(model)
    assert resp.error is None
    assert resp.dim == model.dim == len(resp.vector)
    assert resp.layer_count == model.layer_count == 5
    assert resp.token_count == len(PROMPT.encode("utf-8"))
    assert resp.request_id == "t"


def test_repeat_requests_byte_identical(model):
    first = _embed(model)
    for _ in range(25):
        assert _embed(model) == first


def test_fresh_model_instance_agrees(model):
    other = TinyMultimodalModel()
    assert _embed(model).vector == _embed(other).vector


def test_layer_offsets_differ(model):
    last = np.asarray(_embed(model, layer_offset=0).vector)
    penultimate = np.asarray(_embed(model, layer_offset=1).vector)
    assert not np.allclose(last, penultimate)


def test_layer_indexing_is_forward_order(model):
    states = model.hidden_states(PROMPT, None)
    assert len(states) == model.layer_count
    resp = _embed(model, layer_offset=1)
    expected = states[model.layer_count - 2][-1]
    assert np.allclose(np.asarray(resp.vector), expected)


def test_poolings_differ(model):
    last_token = np.asarray(_embed(model, pooling="last_token").vector)
    mean = np.asarray(_embed(model, pooling="mean_all_tokens").vector)
    assert not np.allclose(last_token, mean)
    states = model.hidden_states(PROMPT, None)
    assert np.allclose(mean, states[-2].mean(axis=0))


def test_image_attachment_changes_vector(model):
    plain = _embed(model)
    with_image = _embed(model, image_b64=_image_b64())
    assert plain.vector != with_image.vector
    assert with_image.token_count == plain.token_count + 4  # patch prefix
    red = _embed(model, image_b64=_image_b64(value=250))
    dark = _embed(model, image_b64=_image_b64(value=10))
    assert red.vector != dark.vector


def test_image_decoding_matches_container(model):
    image = decode_image(_image_b64(4, 4))
    assert image.shape == (4, 4, 4)
    states = model.hidden_states("x", image)
    assert states[0].shape[0] == 4 + 1  # 4 patch tokens + 1 text byte


def test_svg_code_is_appended_when_absent(model):
    bare = _embed(model, text="label:")
    with_svg = _embed(model, text="label:", svg_code="<svg/>")
    already_inline = _embed(model, text="label:\n<svg/>", svg_code="<svg/>")
    assert bare.vector != with_svg.vector
    assert with_svg.vector == already_inline.vector


def test_layer_offset_out_of_range_is_error(model):
    resp = _embed(model, layer_offset=model.layer_count)
    assert resp.error is not None and "layer_count" in resp.error
    assert resp.dim == 0 and resp.vector == ()


def test_context_overflow_is_error(model):
    tight = ServerConfig(max_context_tokens=8)
    resp = serve_embed(
        model, EmbedRequest(text="far too many bytes here", request_id="t"), tight
    )
    assert resp.error is not None and "ContextOverflow" in resp.error


def test_chat_template_switch_changes_vector(model):
    raw = _embed(model)
    templated = serve_embed(
        model, EmbedRequest(text=PROMPT, request_id="t"),
        ServerConfig(apply_chat_template=True),
    )
    assert templated.error is None
    assert raw.vector != templated.vector
