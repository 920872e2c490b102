"""Request handling: prompt assembly, hidden-state selection, and the server.

The model is a single shared instance; forward passes are serialized through
a lock while the socket layer multiplexes connections in threads.
"""

from __future__ import annotations

import socketserver
import struct
import threading

import numpy as np

from mllm_server.config import ServerConfig
from mllm_server.model import ModelAdapter
from mllm_server.protocol import (
    EmbedRequest,
    EmbedResponse,
    WireError,
    decode_image,
    decode_request,
    encode_response,
)

CHAT_TEMPLATE = "<|user|>\n{text}\n<|assistant|>\n"


class RequestRejected(Exception):
    """Request is well-formed on the wire but unservable."""


def _select(states: list[np.ndarray], layer_offset: int, pooling: str) -> np.ndarray:
    if layer_offset >= len(states):
        raise RequestRejected(
            f"layer_offset {layer_offset} >= layer_count {len(states)}"
        )
    state = states[len(states) - 1 - layer_offset]
    if pooling == "mean_all_tokens":
        return state.mean(axis=0)
    return state[-1]


def serve_embed(
    model: ModelAdapter, req: EmbedRequest, config: ServerConfig
) -> EmbedResponse:
    """Embed one request; any rejection is reported in the error field."""

    def failure(message: str) -> EmbedResponse:
        return EmbedResponse(
            vector=(), dim=0, model_id=model.model_id,
            layer_count=model.layer_count, token_count=0,
            request_id=req.request_id, error=message,
        )

    try:
        text = req.text
        if req.svg_code and req.svg_code not in text:
            text = f"{text}\n{req.svg_code}"
        if config.apply_chat_template:
            text = CHAT_TEMPLATE.format(text=text)
        image = decode_image(req.image_b64) if req.image_b64 else None

        budget = config.max_context_tokens
        if len(text.encode("utf-8")) > budget:
            raise RequestRejected(
                f"ContextOverflow: prompt exceeds {budget} tokens"
            )
        states = model.hidden_states(text, image)
        vector = _select(states, req.layer_offset, req.pooling)
    except (RequestRejected, WireError) as exc:
        return failure(str(exc))
    except Exception as exc:  # ModelError passthrough
        return failure(f"ModelError: {exc}")

    return EmbedResponse(
        vector=tuple(float(v) for v in vector),
        dim=int(vector.shape[0]),
        model_id=model.model_id,
        layer_count=len(states),
        token_count=int(states[0].shape[0]),
        request_id=req.request_id,
    )


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        server: EmbedServer = self.server  # type: ignore[assignment]
        while True:
            header = self._read_exact(4)
            if header is None:
                return
            (length,) = struct.unpack(">I", header)
            body = self._read_exact(length)
            if body is None:
                return
            request_id = ""
            try:
                req = decode_request(header + body)
                request_id = req.request_id
                with server.model_lock:
                    resp = serve_embed(server.model, req, server.config)
            except WireError as exc:
                resp = EmbedResponse(
                    vector=(), dim=0, model_id=server.model.model_id,
                    layer_count=server.model.layer_count, token_count=0,
                    request_id=request_id, error=f"WireError: {exc}",
                )
            try:
                self.request.sendall(encode_response(resp))
            except OSError:
                return

    def _read_exact(self, n: int) -> bytes | None:
        data = b""
        while len(data) < n:
            try:
                chunk = self.request.recv(n - len(data))
            except ConnectionError:
                return None
            if not chunk:
                return None
            data += chunk
        return data


class EmbedServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, config: ServerConfig, model: ModelAdapter):
        super().__init__(config.address, _Handler)
        self.config = config
        self.model = model
        self.model_lock = threading.Lock()

    def serve_in_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread
