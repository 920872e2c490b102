"""Socket server hosting any backend callable behind the wire protocol."""

from __future__ import annotations

import socketserver
import struct
import threading

from meol.client import Backend
from meol.errors import BackendRejected, MeolError, ProtocolError
from meol.protocol import EmbedResponse, decode_request, encode_response


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        backend: Backend = self.server.backend  # type: ignore[attr-defined]
        while True:
            try:
                header = self._read_exact(4)
            except ConnectionError:
                return
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
                resp = backend(req)
            except (ProtocolError, BackendRejected, MeolError) as exc:
                resp = EmbedResponse(
                    vector=(),
                    dim=0,
                    model_id="error",
                    layer_count=0,
                    token_count=0,
                    request_id=request_id,
                    error=f"{type(exc).__name__}: {exc}",
                )
            try:
                self.request.sendall(encode_response(resp))
            except OSError:
                return

    def _read_exact(self, n: int) -> bytes | None:
        chunks = b""
        while len(chunks) < n:
            chunk = self.request.recv(n - len(chunks))
            if not chunk:
                return None if not chunks else chunks
            chunks += chunk
        return chunks


class EmbedServer(socketserver.ThreadingTCPServer):
    """Serves a backend callable; each connection handled independently."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address: tuple[str, int], backend: Backend):
        super().__init__(address, _Handler)
        self.backend = backend

    def serve_in_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread
