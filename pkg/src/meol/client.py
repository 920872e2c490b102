"""Backend handles: in-process mocks and a pooled socket client.

A backend handle is any callable mapping EmbedRequest -> EmbedResponse.
``resolve_backend`` turns a CLI/config string into one: a mock name runs
in-process, anything of the form host:port goes over the wire protocol.
The META_EMBED_ADDR environment variable supplies the default address.
"""

from __future__ import annotations

import os
import queue
import socket
import struct
from typing import Callable

from meol.errors import BackendRejected, BackendUnavailable, ProtocolError
from meol.mocks import MOCK_BACKENDS
from meol.protocol import EmbedRequest, EmbedResponse, decode_response, encode_request

ADDR_ENV_VAR = "META_EMBED_ADDR"

Backend = Callable[[EmbedRequest], EmbedResponse]


def read_frame(sock: socket.socket) -> bytes:
    header = _read_exact(sock, 4)
    (length,) = struct.unpack(">I", header)
    return header + _read_exact(sock, length)


def _read_exact(sock: socket.socket, n: int) -> bytes:
    chunks = []
    remaining = n
    while remaining:
        chunk = sock.recv(remaining)
        if not chunk:
            raise ProtocolError("connection closed mid-frame")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


class SocketBackend:
    """Client for a wire-protocol embedding server, with connection pooling.

    One in-flight request per connection; up to ``pool_size`` connections are
    kept open so callers may fan out concurrently.
    """

    def __init__(self, host: str, port: int, pool_size: int = 4, timeout: float = 120.0):
        self.host = host
        self.port = port
        self.timeout = timeout
        self._pool: queue.Queue = queue.Queue()
        for _ in range(pool_size):
            self._pool.put(None)  # lazily opened slots

    def _connect(self) -> socket.socket:
        try:
            sock = socket.create_connection((self.host, self.port), timeout=self.timeout)
        except OSError as exc:
            raise BackendUnavailable(f"{self.host}:{self.port}: {exc}") from exc
        return sock

    def __call__(self, req: EmbedRequest) -> EmbedResponse:
        sock = self._pool.get()
        try:
            if sock is None:
                sock = self._connect()
            try:
                sock.sendall(encode_request(req))
                frame = read_frame(sock)
            except OSError:
                # retry once on a fresh connection (stale pooled socket)
                sock.close()
                sock = self._connect()
                try:
                    sock.sendall(encode_request(req))
                    frame = read_frame(sock)
                except OSError as exc:
                    sock.close()
                    sock = None
                    raise BackendUnavailable(str(exc)) from exc
            resp = decode_response(frame, expected_request_id=req.request_id)
            if resp.error is not None:
                raise BackendRejected(resp.error)
            return resp
        finally:
            self._pool.put(sock)

    def close(self) -> None:
        while True:
            try:
                sock = self._pool.get_nowait()
            except queue.Empty:
                return
            if sock is not None:
                sock.close()


def resolve_backend(spec: str | None, pool_size: int = 4) -> Backend:
    """Turn a backend spec string into a callable handle.

    ``mock-hash`` / ``mock-semantic`` run in-process; ``host:port`` opens a
    socket client. With no spec, META_EMBED_ADDR is consulted.
    """
    if spec is None:
        spec = os.environ.get(ADDR_ENV_VAR)
    if spec is None:
        raise BackendUnavailable(
            f"no backend given and {ADDR_ENV_VAR} is not set"
        )
    if spec in MOCK_BACKENDS:
        return MOCK_BACKENDS[spec]
    host, sep, port = spec.rpartition(":")
    if not sep or not port.isdigit():
        raise BackendUnavailable(f"bad backend spec {spec!r}")
    return SocketBackend(host or "127.0.0.1", int(port), pool_size=pool_size)
