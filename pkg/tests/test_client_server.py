from __future__ import annotations

import concurrent.futures

import pytest

from meol.client import SocketBackend, resolve_backend
from meol.errors import BackendRejected, BackendUnavailable
from meol.mocks import MOCK_LAYER_COUNT, mock_hash_backend
from meol.protocol import EmbedRequest
from meol.server import EmbedServer


@pytest.fixture(scope="module")
def server():
    srv = EmbedServer(("127.0.0.1", 0), mock_hash_backend)
    srv.serve_in_background()
    yield srv
    srv.shutdown()
    srv.server_close()


@pytest.fixture(scope="module")
def backend(server):
    client = SocketBackend("127.0.0.1", server.server_address[1])
    yield client
    client.close()


def test_wire_matches_in_process(backend):
    req = EmbedRequest(text="a red bird", request_id="r1")
    assert backend(req).vector == mock_hash_backend(req).vector


def test_sequential_requests_reuse_connection(backend):
    for i in range(10):
        resp = backend(EmbedRequest(text=f"n{i}", request_id=f"r{i}"))
        assert resp.dim == 64


def test_concurrent_fanout(backend):
    def one(i: int):
        return backend(EmbedRequest(text=f"q{i}", request_id=f"c{i}"))

    with concurrent.futures.ThreadPoolExecutor(max_workers=8) as pool:
        responses = list(pool.map(one, range(32)))
    for i, resp in enumerate(responses):
        assert resp == mock_hash_backend(EmbedRequest(text=f"q{i}", request_id=f"c{i}"))


def test_backend_error_surfaces_as_rejection(backend):
    with pytest.raises(BackendRejected):
        backend(EmbedRequest(text="x", layer_offset=MOCK_LAYER_COUNT, request_id="r"))


def test_unreachable_server():
    client = SocketBackend("127.0.0.1", 1, pool_size=1, timeout=0.5)
    with pytest.raises(BackendUnavailable):
        client(EmbedRequest(text="x", request_id="r"))


def test_resolve_backend_specs(server, monkeypatch):
    assert resolve_backend("mock-hash") is mock_hash_backend
    remote = resolve_backend(f"127.0.0.1:{server.server_address[1]}")
    req = EmbedRequest(text="hi", request_id="r")
    assert remote(req) == mock_hash_backend(req)

    monkeypatch.delenv("META_EMBED_ADDR", raising=False)
    with pytest.raises(BackendUnavailable):
        resolve_backend(None)
    monkeypatch.setenv("META_EMBED_ADDR", "mock-hash")
    assert resolve_backend(None) is mock_hash_backend
    with pytest.raises(BackendUnavailable):
        resolve_backend("not a spec")
