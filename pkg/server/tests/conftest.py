from __future__ import annotations

import pytest

from mllm_server.config import ServerConfig
from mllm_server.model import TinyMultimodalModel
from mllm_server.service import EmbedServer


@pytest.fixture(scope="session")
def model():
    return TinyMultimodalModel()


@pytest.fixture(scope="session")
def server(model):
    srv = EmbedServer(ServerConfig(port=0), TinyMultimodalModel())
    srv.serve_in_background()
    yield srv
    srv.shutdown()
    srv.server_close()
