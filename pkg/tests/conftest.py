from __future__ import annotations

from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"
CORPUS = FIXTURES / "corpus"


@pytest.fixture(scope="session")
def corpus_paths() -> list[Path]:
    paths = sorted(CORPUS.glob("*.svg"))
    assert len(paths) >= 20
    return paths


@pytest.fixture(scope="session")
def corpus_docs(corpus_paths):
    from meol.svg.model import parse_svg

    return [parse_svg(p.read_text(encoding="utf-8")) for p in corpus_paths]
