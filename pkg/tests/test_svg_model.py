from __future__ import annotations

import pytest

from meol.errors import DuplicateId, MalformedXml, NotAnSvg
from meol.svg.model import parse_svg, serialize_svg


def test_parse_basic_circle():
    doc = parse_svg('<svg><circle cx="50" cy="50" r="40"/></svg>')
    assert doc.element_count == 2
    circle = doc.root.children[0]
    assert circle.tag == "circle"
    assert circle.node_path == [0]
    assert list(circle.attributes.items()) == [("cx", "50"), ("cy", "50"), ("r", "40")]


def test_parse_empty_root():
    doc = parse_svg("<svg/>")
    assert doc.element_count == 1
    assert doc.root.children == []


def test_duplicate_id_reports_both_paths():
    with pytest.raises(DuplicateId) as err:
        parse_svg('<svg><g id="a"/><g id="a"/></svg>')
    assert err.value.first_path == [0]
    assert err.value.second_path == [1]


def test_malformed_xml_has_position():
    with pytest.raises(MalformedXml) as err:
        parse_svg("<svg><circle></svg>")
    assert err.value.line == 1
    assert err.value.column > 0


def test_not_an_svg():
    with pytest.raises(NotAnSvg):
        parse_svg("<html><svg/></html>")


def test_round_trip_structural_equality():
    text = '<svg><g id="x"><rect/></g></svg>'
    doc = parse_svg(text)
    assert parse_svg(serialize_svg(doc)).structurally_equal(doc)


def test_attribute_order_preserved():
    doc = parse_svg('<svg><circle r="1" cy="2" cx="3"/></svg>')
    assert serialize_svg(doc) == '<svg><circle r="1" cy="2" cx="3"/></svg>'


def test_canonical_empty_root():
    assert serialize_svg(parse_svg("<svg></svg>")) == "<svg/>"


def test_attribute_escaping_round_trips():
    doc = parse_svg('<svg><text id="q" data-note="a &amp; b &lt; &quot;c&quot;"/></svg>')
    again = parse_svg(serialize_svg(doc))
    assert again.structurally_equal(doc)


def test_corpus_round_trip(corpus_paths):
    from meol.svg.model import parse_svg

    for path in corpus_paths:
        doc = parse_svg(path.read_text(encoding="utf-8"))
        assert parse_svg(serialize_svg(doc)).structurally_equal(doc), path.name


def test_node_path_addressing():
    doc = parse_svg("<svg><g><rect/><circle/></g><path/></svg>")
    assert doc.node_at([0, 1]).tag == "circle"
    assert doc.node_at([1]).tag == "path"
    assert doc.node_at([5]) is None
