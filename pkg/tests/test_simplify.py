from __future__ import annotations

from meol.svg.model import ElementNode, parse_svg, serialize_svg
from meol.svg.raster import rasterize, visual_distance
from meol.svg.simplify import VISUAL_TOLERANCE, simplify


def count_elements(root: ElementNode) -> int:
    """Independent tree walk, separate from SvgDocument bookkeeping."""
    return 1 + sum(count_elements(child) for child in root.children)


def test_flatten_attribute_free_groups():
    doc = parse_svg("<svg><g><g><rect/></g></g></svg>")
    assert serialize_svg(simplify(doc)) == "<svg><rect/></svg>"


def test_identity_transform_removed():
    doc = parse_svg('<svg><g transform="translate(0,0)"><circle r="1"/></g></svg>')
    out = simplify(doc)
    assert "transform" not in serialize_svg(out)


def test_empty_groups_removed_exactly():
    doc = parse_svg('<svg><g/><circle r="2" fill="red"/><g/><g/></svg>')
    out = simplify(doc)
    assert count_elements(doc.root) - count_elements(out.root) == 3


def test_merge_single_child_transform():
    doc = parse_svg(
        '<svg viewBox="0 0 10 10"><g transform="translate(2,2)">'
        '<rect width="4" height="4" fill="blue"/></g></svg>'
    )
    out = simplify(doc)
    assert serialize_svg(out) == (
        '<svg viewBox="0 0 10 10"><rect transform="translate(2,2)" '
        'width="4" height="4" fill="blue"/></svg>'
    )


def test_attributed_groups_not_flattened():
    doc = parse_svg(
        '<svg viewBox="0 0 10 10"><g fill="red"><circle cx="5" cy="5" r="3"/>'
        '<rect width="2" height="2"/></g></svg>'
    )
    out = simplify(doc)
    assert out.root.children[0].tag == "g"


def test_unreferenced_defs_entries_removed():
    doc = parse_svg('<svg><defs><circle id="spare" r="1"/></defs><rect width="2" height="2"/></svg>')
    out = simplify(doc)
    assert serialize_svg(out) == '<svg><rect width="2" height="2"/></svg>'


def test_corpus_properties(corpus_docs):
    for doc in corpus_docs:
        out = simplify(doc)
        assert out.element_count <= doc.element_count
        assert simplify(out).structurally_equal(out)  # idempotent
        rmse = visual_distance(rasterize(doc), rasterize(out))
        assert rmse <= VISUAL_TOLERANCE
