"""SVG document model: parsing, serialization, tree addressing.

The parser keeps attribute source order and ignores text nodes, comments,
and processing instructions: only the element tree matters downstream.
Namespace prefixes are kept verbatim so serialization round-trips.
"""

from __future__ import annotations

import copy
import re
from dataclasses import dataclass, field
from xml.parsers import expat

from meol.errors import DuplicateId, MalformedXml, NotAnSvg

_XML_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")


def is_xml_name(value: str) -> bool:
    """True if ``value`` is acceptable as an XML id (colon-free Name subset)."""
    return bool(_XML_NAME_RE.match(value))


@dataclass
class ElementNode:
    tag: str
    attributes: dict[str, str] = field(default_factory=dict)
    children: list["ElementNode"] = field(default_factory=list)
    node_path: list[int] = field(default_factory=list)

    def structurally_equal(self, other: "ElementNode") -> bool:
        if self.tag != other.tag:
            return False
        if list(self.attributes.items()) != list(other.attributes.items()):
            return False
        if len(self.children) != len(other.children):
            return False
        return all(
            a.structurally_equal(b) for a, b in zip(self.children, other.children)
        )

    def walk(self):
        """Yield this node and all descendants in document order."""
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass
class SvgDocument:
    root: ElementNode
    source_text: str
    element_count: int

    def structurally_equal(self, other: "SvgDocument") -> bool:
        return self.root.structurally_equal(other.root)

    def node_at(self, path: list[int]) -> ElementNode | None:
        node = self.root
        for index in path:
            if index < 0 or index >= len(node.children):
                return None
            node = node.children[index]
        return node

    def find_by_id(self, id_value: str) -> ElementNode | None:
        for node in self.root.walk():
            if node.attributes.get("id") == id_value:
                return node
        return None

    def copy(self) -> "SvgDocument":
        return SvgDocument(
            root=copy.deepcopy(self.root),
            source_text=self.source_text,
            element_count=self.element_count,
        )


def reindex(doc: SvgDocument) -> SvgDocument:
    """Recompute node_path and element_count in place after tree edits."""
    count = 0

    def visit(node: ElementNode, path: list[int]):
        nonlocal count
        count += 1
        node.node_path = path
        for i, child in enumerate(node.children):
            visit(child, path + [i])

    visit(doc.root, [])
    doc.element_count = count
    return doc


def check_unique_ids(doc: SvgDocument) -> None:
    """Raise DuplicateId naming both paths if any id value repeats."""
    seen: dict[str, list[int]] = {}
    for node in doc.root.walk():
        id_value = node.attributes.get("id")
        if id_value is None:
            continue
        if id_value in seen:
            raise DuplicateId(id_value, seen[id_value], node.node_path)
        seen[id_value] = node.node_path


def parse_svg(text: str) -> SvgDocument:
    """Parse UTF-8 XML text into an SvgDocument.

    Raises MalformedXml with position info for bad XML, NotAnSvg when the
    root element is not ``svg``, and DuplicateId on repeated id values.
    """
    parser = expat.ParserCreate(namespace_separator=None)
    parser.ordered_attributes = True

    stack: list[ElementNode] = []
    root_holder: list[ElementNode] = []

    def start(name: str, attr_list: list[str]):
        attrs = {
            attr_list[i]: attr_list[i + 1] for i in range(0, len(attr_list), 2)
        }
        node = ElementNode(tag=name, attributes=attrs)
        if stack:
            stack[-1].children.append(node)
        else:
            root_holder.append(node)
        stack.append(node)

    def end(_name: str):
        stack.pop()

    parser.StartElementHandler = start
    parser.EndElementHandler = end

    try:
        parser.Parse(text, True)
    except expat.ExpatError as exc:
        raise MalformedXml(
            expat.errors.messages[exc.code], exc.lineno, exc.offset + 1
        ) from exc

    root = root_holder[0]
    local = root.tag.rsplit(":", 1)[-1]
    if local != "svg":
        raise NotAnSvg(f"root element is <{root.tag}>, expected <svg>")

    doc = SvgDocument(root=root, source_text=text, element_count=0)
    reindex(doc)
    check_unique_ids(doc)
    return doc


def _escape_attr(value: str) -> str:
    return (
        value.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def _serialize_node(node: ElementNode, parts: list[str]) -> None:
    parts.append(f"<{node.tag}")
    for key, value in node.attributes.items():
        parts.append(f' {key}="{_escape_attr(value)}"')
    if not node.children:
        parts.append("/>")
        return
    parts.append(">")
    for child in node.children:
        _serialize_node(child, parts)
    parts.append(f"</{node.tag}>")


def serialize_svg(doc: SvgDocument) -> str:
    """Canonical serialization: self-closing childless elements, attributes
    in stored order, no inserted whitespace."""
    parts: list[str] = []
    _serialize_node(doc.root, parts)
    return "".join(parts)
