"""Identifier inventory and sanitization for SVG elements."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from meol.svg.model import SvgDocument, is_xml_name

# Shape and grouping tags whose ids carry (or should carry) meaning.
LABELED_TAGS = {
    "g", "path", "circle", "rect", "ellipse", "polygon", "polyline", "line", "text",
}

# Editor-generated placeholder patterns such as "Layer_1" or "path123".
_NON_DESCRIPTIVE_RE = re.compile(
    r"^(layer|path|group|g|svg|rect|circle|shape|vector|xmlid)[-_]?\d*$",
    re.IGNORECASE,
)
_DIGITS_UNDERSCORES_RE = re.compile(r"^[\d_]+$")


def is_non_descriptive(id_value: str) -> bool:
    return bool(
        _NON_DESCRIPTIVE_RE.match(id_value)
        or _DIGITS_UNDERSCORES_RE.match(id_value)
    )


@dataclass
class IdReport:
    descriptive: list[tuple[list[int], str]] = field(default_factory=list)
    non_descriptive: list[tuple[list[int], str]] = field(default_factory=list)
    missing: list[list[int]] = field(default_factory=list)


def inventory_ids(doc: SvgDocument) -> IdReport:
    """Classify every labeled-tag node as descriptive / non-descriptive / missing."""
    report = IdReport()
    for node in doc.root.walk():
        tag = node.tag.rsplit(":", 1)[-1]
        if tag not in LABELED_TAGS:
            continue
        id_value = node.attributes.get("id")
        if id_value is None:
            report.missing.append(node.node_path)
        elif is_non_descriptive(id_value):
            report.non_descriptive.append((node.node_path, id_value))
        else:
            report.descriptive.append((node.node_path, id_value))
    return report


def sanitize_id(raw: str, taken: set[str]) -> str:
    """Normalize an untrusted label into a unique XML-safe id.

    Lowercase, spaces to underscores, non-Name characters stripped; a numeric
    suffix (_2, _3, ...) resolves collisions against ``taken``.
    """
    value = raw.strip().lower().replace(" ", "_")
    value = re.sub(r"[^a-z0-9_.\-]", "", value)
    value = value.strip("._-") or "item"
    if not is_xml_name(value):
        value = f"n{value}"
    candidate = value
    suffix = 2
    while candidate in taken:
        candidate = f"{value}_{suffix}"
        suffix += 1
    return candidate
