"""Render-neutral structural simplification of SVG documents.

Four transforms, applied to a fixpoint:

  T1  flatten groups that carry no attributes
  T2  remove empty groups and defs entries nothing references
  T3  drop identity transforms
  T4  merge a single-child group's transform into a transform-free child

Each transform is render-neutral by construction; simplify() still verifies
the result against the original raster as defense in depth.
"""

from __future__ import annotations

import re

from meol.svg.model import ElementNode, SvgDocument, reindex
from meol.svg.raster import (
    IDENTITY,
    parse_transform,
    rasterize,
    visual_distance,
)

VISUAL_TOLERANCE = 2.0  # max RMSE (0-255 scale) at the 256x256 default canvas

_REF_RE = re.compile(r"url\(#([^)]+)\)")


def is_identity_transform(text: str) -> bool:
    try:
        matrix = parse_transform(text, [])
    except Exception:
        return False
    return all(abs(a - b) < 1e-12 for a, b in zip(matrix, IDENTITY))


def _referenced_ids(root: ElementNode) -> set[str]:
    refs: set[str] = set()
    for node in root.walk():
        for key, value in node.attributes.items():
            refs.update(_REF_RE.findall(value))
            if key in ("href", "xlink:href") and value.startswith("#"):
                refs.add(value[1:])
    return refs


def _local(tag: str) -> str:
    return tag.rsplit(":", 1)[-1]


def flatten_group(parent: ElementNode, index: int) -> bool:
    """T1: replace an attribute-free <g> child with its children."""
    node = parent.children[index]
    if _local(node.tag) != "g" or node.attributes:
        return False
    parent.children[index : index + 1] = node.children
    return True


def remove_if_empty(parent: ElementNode, index: int) -> bool:
    """T2 (groups): drop a childless <g> or <defs>."""
    node = parent.children[index]
    if _local(node.tag) in ("g", "defs") and not node.children:
        del parent.children[index]
        return True
    return False


def drop_identity_transform(node: ElementNode) -> bool:
    """T3: remove a transform attribute that is the identity."""
    text = node.attributes.get("transform")
    if text is not None and is_identity_transform(text):
        del node.attributes["transform"]
        return True
    return False


def merge_single_child_transform(node: ElementNode) -> bool:
    """T4: push a single-child group's transform down onto the child."""
    if (
        _local(node.tag) == "g"
        and "transform" in node.attributes
        and len(node.children) == 1
        and "transform" not in node.children[0].attributes
    ):
        child = node.children[0]
        child.attributes = {
            "transform": node.attributes["transform"],
            **child.attributes,
        }
        del node.attributes["transform"]
        return True
    return False


def _one_pass(doc: SvgDocument) -> bool:
    changed = False
    referenced = _referenced_ids(doc.root)

    def visit(parent: ElementNode):
        nonlocal changed
        i = 0
        while i < len(parent.children):
            node = parent.children[i]
            if drop_identity_transform(node):
                changed = True
            if merge_single_child_transform(node):
                changed = True
            # unreferenced defs entries are invisible to the renderer
            if _local(parent.tag) == "defs":
                id_value = node.attributes.get("id")
                if id_value is None or id_value not in referenced:
                    del parent.children[i]
                    changed = True
                    continue
            visit(node)
            if remove_if_empty(parent, i):
                changed = True
                continue
            if flatten_group(parent, i):
                changed = True
                continue
            i += 1

    visit(doc.root)
    return changed


def simplify(doc: SvgDocument) -> SvgDocument:
    """Apply T1-T4 to a fixpoint and verify visual preservation.

    Never increases element_count; idempotent by construction (fixpoint).
    """
    result = doc.copy()
    for _ in range(doc.element_count + 1):
        if not _one_pass(result):
            break
    reindex(result)
    rmse = visual_distance(rasterize(doc), rasterize(result))
    if rmse > VISUAL_TOLERANCE:
        raise AssertionError(
            f"simplify changed rendering (RMSE {rmse:.3f} > {VISUAL_TOLERANCE})"
        )
    return result
