"""SVG parsing, rasterization, analysis, and structural simplification."""

from meol.svg.ids import IdReport, inventory_ids, is_non_descriptive, sanitize_id
from meol.svg.model import (
    ElementNode,
    SvgDocument,
    check_unique_ids,
    is_xml_name,
    parse_svg,
    reindex,
    serialize_svg,
)
from meol.svg.raster import DEFAULT_SIZE, RasterImage, rasterize, visual_distance
from meol.svg.simplify import VISUAL_TOLERANCE, simplify

__all__ = [
    "DEFAULT_SIZE",
    "ElementNode",
    "IdReport",
    "RasterImage",
    "SvgDocument",
    "VISUAL_TOLERANCE",
    "check_unique_ids",
    "inventory_ids",
    "is_non_descriptive",
    "is_xml_name",
    "parse_svg",
    "rasterize",
    "reindex",
    "sanitize_id",
    "serialize_svg",
    "simplify",
    "visual_distance",
]
