"""Deterministic SVG rasterizer and image diffing.

Renders a supported subset of SVG (fills on basic shapes and paths, simple
strokes, nested transforms, viewBox scaling) to an RGBA buffer. Rendering is
pure numpy/PIL arithmetic: the same document and dimensions always produce a
byte-identical buffer on one platform, which makes golden-file tests and the
visual-preservation gate of the rewrite pipeline sound.

Unsupported features raise RenderUnsupported naming the offending element's
path instead of drawing something approximate.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from PIL import Image, ImageDraw

from meol.errors import DimensionMismatch, RenderUnsupported
from meol.svg.model import ElementNode, SvgDocument

SUPERSAMPLE = 4
DEFAULT_SIZE = 256

# Elements that are never rendered and whose subtrees are skipped.
_SKIP_TAGS = {"defs", "title", "desc", "metadata"}
_SHAPE_TAGS = {"rect", "circle", "ellipse", "line", "polyline", "polygon", "path"}

_COLOR_NAMES = {
    "black": (0, 0, 0), "white": (255, 255, 255), "red": (255, 0, 0),
    "lime": (0, 255, 0), "green": (0, 128, 0), "blue": (0, 0, 255),
    "yellow": (255, 255, 0), "cyan": (0, 255, 255), "aqua": (0, 255, 255),
    "magenta": (255, 0, 255), "fuchsia": (255, 0, 255), "gray": (128, 128, 128),
    "grey": (128, 128, 128), "silver": (192, 192, 192), "maroon": (128, 0, 0),
    "olive": (128, 128, 0), "navy": (0, 0, 128), "teal": (0, 128, 128),
    "purple": (128, 0, 128), "orange": (255, 165, 0), "pink": (255, 192, 203),
    "brown": (165, 42, 42), "gold": (255, 215, 0), "coral": (255, 127, 80),
    "salmon": (250, 128, 114), "khaki": (240, 230, 140), "violet": (238, 130, 238),
    "indigo": (75, 0, 130), "turquoise": (64, 224, 208), "beige": (245, 245, 220),
    "tan": (210, 180, 140), "skyblue": (135, 206, 235), "orchid": (218, 112, 214),
    "crimson": (220, 20, 60), "chocolate": (210, 105, 30), "ivory": (255, 255, 240),
    "lavender": (230, 230, 250), "plum": (221, 160, 221), "tomato": (255, 99, 71),
}

_NUMBER_RE = re.compile(r"[-+]?(?:\d*\.\d+|\d+\.?)(?:[eE][-+]?\d+)?")


@dataclass(frozen=True)
class RasterImage:
    width: int
    height: int
    pixels: bytes  # row-major RGBA

    def __post_init__(self):
        if len(self.pixels) != self.width * self.height * 4:
            raise ValueError("pixel buffer length != width * height * 4")

    def as_array(self) -> np.ndarray:
        return np.frombuffer(self.pixels, dtype=np.uint8).reshape(
            self.height, self.width, 4
        )

    def to_pil(self) -> Image.Image:
        return Image.frombytes("RGBA", (self.width, self.height), self.pixels)

    @classmethod
    def from_pil(cls, image: Image.Image) -> "RasterImage":
        rgba = image.convert("RGBA")
        return cls(rgba.width, rgba.height, rgba.tobytes())


def visual_distance(a: RasterImage, b: RasterImage) -> float:
    """RMSE over every channel value on the 0-255 scale."""
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionMismatch(
            f"{a.width}x{a.height} vs {b.width}x{b.height}"
        )
    xa = a.as_array().astype(np.float64)
    xb = b.as_array().astype(np.float64)
    return float(np.sqrt(np.mean((xa - xb) ** 2)))


# --- transforms -------------------------------------------------------------
# Affine stored as (a, b, c, d, e, f): x' = a*x + c*y + e, y' = b*x + d*y + f.

IDENTITY = (1.0, 0.0, 0.0, 1.0, 0.0, 0.0)


def matmul(m1, m2):
    a1, b1, c1, d1, e1, f1 = m1
    a2, b2, c2, d2, e2, f2 = m2
    return (
        a1 * a2 + c1 * b2,
        b1 * a2 + d1 * b2,
        a1 * c2 + c1 * d2,
        b1 * c2 + d1 * d2,
        a1 * e2 + c1 * f2 + e1,
        b1 * e2 + d1 * f2 + f1,
    )


def apply_affine(m, points):
    a, b, c, d, e, f = m
    pts = np.asarray(points, dtype=np.float64)
    x = pts[:, 0] * a + pts[:, 1] * c + e
    y = pts[:, 0] * b + pts[:, 1] * d + f
    return np.stack([x, y], axis=1)


_TRANSFORM_RE = re.compile(r"(matrix|translate|scale|rotate|skewX|skewY)\s*\(([^)]*)\)")


def parse_transform(text: str, node_path: list[int]):
    matrix = IDENTITY
    consumed = 0
    for match in _TRANSFORM_RE.finditer(text):
        consumed += 1
        name = match.group(1)
        args = [float(v) for v in _NUMBER_RE.findall(match.group(2))]
        if name == "matrix" and len(args) == 6:
            m = tuple(args)
        elif name == "translate" and len(args) in (1, 2):
            tx = args[0]
            ty = args[1] if len(args) == 2 else 0.0
            m = (1.0, 0.0, 0.0, 1.0, tx, ty)
        elif name == "scale" and len(args) in (1, 2):
            sx = args[0]
            sy = args[1] if len(args) == 2 else sx
            m = (sx, 0.0, 0.0, sy, 0.0, 0.0)
        elif name == "rotate" and len(args) in (1, 3):
            rad = math.radians(args[0])
            cos, sin = math.cos(rad), math.sin(rad)
            m = (cos, sin, -sin, cos, 0.0, 0.0)
            if len(args) == 3:
                cx, cy = args[1], args[2]
                m = matmul(
                    matmul((1, 0, 0, 1, cx, cy), m), (1, 0, 0, 1, -cx, -cy)
                )
        elif name == "skewX" and len(args) == 1:
            m = (1.0, 0.0, math.tan(math.radians(args[0])), 1.0, 0.0, 0.0)
        elif name == "skewY" and len(args) == 1:
            m = (1.0, math.tan(math.radians(args[0])), 0.0, 1.0, 0.0, 0.0)
        else:
            raise RenderUnsupported(f"transform {name}({match.group(2)})", node_path)
        matrix = matmul(matrix, m)
    stripped = re.sub(_TRANSFORM_RE, "", text).strip(" ,\t\n")
    if stripped:
        raise RenderUnsupported(f"transform syntax {text!r}", node_path)
    return matrix


# --- colors -----------------------------------------------------------------

def parse_color(text: str, node_path: list[int]):
    """Parse a paint value into (r, g, b, a) floats in 0..1, or None for none."""
    value = text.strip()
    if value in ("none", "transparent"):
        return None
    lowered = value.lower()
    if lowered in _COLOR_NAMES:
        r, g, b = _COLOR_NAMES[lowered]
        return (r / 255.0, g / 255.0, b / 255.0, 1.0)
    if value.startswith("#"):
        hexpart = value[1:]
        if len(hexpart) in (3, 4):
            hexpart = "".join(ch * 2 for ch in hexpart)
        if len(hexpart) == 6:
            hexpart += "ff"
        if len(hexpart) == 8:
            try:
                r, g, b, a = (
                    int(hexpart[i : i + 2], 16) for i in (0, 2, 4, 6)
                )
                return (r / 255.0, g / 255.0, b / 255.0, a / 255.0)
            except ValueError:
                pass
        raise RenderUnsupported(f"color {text!r}", node_path)
    match = re.match(r"rgba?\(([^)]*)\)$", lowered)
    if match:
        parts = [p.strip() for p in match.group(1).split(",")]
        if len(parts) in (3, 4):
            channels = []
            for p in parts[:3]:
                if p.endswith("%"):
                    channels.append(float(p[:-1]) * 255.0 / 100.0)
                else:
                    channels.append(float(p))
            alpha = float(parts[3]) if len(parts) == 4 else 1.0
            r, g, b = (max(0.0, min(255.0, c)) / 255.0 for c in channels)
            return (r, g, b, max(0.0, min(1.0, alpha)))
    raise RenderUnsupported(f"color {text!r}", node_path)


# --- path data --------------------------------------------------------------

_CURVE_SEGMENTS = 24  # fixed flattening for determinism


def _flatten_cubic(p0, p1, p2, p3):
    t = np.linspace(0.0, 1.0, _CURVE_SEGMENTS + 1)[1:, None]
    p0, p1, p2, p3 = (np.asarray(p, dtype=np.float64) for p in (p0, p1, p2, p3))
    mt = 1.0 - t
    pts = (
        mt**3 * p0 + 3 * mt**2 * t * p1 + 3 * mt * t**2 * p2 + t**3 * p3
    )
    return [tuple(p) for p in pts]


def _flatten_quad(p0, p1, p2):
    t = np.linspace(0.0, 1.0, _CURVE_SEGMENTS + 1)[1:, None]
    p0, p1, p2 = (np.asarray(p, dtype=np.float64) for p in (p0, p1, p2))
    mt = 1.0 - t
    pts = mt**2 * p0 + 2 * mt * t * p1 + t**2 * p2
    return [tuple(p) for p in pts]


def _arc_points(p0, rx, ry, rotation, large_arc, sweep, p1):
    """Flatten an elliptical arc (SVG endpoint parametrization)."""
    x1, y1 = p0
    x2, y2 = p1
    if rx == 0 or ry == 0 or (x1 == x2 and y1 == y2):
        return [p1]
    rx, ry = abs(rx), abs(ry)
    phi = math.radians(rotation)
    cos_phi, sin_phi = math.cos(phi), math.sin(phi)
    dx, dy = (x1 - x2) / 2.0, (y1 - y2) / 2.0
    x1p = cos_phi * dx + sin_phi * dy
    y1p = -sin_phi * dx + cos_phi * dy
    lam = (x1p / rx) ** 2 + (y1p / ry) ** 2
    if lam > 1:
        scale = math.sqrt(lam)
        rx *= scale
        ry *= scale
    num = rx**2 * ry**2 - rx**2 * y1p**2 - ry**2 * x1p**2
    den = rx**2 * y1p**2 + ry**2 * x1p**2
    coef = math.sqrt(max(0.0, num / den)) if den else 0.0
    if large_arc == sweep:
        coef = -coef
    cxp = coef * rx * y1p / ry
    cyp = -coef * ry * x1p / rx
    cx = cos_phi * cxp - sin_phi * cyp + (x1 + x2) / 2.0
    cy = sin_phi * cxp + cos_phi * cyp + (y1 + y2) / 2.0

    def angle(ux, uy, vx, vy):
        dot = ux * vx + uy * vy
        norm = math.hypot(ux, uy) * math.hypot(vx, vy)
        ang = math.acos(max(-1.0, min(1.0, dot / norm)))
        if ux * vy - uy * vx < 0:
            ang = -ang
        return ang

    theta1 = angle(1, 0, (x1p - cxp) / rx, (y1p - cyp) / ry)
    dtheta = angle(
        (x1p - cxp) / rx, (y1p - cyp) / ry, (-x1p - cxp) / rx, (-y1p - cyp) / ry
    )
    if not sweep and dtheta > 0:
        dtheta -= 2 * math.pi
    elif sweep and dtheta < 0:
        dtheta += 2 * math.pi

    steps = max(2, int(math.ceil(abs(dtheta) / (2 * math.pi) * 64)))
    pts = []
    for i in range(1, steps + 1):
        theta = theta1 + dtheta * i / steps
        x = cx + rx * math.cos(theta) * cos_phi - ry * math.sin(theta) * sin_phi
        y = cy + rx * math.cos(theta) * sin_phi + ry * math.sin(theta) * cos_phi
        pts.append((x, y))
    pts[-1] = p1
    return pts


def parse_path_data(d: str, node_path: list[int]) -> list[list[tuple[float, float]]]:
    """Flatten path data into a list of subpath polylines."""
    tokens = re.findall(r"[MmLlHhVvCcSsQqTtAaZz]|" + _NUMBER_RE.pattern, d)
    pos = 0

    def take(n):
        nonlocal pos
        if pos + n > len(tokens):
            raise RenderUnsupported(f"truncated path data {d!r}", node_path)
        vals = []
        for tok in tokens[pos : pos + n]:
            try:
                vals.append(float(tok))
            except ValueError:
                raise RenderUnsupported(f"path data {d!r}", node_path) from None
        pos += n
        return vals

    subpaths: list[list[tuple[float, float]]] = []
    current: list[tuple[float, float]] = []
    point = (0.0, 0.0)
    start = (0.0, 0.0)
    last_cubic_ctrl = None
    last_quad_ctrl = None
    command = None

    while pos < len(tokens):
        tok = tokens[pos]
        if tok.isalpha() and len(tok) == 1:
            command = tok
            pos += 1
        elif command is None:
            raise RenderUnsupported(f"path data {d!r}", node_path)
        # implicit repeat keeps previous command; M/m repeats become L/l
        cmd = command
        rel = cmd.islower()
        op = cmd.upper()

        if op == "Z":
            if current:
                current.append(start)
                subpaths.append(current)
            current = []
            point = start
            last_cubic_ctrl = last_quad_ctrl = None
            continue

        if op == "M":
            x, y = take(2)
            if rel:
                x, y = point[0] + x, point[1] + y
            if current:
                subpaths.append(current)
            point = start = (x, y)
            current = [point]
            command = "l" if rel else "L"
            last_cubic_ctrl = last_quad_ctrl = None
            continue

        if not current:
            current = [point]

        if op == "L":
            x, y = take(2)
            point = (point[0] + x, point[1] + y) if rel else (x, y)
            current.append(point)
            last_cubic_ctrl = last_quad_ctrl = None
        elif op == "H":
            (x,) = take(1)
            point = (point[0] + x if rel else x, point[1])
            current.append(point)
            last_cubic_ctrl = last_quad_ctrl = None
        elif op == "V":
            (y,) = take(1)
            point = (point[0], point[1] + y if rel else y)
            current.append(point)
            last_cubic_ctrl = last_quad_ctrl = None
        elif op == "C":
            x1, y1, x2, y2, x, y = take(6)
            if rel:
                x1, y1 = point[0] + x1, point[1] + y1
                x2, y2 = point[0] + x2, point[1] + y2
                x, y = point[0] + x, point[1] + y
            current.extend(_flatten_cubic(point, (x1, y1), (x2, y2), (x, y)))
            last_cubic_ctrl = (x2, y2)
            last_quad_ctrl = None
            point = (x, y)
        elif op == "S":
            x2, y2, x, y = take(4)
            if rel:
                x2, y2 = point[0] + x2, point[1] + y2
                x, y = point[0] + x, point[1] + y
            if last_cubic_ctrl is not None:
                x1 = 2 * point[0] - last_cubic_ctrl[0]
                y1 = 2 * point[1] - last_cubic_ctrl[1]
            else:
                x1, y1 = point
            current.extend(_flatten_cubic(point, (x1, y1), (x2, y2), (x, y)))
            last_cubic_ctrl = (x2, y2)
            last_quad_ctrl = None
            point = (x, y)
        elif op == "Q":
            x1, y1, x, y = take(4)
            if rel:
                x1, y1 = point[0] + x1, point[1] + y1
                x, y = point[0] + x, point[1] + y
            current.extend(_flatten_quad(point, (x1, y1), (x, y)))
            last_quad_ctrl = (x1, y1)
            last_cubic_ctrl = None
            point = (x, y)
        elif op == "T":
            x, y = take(2)
            if rel:
                x, y = point[0] + x, point[1] + y
            if last_quad_ctrl is not None:
                x1 = 2 * point[0] - last_quad_ctrl[0]
                y1 = 2 * point[1] - last_quad_ctrl[1]
            else:
                x1, y1 = point
            current.extend(_flatten_quad(point, (x1, y1), (x, y)))
            last_quad_ctrl = (x1, y1)
            last_cubic_ctrl = None
            point = (x, y)
        elif op == "A":
            rx, ry, rot, laf, sf, x, y = take(7)
            if rel:
                x, y = point[0] + x, point[1] + y
            current.extend(
                _arc_points(point, rx, ry, rot, bool(laf), bool(sf), (x, y))
            )
            point = (x, y)
            last_cubic_ctrl = last_quad_ctrl = None
        else:
            raise RenderUnsupported(f"path command {cmd!r}", node_path)

    if current:
        subpaths.append(current)
    return subpaths


# --- shape outlines ----------------------------------------------------------

def _ellipse_polygon(cx, cy, rx, ry, segments=64):
    theta = np.linspace(0.0, 2 * math.pi, segments, endpoint=False)
    return [
        (cx + rx * math.cos(t), cy + ry * math.sin(t)) for t in theta
    ]


def _rounded_rect(x, y, w, h, rx, ry):
    rx = min(rx, w / 2.0)
    ry = min(ry, h / 2.0)
    corners = [
        (x + w - rx, y + ry, -math.pi / 2, 0.0),
        (x + w - rx, y + h - ry, 0.0, math.pi / 2),
        (x + rx, y + h - ry, math.pi / 2, math.pi),
        (x + rx, y + ry, math.pi, 3 * math.pi / 2),
    ]
    pts = []
    for cx, cy, a0, a1 in corners:
        for t in np.linspace(a0, a1, 17):
            pts.append((cx + rx * math.cos(t), cy + ry * math.sin(t)))
    return pts


def _parse_points_attr(text: str, node_path: list[int]):
    values = [float(v) for v in _NUMBER_RE.findall(text)]
    if len(values) < 4 or len(values) % 2:
        raise RenderUnsupported(f"points {text!r}", node_path)
    return [(values[i], values[i + 1]) for i in range(0, len(values), 2)]


def _shape_subpaths(node: ElementNode) -> tuple[list, bool]:
    """Return (subpath polylines in user units, closed_for_fill flag)."""
    tag = node.tag.rsplit(":", 1)[-1]
    attrs = node.attributes

    def num(name, default=0.0):
        raw = attrs.get(name)
        if raw is None:
            return default
        raw = raw.strip()
        if raw.endswith("px"):
            raw = raw[:-2]
        try:
            return float(raw)
        except ValueError:
            raise RenderUnsupported(f"{name}={attrs[name]!r}", node.node_path) from None

    if tag == "rect":
        x, y = num("x"), num("y")
        w, h = num("width"), num("height")
        if w <= 0 or h <= 0:
            return [], True
        rx = num("rx", num("ry")) if ("rx" in attrs or "ry" in attrs) else 0.0
        ry = num("ry", rx) if ("rx" in attrs or "ry" in attrs) else 0.0
        if rx > 0 or ry > 0:
            return [_rounded_rect(x, y, w, h, rx, ry or rx)], True
        return [[(x, y), (x + w, y), (x + w, y + h), (x, y + h)]], True
    if tag == "circle":
        r = num("r")
        if r <= 0:
            return [], True
        return [_ellipse_polygon(num("cx"), num("cy"), r, r)], True
    if tag == "ellipse":
        rx, ry = num("rx"), num("ry")
        if rx <= 0 or ry <= 0:
            return [], True
        return [_ellipse_polygon(num("cx"), num("cy"), rx, ry)], True
    if tag == "line":
        return [[(num("x1"), num("y1")), (num("x2"), num("y2"))]], False
    if tag == "polyline":
        # SVG fills polylines as if closed; the outline stays open for strokes.
        return [_parse_points_attr(attrs.get("points", ""), node.node_path)], True
    if tag == "polygon":
        return [_parse_points_attr(attrs.get("points", ""), node.node_path)], True
    if tag == "path":
        return parse_path_data(attrs.get("d", ""), node.node_path), True
    raise RenderUnsupported(f"element <{tag}>", node.node_path)


# --- rendering ---------------------------------------------------------------

_INHERITED_DEFAULTS = {
    "fill": "black",
    "stroke": "none",
    "stroke-width": "1",
    "stroke-linecap": "butt",
}

_IGNORED_ATTRS_PREFIXES = ("xmlns", "data-", "aria-")
_IGNORED_ATTRS = {
    "id", "class", "version", "baseProfile", "xml:space", "fill-rule",
    "clip-rule", "stroke-linejoin", "stroke-miterlimit", "focusable",
    "role", "xml:lang", "enable-background", "x", "y",
}
_UNSUPPORTED_ATTRS = {
    "style", "filter", "clip-path", "mask", "href", "xlink:href",
    "stroke-dasharray", "marker-start", "marker-mid", "marker-end",
}


class _Canvas:
    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self.ss_w = width * SUPERSAMPLE
        self.ss_h = height * SUPERSAMPLE
        # straight-alpha float buffer at output resolution
        self.buffer = np.zeros((height, width, 4), dtype=np.float64)

    def _coverage(self, polygons, device_matrix, even_odd):
        mask = None
        for poly in polygons:
            if len(poly) < 3:
                continue
            pts = apply_affine(device_matrix, poly) * SUPERSAMPLE
            layer = Image.new("1", (self.ss_w, self.ss_h), 0)
            ImageDraw.Draw(layer).polygon(
                [tuple(p) for p in pts], fill=1, outline=None
            )
            arr = np.array(layer, dtype=bool)
            if mask is None:
                mask = arr
            elif even_odd:
                mask ^= arr
            else:
                mask |= arr
        if mask is None:
            return None
        cov = mask.reshape(
            self.height, SUPERSAMPLE, self.width, SUPERSAMPLE
        ).mean(axis=(1, 3))
        return cov

    def paint(self, polygons, device_matrix, color, opacity, even_odd):
        cov = self._coverage(polygons, device_matrix, even_odd)
        if cov is None:
            return
        r, g, b, ca = color
        alpha = cov * ca * opacity
        if not np.any(alpha > 0):
            return
        dst = self.buffer
        dst_a = dst[:, :, 3]
        out_a = alpha + dst_a * (1.0 - alpha)
        src_rgb = np.array([r, g, b])[None, None, :]
        num = src_rgb * alpha[:, :, None] + dst[:, :, :3] * (
            dst_a * (1.0 - alpha)
        )[:, :, None]
        with np.errstate(invalid="ignore", divide="ignore"):
            rgb = np.where(out_a[:, :, None] > 0, num / out_a[:, :, None], 0.0)
        dst[:, :, :3] = rgb
        dst[:, :, 3] = out_a

    def finish(self) -> RasterImage:
        out = np.rint(np.clip(self.buffer, 0.0, 1.0) * 255.0).astype(np.uint8)
        return RasterImage(self.width, self.height, out.tobytes())


def _stroke_polygons(subpaths, width, linecap):
    half = width / 2.0
    polys = []
    for pts in subpaths:
        for i in range(len(pts) - 1):
            (x1, y1), (x2, y2) = pts[i], pts[i + 1]
            dx, dy = x2 - x1, y2 - y1
            length = math.hypot(dx, dy)
            if length == 0:
                continue
            nx, ny = -dy / length * half, dx / length * half
            polys.append(
                [
                    (x1 + nx, y1 + ny),
                    (x2 + nx, y2 + ny),
                    (x2 - nx, y2 - ny),
                    (x1 - nx, y1 - ny),
                ]
            )
        # round joins at interior vertices keep corners solid
        interior = pts[1:-1] if linecap != "round" else pts
        for (x, y) in interior:
            polys.append(_ellipse_polygon(x, y, half, half, segments=32))
    return polys


def _check_attrs(node: ElementNode):
    for key, value in node.attributes.items():
        if key in _UNSUPPORTED_ATTRS:
            raise RenderUnsupported(f"attribute {key}", node.node_path)
        if key in ("fill", "stroke") and value.strip().startswith("url("):
            raise RenderUnsupported(f"paint reference {value!r}", node.node_path)


def _render_node(node: ElementNode, canvas: _Canvas, matrix, inherited, opacity):
    tag = node.tag.rsplit(":", 1)[-1]
    if tag in _SKIP_TAGS:
        return
    _check_attrs(node)

    attrs = node.attributes
    if "transform" in attrs:
        matrix = matmul(matrix, parse_transform(attrs["transform"], node.node_path))

    style = dict(inherited)
    for name in _INHERITED_DEFAULTS:
        if name in attrs:
            style[name] = attrs[name]
    opacity *= float(attrs.get("opacity", "1"))

    if tag in ("svg", "g", "a", "switch"):
        for child in node.children:
            _render_node(child, canvas, matrix, style, opacity)
        return

    if tag not in _SHAPE_TAGS:
        raise RenderUnsupported(f"element <{tag}>", node.node_path)

    subpaths, fillable = _shape_subpaths(node)
    if not subpaths:
        return

    fill = parse_color(style["fill"], node.node_path) if fillable else None
    if fill is not None:
        fill_opacity = float(attrs.get("fill-opacity", "1"))
        canvas.paint(subpaths, matrix, fill, opacity * fill_opacity, even_odd=True)

    stroke = parse_color(style["stroke"], node.node_path)
    if stroke is not None:
        stroke_width = float(style["stroke-width"])
        if stroke_width > 0:
            stroke_opacity = float(attrs.get("stroke-opacity", "1"))
            polys = _stroke_polygons(subpaths, stroke_width, style["stroke-linecap"])
            canvas.paint(polys, matrix, stroke, opacity * stroke_opacity, even_odd=False)


def _view_matrix(root: ElementNode, width: int, height: int):
    """viewBox-preserving uniform scale, centered (xMidYMid meet)."""
    vb = root.attributes.get("viewBox")
    if vb is not None:
        values = [float(v) for v in _NUMBER_RE.findall(vb)]
        if len(values) != 4 or values[2] <= 0 or values[3] <= 0:
            raise RenderUnsupported(f"viewBox {vb!r}", root.node_path)
        min_x, min_y, vw, vh = values
    else:
        def dim(name, fallback):
            raw = root.attributes.get(name)
            if raw is None:
                return fallback
            raw = raw.strip()
            if raw.endswith("px"):
                raw = raw[:-2]
            if raw.endswith("%"):
                return fallback
            return float(raw)

        min_x = min_y = 0.0
        vw = dim("width", float(width))
        vh = dim("height", float(height))
    scale = min(width / vw, height / vh)
    tx = (width - scale * vw) / 2.0 - scale * min_x
    ty = (height - scale * vh) / 2.0 - scale * min_y
    return (scale, 0.0, 0.0, scale, tx, ty)


def rasterize(
    doc: SvgDocument, width: int = DEFAULT_SIZE, height: int = DEFAULT_SIZE
) -> RasterImage:
    """Render a document to an RGBA buffer on a transparent background.

    Deterministic: identical inputs produce byte-identical buffers.
    """
    if width <= 0 or height <= 0:
        raise ValueError("width and height must be positive")
    canvas = _Canvas(width, height)
    matrix = _view_matrix(doc.root, width, height)
    _render_node(doc.root, canvas, matrix, dict(_INHERITED_DEFAULTS), 1.0)
    return canvas.finish()
