"""Model-guided SVG rewriting with a hard visual-preservation gate.

Flow: render the document, build an analysis prompt (code + image), ask a
plan backend for a structured rewrite plan, apply it, then verify the result
renders within tolerance of the original. Any failure at any step falls back
to the untouched original, so downstream databases never receive a broken or
visually altered SVG.

Plan backends are untrusted: plans are schema-validated, ids sanitized, and
actions executed mechanically with the raster diff as the safety net.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from typing import Callable, Protocol

from meol.errors import (
    IdCollision,
    MeolError,
    PlanParseError,
    SelectorUnresolved,
    SvgTooLong,
)
from meol.prompts import PromptPayload
from meol.svg.ids import inventory_ids, sanitize_id
from meol.svg.model import ElementNode, SvgDocument, is_xml_name, reindex, serialize_svg
from meol.svg.raster import DEFAULT_SIZE, RasterImage, rasterize, visual_distance
from meol.svg.simplify import (
    VISUAL_TOLERANCE,
    drop_identity_transform,
    flatten_group,
    merge_single_child_transform,
    remove_if_empty,
)

ANALYSIS_TEMPLATE_ID = "analysis-v1"
DEFAULT_CONTEXT_TOKENS = 32768
CHARS_PER_TOKEN = 4  # coarse budget conversion for plain XML text

ACTION_KINDS = (
    "flatten_group",
    "remove_empty",
    "drop_identity_transform",
    "merge_transform",
)

ANALYSIS_INSTRUCTION = (
    "You are given an SVG document and its rendered image.\n"
    "1. List the salient objects visible in the rendered image.\n"
    "2. Match each object to exactly one SVG element, referring to it by its"
    " existing id, or by a path of child indices from the root such as"
    ' "0/2/1".\n'
    "3. Propose only safe structural simplifications, chosen from:"
    " flatten_group, remove_empty, drop_identity_transform, merge_transform.\n"
    "4. Reply with a single JSON object of the form"
    ' {"objects": [{"selector": "...", "new_id": "..."}],'
    ' "simplify": [{"action": "...", "selector": "..."}]}'
    " and nothing else."
)

_PATH_SELECTOR_RE = re.compile(r"^\d+(/\d+)*$")


@dataclass
class RewritePlan:
    object_labels: list[tuple[str, str]]  # (selector, new_id after sanitization)
    simplify_actions: list[tuple[str, str]]  # (action kind, selector)
    model_raw: str


@dataclass
class RewriteOutcome:
    status: str  # "rewritten" | "fallback_original"
    document: SvgDocument
    visual_rmse: float
    replaced_ids: int
    assigned_ids: int
    failure_reason: str | None = None


class PlanBackend(Protocol):
    def complete(self, payload: PromptPayload) -> str: ...


def build_analysis_prompt(
    doc: SvgDocument,
    render: RasterImage,
    context_budget_tokens: int = DEFAULT_CONTEXT_TOKENS,
) -> PromptPayload:
    """Instruction + serialized SVG + rendered image, byte-stable."""
    serialized = serialize_svg(doc)
    budget_chars = context_budget_tokens * CHARS_PER_TOKEN
    if len(serialized) > budget_chars:
        raise SvgTooLong(len(serialized), budget_chars)
    text = f"{ANALYSIS_INSTRUCTION}\n\nSVG:\n{serialized}"
    return PromptPayload(
        text_segment=text,
        image_attachment=render,
        svg_segment=serialized,
        template_id=ANALYSIS_TEMPLATE_ID,
    )


def _resolve_selector(doc: SvgDocument, selector: str) -> ElementNode:
    node = doc.find_by_id(selector)
    if node is not None:
        return node
    if _PATH_SELECTOR_RE.match(selector):
        path = [int(p) for p in selector.split("/")]
        node = doc.node_at(path)
        if node is not None:
            return node
    raise SelectorUnresolved(selector)


def parse_rewrite_plan(response: str, doc: SvgDocument) -> RewritePlan:
    """Validate a model response against the plan schema and the document.

    Unknown selectors, bad actions, and schema violations are rejected rather
    than dropped. Messy labels are repaired per the sanitization rules; an
    exact collision with an id kept elsewhere in the document is rejected.
    """
    text = response.strip()
    if text.startswith("```"):
        text = re.sub(r"^```[a-z]*\n?|```$", "", text).strip()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PlanParseError(f"response is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise PlanParseError("response is not a JSON object")

    objects = data.get("objects", [])
    simplify = data.get("simplify", [])
    if not isinstance(objects, list) or not isinstance(simplify, list):
        raise PlanParseError("'objects' and 'simplify' must be lists")

    selected_paths: set[tuple[int, ...]] = set()
    relabeled_nodes: list[tuple[ElementNode, str]] = []
    for entry in objects:
        if not isinstance(entry, dict) or not isinstance(entry.get("selector"), str) \
                or not isinstance(entry.get("new_id"), str):
            raise PlanParseError(f"malformed object entry {entry!r}")
        node = _resolve_selector(doc, entry["selector"])
        key = tuple(node.node_path)
        if key in selected_paths:
            raise PlanParseError(
                f"selector {entry['selector']!r} targets an already-relabeled node"
            )
        selected_paths.add(key)
        relabeled_nodes.append((node, entry["new_id"]))

    # ids that survive the rewrite: everything except the nodes being relabeled
    kept_ids = {
        n.attributes["id"]
        for n in doc.root.walk()
        if "id" in n.attributes and tuple(n.node_path) not in selected_paths
    }

    taken = set(kept_ids)
    object_labels: list[tuple[str, str]] = []
    for (node, raw_id), entry in zip(relabeled_nodes, objects):
        if is_xml_name(raw_id) and raw_id == raw_id.lower() and raw_id in taken:
            raise IdCollision(raw_id)
        new_id = sanitize_id(raw_id, taken)
        taken.add(new_id)
        object_labels.append((entry["selector"], new_id))

    simplify_actions: list[tuple[str, str]] = []
    for entry in simplify:
        if not isinstance(entry, dict) or entry.get("action") not in ACTION_KINDS \
                or not isinstance(entry.get("selector"), str):
            raise PlanParseError(f"malformed simplify entry {entry!r}")
        _resolve_selector(doc, entry["selector"])
        simplify_actions.append((entry["action"], entry["selector"]))

    return RewritePlan(
        object_labels=object_labels,
        simplify_actions=simplify_actions,
        model_raw=response,
    )


def _locate(root: ElementNode, target: ElementNode) -> tuple[ElementNode, int] | None:
    """Find a node's current parent and child index by object identity."""
    for node in root.walk():
        for index, child in enumerate(node.children):
            if child is target:
                return node, index
    return None


def apply_rewrite_plan(doc: SvgDocument, plan: RewritePlan) -> SvgDocument:
    """Execute a validated plan on a copy of the document.

    All selectors are resolved against the document as it stood before any
    action, so a plan can mix relabels and structural edits without tracking
    index shifts. Execution is mechanical; render-neutrality of the outcome
    is the caller's responsibility (rewrite_document checks it against the
    original raster).
    """
    result = doc.copy()
    label_targets = [
        (_resolve_selector(result, selector), new_id)
        for selector, new_id in plan.object_labels
    ]
    action_targets = [
        (action, _resolve_selector(result, selector))
        for action, selector in plan.simplify_actions
    ]

    for node, new_id in label_targets:
        node.attributes = {**node.attributes, "id": new_id} if "id" not in \
            node.attributes else {
                k: (new_id if k == "id" else v) for k, v in node.attributes.items()
            }

    for action, node in action_targets:
        if action == "drop_identity_transform":
            drop_identity_transform(node)
        elif action == "merge_transform":
            merge_single_child_transform(node)
        elif action in ("flatten_group", "remove_empty"):
            located = _locate(result.root, node)
            if located is None:
                continue  # root, or removed by an earlier action
            parent, index = located
            if action == "flatten_group":
                # mechanical flatten: attributes on the group are discarded,
                # the visual gate rejects the plan if that mattered
                parent.children[index : index + 1] = node.children
            else:
                remove_if_empty(parent, index)

    reindex(result)
    return result


def _count_changes(original: SvgDocument, plan: RewritePlan) -> tuple[int, int]:
    replaced = assigned = 0
    for selector, _ in plan.object_labels:
        node = _resolve_selector(original, selector)
        if "id" in node.attributes:
            replaced += 1
        else:
            assigned += 1
    return replaced, assigned


def rewrite_document(
    doc: SvgDocument,
    backend: PlanBackend,
    retries: int = 1,
    visual_tolerance: float = VISUAL_TOLERANCE,
) -> RewriteOutcome:
    """Run the full rewrite with fallback; total over any backend behavior."""

    def fallback(reason: str) -> RewriteOutcome:
        return RewriteOutcome(
            status="fallback_original",
            document=doc,
            visual_rmse=0.0,
            replaced_ids=0,
            assigned_ids=0,
            failure_reason=reason,
        )

    try:
        original_render = rasterize(doc, DEFAULT_SIZE, DEFAULT_SIZE)
        payload = build_analysis_prompt(doc, original_render)
    except MeolError as exc:
        return fallback(f"{type(exc).__name__}: {exc}")

    last_reason = "no attempt made"
    for _ in range(retries + 1):
        try:
            response = backend.complete(payload)
            plan = parse_rewrite_plan(response, doc)
            rewritten = apply_rewrite_plan(doc, plan)
            from meol.svg.model import check_unique_ids

            check_unique_ids(rewritten)
            rmse = visual_distance(
                original_render, rasterize(rewritten, DEFAULT_SIZE, DEFAULT_SIZE)
            )
            if rmse > visual_tolerance:
                last_reason = (
                    f"VisualCheckFailed: RMSE {rmse:.3f} > {visual_tolerance}"
                )
                continue
            before = len(inventory_ids(doc).non_descriptive)
            after = len(inventory_ids(rewritten).non_descriptive)
            if before > 0 and after >= before:
                last_reason = (
                    f"NoSemanticGain: non-descriptive ids {before} -> {after}"
                )
                continue
            replaced, assigned = _count_changes(doc, plan)
            return RewriteOutcome(
                status="rewritten",
                document=rewritten,
                visual_rmse=rmse,
                replaced_ids=replaced,
                assigned_ids=assigned,
                failure_reason=None,
            )
        except MeolError as exc:
            last_reason = f"{type(exc).__name__}: {exc}"
        except Exception as exc:  # backend is untrusted code
            last_reason = f"BackendError: {exc}"
    return fallback(last_reason)


def audit_record(item_id: str, outcome: RewriteOutcome, model_raw: str = "") -> dict:
    """One JSON-lines audit entry per rewritten document."""
    return {
        "item_id": item_id,
        "status": outcome.status,
        "visual_rmse": outcome.visual_rmse,
        "replaced_ids": outcome.replaced_ids,
        "assigned_ids": outcome.assigned_ids,
        "failure_reason": outcome.failure_reason,
        "model_raw": model_raw,
    }


# --- plan backends -----------------------------------------------------------

@dataclass
class StaticPlanBackend:
    """Always returns the same response text (test double)."""

    response: str

    def complete(self, payload: PromptPayload) -> str:
        return self.response


@dataclass
class ScriptedPlanBackend:
    """Maps documents to canned responses, keyed by root id then svg hash."""

    responses: dict[str, str]
    default: str = '{"objects": [], "simplify": []}'
    calls: list[str] = field(default_factory=list)

    @staticmethod
    def key_for(svg_text: str) -> str:
        return hashlib.sha1(svg_text.encode("utf-8")).hexdigest()[:12]

    def complete(self, payload: PromptPayload) -> str:
        svg = payload.svg_segment or ""
        match = re.search(r'<svg[^>]*\bid="([^"]+)"', svg)
        key = match.group(1) if match else self.key_for(svg)
        self.calls.append(key)
        return self.responses.get(key, self.default)


_COLOR_WORD_RE = re.compile(r"^[a-z]+$")


class RulePlanBackend:
    """Deterministic model-free planner.

    Relabels non-descriptive/missing ids from each shape's tag and fill color
    and proposes every safe structural simplification it can find. Stands in
    for a multimodal model when none is configured.
    """

    def complete(self, payload: PromptPayload) -> str:
        from meol.svg.model import parse_svg

        doc = parse_svg(payload.svg_segment or "")
        report = inventory_ids(doc)
        objects = []
        for path, old_id in report.non_descriptive:
            objects.append(
                {"selector": old_id, "new_id": self._label(doc, path)}
            )
        for path in report.missing:
            objects.append(
                {
                    "selector": "/".join(str(i) for i in path),
                    "new_id": self._label(doc, path),
                }
            )
        simplify = []
        for node in doc.root.walk():
            if not node.node_path:
                continue
            selector = node.attributes.get("id") or "/".join(
                str(i) for i in node.node_path
            )
            tag = node.tag.rsplit(":", 1)[-1]
            transform = node.attributes.get("transform")
            if transform is not None:
                from meol.svg.simplify import is_identity_transform

                if is_identity_transform(transform):
                    simplify.append(
                        {"action": "drop_identity_transform", "selector": selector}
                    )
            if tag == "g" and not node.children:
                simplify.append({"action": "remove_empty", "selector": selector})
        return json.dumps({"objects": objects, "simplify": simplify})

    @staticmethod
    def _label(doc: SvgDocument, path: list[int]) -> str:
        node = doc.node_at(path)
        tag = node.tag.rsplit(":", 1)[-1]
        if tag == "g":
            return f"cluster_of_{len(node.children)}"
        fill = node.attributes.get("fill", "").strip().lower()
        if _COLOR_WORD_RE.match(fill) and fill != "none":
            return f"{fill}_{tag}"
        return f"plain_{tag}"


PLAN_BACKENDS: dict[str, Callable[[], PlanBackend]] = {
    "rules": RulePlanBackend,
}
