"""Prompt templates for one-word embedding extraction.

Every template is a skeleton with exactly one ⟨X⟩ and one ⟨instruction⟩
placeholder. The main family instructs the model to compress the input into
a single word ("... in one word:"); length variants swap only that suffix.
Two baseline templates (PromptEOL and a knowledge-augmented variant) are
included for comparison runs. Rendering is pure string substitution so every
template is golden-testable byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from meol.errors import ModalityMismatch
from meol.svg.raster import RasterImage

X = "⟨X⟩"
INSTRUCTION = "⟨instruction⟩"

MODALITIES = ("text", "image", "svg", "image_svg")
LENGTH_VARIANTS = ("one_word", "two_words", "three_words", "four_words", "sentence")

VARIANT_SUFFIX = {
    "one_word": "in one word:",
    "two_words": "in two words:",
    "three_words": "in three words:",
    "four_words": "in four words:",
    "sentence": "in one sentence:",
}

IMAGE_MARKER = "[IMAGE]"


@dataclass(frozen=True)
class PromptTemplate:
    template_id: str
    modality: str
    skeleton: str
    instruction: str
    length_variant: str

    def __post_init__(self):
        if self.modality not in MODALITIES:
            raise ValueError(f"unknown modality {self.modality!r}")
        if self.length_variant not in LENGTH_VARIANTS:
            raise ValueError(f"unknown length variant {self.length_variant!r}")
        if self.skeleton.count(X) != 1 or self.skeleton.count(INSTRUCTION) != 1:
            raise ValueError("skeleton must contain each placeholder exactly once")
        if self.length_variant == "one_word" and not self._rendered_shape().endswith(
            VARIANT_SUFFIX["one_word"]
        ):
            raise ValueError('one_word templates must end with "in one word:"')

    def _rendered_shape(self) -> str:
        return self.skeleton.replace(INSTRUCTION, self.instruction)


@dataclass(frozen=True)
class PromptPayload:
    text_segment: str
    image_attachment: RasterImage | None
    svg_segment: str | None
    template_id: str


@dataclass(frozen=True)
class ModalityInput:
    """One input to embed: some combination of text, raster, and SVG code."""

    text: str | None = None
    image: RasterImage | None = None
    svg: str | None = None


_MEOL_SKELETON = f"This {X} {INSTRUCTION} in one word:"

DEFAULT_TEMPLATES = {
    "meol-text": PromptTemplate(
        template_id="meol-text",
        modality="text",
        skeleton=_MEOL_SKELETON,
        instruction="expresses the following meaning and visual attributes",
        length_variant="one_word",
    ),
    "meol-image": PromptTemplate(
        template_id="meol-image",
        modality="image",
        skeleton=_MEOL_SKELETON,
        instruction="shows the following visual content",
        length_variant="one_word",
    ),
    "meol-svg": PromptTemplate(
        template_id="meol-svg",
        modality="svg",
        skeleton=_MEOL_SKELETON,
        instruction="vector graphic code renders and represents",
        length_variant="one_word",
    ),
    "meol-image-svg": PromptTemplate(
        template_id="meol-image-svg",
        modality="image_svg",
        skeleton=_MEOL_SKELETON,
        instruction="image and its vector code together represent",
        length_variant="one_word",
    ),
    "prompteol": PromptTemplate(
        template_id="prompteol",
        modality="text",
        skeleton=f"This sentence: {X}{INSTRUCTION} means [MASK]",
        instruction="",
        length_variant="sentence",
    ),
    # Non-authoritative stand-in: the knowledge-augmented baseline's exact
    # wording is configuration-supplied; this default just adds a knowledge
    # clause to the plain sentence template.
    "keeol": PromptTemplate(
        template_id="keeol",
        modality="text",
        skeleton=f"This sentence: {X}{INSTRUCTION} means [MASK]",
        instruction=", combined with relevant world knowledge,",
        length_variant="sentence",
    ),
}

MEOL_TEMPLATE_BY_MODALITY = {
    "text": "meol-text",
    "image": "meol-image",
    "svg": "meol-svg",
    "image_svg": "meol-image-svg",
}


def load_template_registry(path: str | Path) -> dict[str, PromptTemplate]:
    """Load extra templates from a JSON file {template_id: {fields...}}."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    registry = dict(DEFAULT_TEMPLATES)
    for template_id, fields in raw.items():
        registry[template_id] = PromptTemplate(
            template_id=template_id,
            modality=fields["modality"],
            skeleton=fields["skeleton"],
            instruction=fields.get("instruction", ""),
            length_variant=fields.get("length_variant", "one_word"),
        )
    return registry


def make_length_variant(base: PromptTemplate, variant: str) -> PromptTemplate:
    """Swap the one-word suffix for another length; all other bytes unchanged."""
    if base.length_variant != "one_word":
        raise ValueError("length variants derive from one_word templates")
    if variant not in LENGTH_VARIANTS:
        raise ValueError(f"unknown length variant {variant!r}")
    if variant == "one_word":
        return base
    old = VARIANT_SUFFIX["one_word"]
    new = VARIANT_SUFFIX[variant]
    if not base.skeleton.endswith(old):
        raise ValueError("one_word skeleton does not end with its suffix")
    return PromptTemplate(
        template_id=f"{base.template_id}--{variant}",
        modality=base.modality,
        skeleton=base.skeleton[: -len(old)] + new,
        instruction=base.instruction,
        length_variant=variant,
    )


def _x_segment(template: PromptTemplate, value: ModalityInput) -> str:
    if template.modality == "text":
        return f'"{value.text}"'
    if template.modality == "image":
        return IMAGE_MARKER
    if template.modality == "svg":
        return value.svg or ""
    return f"{IMAGE_MARKER} {value.svg or ''}"


def render_prompt(template: PromptTemplate, value: ModalityInput) -> PromptPayload:
    """Substitute placeholders; the only transformation applied to inputs."""
    needs_text = template.modality == "text"
    needs_image = template.modality in ("image", "image_svg")
    needs_svg = template.modality in ("svg", "image_svg")
    if needs_text and value.text is None:
        raise ModalityMismatch(f"template {template.template_id} needs text")
    if needs_image and value.image is None:
        raise ModalityMismatch(f"template {template.template_id} needs an image")
    if needs_svg and value.svg is None:
        raise ModalityMismatch(f"template {template.template_id} needs SVG code")
    if not needs_image and value.image is not None:
        raise ModalityMismatch(
            f"template {template.template_id} does not accept an image"
        )
    text = template.skeleton.replace(INSTRUCTION, template.instruction).replace(
        X, _x_segment(template, value)
    )
    return PromptPayload(
        text_segment=text,
        image_attachment=value.image if needs_image else None,
        svg_segment=value.svg if needs_svg else None,
        template_id=template.template_id,
    )
