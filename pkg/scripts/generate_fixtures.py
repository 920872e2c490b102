#!/usr/bin/env python3
"""Regenerate the committed test fixtures.

Outputs:
  tests/fixtures/corpus/*.svg          24 icon-style documents
  tests/fixtures/benchmark.jsonl       50-record retrieval fixture
  tests/fixtures/benchmark_plans.json  scripted rewrite plans for the fixture
  tests/golden/*.txt                   frozen prompt strings

Run from the repository root. Deterministic: reruns are byte-identical.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "tests" / "fixtures" / "corpus"
FIXTURES = ROOT / "tests" / "fixtures"
GOLDEN = ROOT / "tests" / "golden"

PALETTE = ["red", "blue", "green", "orange", "purple", "teal", "maroon", "navy"]

ANSWER_POOL = [
    "Global connectivity issues", "Worldwide music distribution",
    "Ecological awareness", "Travel booking services", "Severe weather warning",
    "Mountain hiking trail", "Fresh coffee delivery", "Electric vehicle charging",
    "Secure password storage", "Public library hours", "Recycling collection day",
    "Wireless signal strength", "Hospital emergency entrance", "Organic farming methods",
    "Night sky observation", "Underwater diving school", "City bicycle sharing",
    "Solar panel installation", "Ancient castle tours", "Fast parcel tracking",
    "Vegetarian cooking classes", "Winter sports equipment", "Home fire safety",
    "Pet grooming salon", "Digital photo printing", "Ocean wave energy",
    "Desert camel rides", "Forest bird watching", "Morning yoga sessions",
    "Antique book restoration", "Street food festival", "Volcano eruption alert",
    "Submarine cable repair", "Honey bee keeping", "Chess tournament finals",
    "Rainwater harvesting system", "Midnight train schedule", "Butterfly garden tours",
    "Lighthouse keeper museum", "Windmill flour grinding", "Ice cream truck route",
    "Rooftop garden design", "Hot air ballooning", "Origami paper folding",
    "Telescope lens cleaning", "Marathon water stations", "Jazz concert tickets",
    "Pottery wheel lessons", "Sailboat racing club", "Fireworks display safety",
]


def _shape(rng: random.Random, i: int, with_id: str | None) -> str:
    color = PALETTE[(i * 3) % len(PALETTE)]
    idattr = f' id="{with_id}"' if with_id else ""
    kind = i % 5
    if kind == 0:
        return f'<circle{idattr} cx="{20 + i % 40}" cy="{30 + i % 30}" r="{8 + i % 10}" fill="{color}"/>'
    if kind == 1:
        return f'<rect{idattr} x="{10 + i % 20}" y="{15 + i % 25}" width="{20 + i % 15}" height="{12 + i % 18}" fill="{color}"/>'
    if kind == 2:
        return f'<ellipse{idattr} cx="{40 + i % 20}" cy="{50 + i % 20}" rx="{12 + i % 8}" ry="{7 + i % 6}" fill="{color}"/>'
    if kind == 3:
        x = 10 + i % 30
        return f'<path{idattr} d="M{x} 20 L{x + 30} 20 L{x + 15} {45 + i % 20} Z" fill="{color}"/>'
    return f'<polygon{idattr} points="{20 + i},{60} {50 + i % 10},{70} {35},{85 + i % 10}" fill="{color}"/>'


def make_corpus() -> None:
    CORPUS.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20240811)
    docs: list[str] = []

    # plain shapes with editor-style ids
    for i in range(8):
        shapes = "".join(
            _shape(rng, i * 7 + j, f"Layer_{j + 1}" if j % 2 == 0 else None)
            for j in range(3)
        )
        docs.append(f'<svg viewBox="0 0 100 100">{shapes}</svg>')

    # redundant nesting + identity transforms
    for i in range(8, 14):
        inner = _shape(rng, i * 5, f"path{i}")
        docs.append(
            f'<svg viewBox="0 0 100 100"><g><g>{inner}</g></g>'
            f'<g transform="translate(0,0)">{_shape(rng, i * 5 + 1, None)}</g>'
            f"<g/><g/></svg>"
        )

    # transforms, groups with attributes, curves and arcs
    curves = [
        '<path id="vector1" d="M10 50 C 20 10, 60 10, 70 50 S 90 80, 95 60" fill="none" stroke="navy" stroke-width="3"/>',
        '<path id="shape2" d="M20 20 Q 50 5, 80 20 T 90 60 Z" fill="orange"/>',
        '<path id="path77" d="M30 70 A 20 15 0 1 0 70 70 Z" fill="teal"/>',
        '<rect id="Layer_9" x="10" y="10" width="30" height="20" rx="5" fill="purple"/>',
        '<polyline id="g4" points="10,90 30,60 50,80 70,40" fill="none" stroke="maroon" stroke-width="2" stroke-linecap="round"/>',
        '<line id="12_3" x1="5" y1="5" x2="95" y2="95" stroke="green" stroke-width="4"/>',
    ]
    for i, body in enumerate(curves):
        docs.append(
            f'<svg viewBox="0 0 100 100"><g id="icon_{["anchor","leaf","wave","gear","kite","bolt"][i]}" '
            f'transform="rotate({i * 4} 50 50)">{body}</g></svg>'
        )

    # group-level fill inheritance, opacity, defs with unused entries
    docs.append(
        '<svg viewBox="0 0 100 100"><defs><circle id="unused_template" r="4"/></defs>'
        '<g fill="crimson"><circle id="Layer_1" cx="30" cy="30" r="15"/>'
        '<rect x="50" y="50" width="25" height="25"/></g></svg>'
    )
    docs.append(
        '<svg viewBox="0 0 100 100"><g opacity="0.5" id="group1">'
        '<circle cx="40" cy="40" r="20" fill="blue"/>'
        '<circle cx="60" cy="60" r="20" fill="red" fill-opacity="0.8"/></g></svg>'
    )
    docs.append(
        '<svg viewBox="0 0 64 64"><g transform="scale(1)">'
        '<g transform="translate(8,8)"><rect id="xmlid_4" width="48" height="48" fill="#3366cc"/></g>'
        "</g></svg>"
    )
    docs.append(
        '<svg width="120" height="120"><circle cx="60" cy="60" r="50" fill="#00aa66"/>'
        '<path id="bird_wing" d="M30 60 C 45 30, 75 30, 90 60 Z" fill="ivory"/></svg>'
    )

    for i, doc in enumerate(docs):
        (CORPUS / f"icon_{i:02d}.svg").write_text(doc, encoding="utf-8")
    print(f"wrote {len(docs)} corpus files")


def make_benchmark() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20240812)
    records = []
    plans = {}
    question = "What does this SVG image likely represent?"
    for i, answer in enumerate(ANSWER_POOL):
        item_id = f"item_{i:03d}"
        shapes = "".join(
            _shape(rng, i * 11 + j, f"Layer_{j + 1}") for j in range(1 + i % 3)
        )
        svg = f'<svg id="{item_id}" viewBox="0 0 100 100">{shapes}</svg>'
        distractors = rng.sample([a for a in ANSWER_POOL if a != answer], 3)
        keys = ["A", "B", "C", "D"]
        correct = keys[i % 4]
        options = {}
        d_iter = iter(distractors)
        for key in keys:
            options[key] = answer if key == correct else next(d_iter)
        records.append(
            {
                "item_id": item_id,
                "svg": svg,
                "question": question,
                "options": options,
                "answer": correct,
            }
        )
        label = answer.lower().replace(" ", "_")
        objects = [{"selector": "Layer_1", "new_id": label}]
        for j in range(1, 1 + i % 3):
            objects.append(
                {"selector": f"Layer_{j + 1}", "new_id": f"{label}_part_{j}"}
            )
        plans[item_id] = json.dumps({"objects": objects, "simplify": []})

    with open(FIXTURES / "benchmark.jsonl", "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    (FIXTURES / "benchmark_plans.json").write_text(
        json.dumps(plans, indent=2) + "\n", encoding="utf-8"
    )
    print(f"wrote {len(records)} benchmark records")


def make_golden_prompts() -> None:
    from meol.prompts import (
        DEFAULT_TEMPLATES,
        LENGTH_VARIANTS,
        ModalityInput,
        make_length_variant,
        render_prompt,
    )
    from meol.svg.model import parse_svg
    from meol.svg.raster import rasterize

    GOLDEN.mkdir(parents=True, exist_ok=True)
    svg_code = '<svg viewBox="0 0 10 10"><circle cx="5" cy="5" r="4" fill="red"/></svg>'
    image = rasterize(parse_svg(svg_code), 16, 16)
    samples = {
        "meol-text": ModalityInput(text="a red bird"),
        "meol-image": ModalityInput(image=image),
        "meol-svg": ModalityInput(svg=svg_code),
        "meol-image-svg": ModalityInput(image=image, svg=svg_code),
        "prompteol": ModalityInput(text="hello"),
        "keeol": ModalityInput(text="hello"),
    }
    for template_id, value in samples.items():
        payload = render_prompt(DEFAULT_TEMPLATES[template_id], value)
        (GOLDEN / f"prompt_{template_id}.txt").write_text(
            payload.text_segment, encoding="utf-8"
        )
    base = DEFAULT_TEMPLATES["meol-text"]
    for variant in LENGTH_VARIANTS:
        template = make_length_variant(base, variant)
        payload = render_prompt(template, ModalityInput(text="a red bird"))
        (GOLDEN / f"prompt_meol-text_{variant}.txt").write_text(
            payload.text_segment, encoding="utf-8"
        )
    print("wrote golden prompts")


if __name__ == "__main__":
    make_corpus()
    make_benchmark()
    make_golden_prompts()
