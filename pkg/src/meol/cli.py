"""Command-line entry point.

Subcommands: rewrite, embed, index, query, eval, ablate, serve-mock, adapt.
Exit codes: 0 success, 1 user error (message on stderr), 2 internal error.
A key=value config file can supply defaults; explicit flags win.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

import click
import numpy as np

from meol import bench
from meol.client import resolve_backend
from meol.embedding import HiddenStateSelector, embed as embed_payload
from meol.errors import MeolError
from meol.mocks import MOCK_BACKENDS
from meol.prompts import (
    DEFAULT_TEMPLATES,
    MEOL_TEMPLATE_BY_MODALITY,
    ModalityInput,
    render_prompt,
)
from meol.retrieval import load_index, query_topk, save_index
from meol.rewrite import RulePlanBackend, ScriptedPlanBackend, audit_record, rewrite_document
from meol.server import EmbedServer
from meol.svg.model import parse_svg, serialize_svg
from meol.svg.raster import rasterize


def load_config_file(path: str | Path) -> dict[str, str]:
    """Flat key=value config; '#' starts a comment."""
    values: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.UsageError(f"bad config line: {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip().strip('"')
    return values


def _merge_config(ctx: click.Context, names: list[str]) -> None:
    """Fill params still at their defaults from the --config file."""
    config_path = ctx.params.get("config")
    if not config_path:
        return
    values = load_config_file(config_path)
    for name in names:
        if name in values and ctx.get_parameter_source(name) == click.core.ParameterSource.DEFAULT:
            param = next(p for p in ctx.command.params if p.name == name)
            ctx.params[name] = param.type_cast_value(ctx, values[name])


def _plan_backend(spec: str):
    if spec.startswith("scripted:"):
        path = spec.split(":", 1)[1]
        return ScriptedPlanBackend(
            responses=json.loads(Path(path).read_text(encoding="utf-8"))
        )
    # mock embedding backends carry no plan generator; the deterministic
    # rule-based planner stands in for them
    if spec in MOCK_BACKENDS or spec == "rules":
        return RulePlanBackend()
    return RulePlanBackend()


@click.group()
@click.option("--seed", type=int, default=0, show_default=True, help="RNG seed.")
@click.pass_context
def cli(ctx: click.Context, seed: int):
    """Training-free multimodal embedding and retrieval toolkit."""
    random.seed(seed)
    np.random.seed(seed % 2**32)
    ctx.ensure_object(dict)


@cli.command()
@click.argument("input_svg", type=click.Path(exists=True, dir_okay=False))
@click.option("--backend", default="rules", show_default=True,
              help="Plan source: rules, scripted:FILE, or a mock backend name.")
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
@click.option("--audit", type=click.Path(dir_okay=False), help="Append audit JSONL here.")
@click.option("--json", "as_json", is_flag=True, help="Print a JSON summary.")
def rewrite(input_svg, backend, output, audit, as_json):
    """Semantically rewrite one SVG file, falling back to the original on any failure."""
    doc = parse_svg(Path(input_svg).read_text(encoding="utf-8"))
    outcome = rewrite_document(doc, _plan_backend(backend))
    Path(output).write_text(serialize_svg(outcome.document), encoding="utf-8")
    entry = audit_record(Path(input_svg).name, outcome)
    if audit:
        with open(audit, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry) + "\n")
    if as_json:
        click.echo(json.dumps(entry))
    else:
        click.echo(
            f"{entry['status']}: rmse={entry['visual_rmse']:.3f} "
            f"replaced={entry['replaced_ids']} assigned={entry['assigned_ids']}",
            err=True,
        )


@cli.command("embed")
@click.option("--backend", default=None, help="mock-hash, mock-semantic, or host:port.")
@click.option("--text", default=None)
@click.option("--svg", "svg_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--with-image", is_flag=True, help="Attach the rendered SVG raster.")
@click.option("--layer-offset", type=int, default=1, show_default=True)
@click.option("--pooling", default="last_token", show_default=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
def embed_cmd(backend, text, svg_path, with_image, layer_offset, pooling, output, as_json):
    """Embed one text / SVG input and print or save the vector."""
    if (text is None) == (svg_path is None):
        raise click.UsageError("give exactly one of --text or --svg")
    if text is not None:
        modality = "text"
        value = ModalityInput(text=text)
    else:
        doc = parse_svg(Path(svg_path).read_text(encoding="utf-8"))
        svg_code = serialize_svg(doc)
        if with_image:
            modality = "image_svg"
            value = ModalityInput(svg=svg_code, image=rasterize(doc))
        else:
            modality = "svg"
            value = ModalityInput(svg=svg_code)
    template = DEFAULT_TEMPLATES[MEOL_TEMPLATE_BY_MODALITY[modality]]
    payload = render_prompt(template, value)
    selector = HiddenStateSelector(layer_offset=layer_offset, pooling=pooling)
    record = embed_payload(resolve_backend(backend), payload, selector=selector)
    result = {
        "model_id": record.model_id,
        "dim": record.dim,
        "template_id": record.template_id,
        "layer_offset": layer_offset,
        "pooling": pooling,
        "vector": record.vector.tolist(),
    }
    if output:
        Path(output).write_text(json.dumps(result), encoding="utf-8")
    if as_json or not output:
        click.echo(json.dumps(result if as_json else {**result, "vector": "..."}))


@cli.command("index")
@click.option("--dataset", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--backend", default=None)
@click.option("--format", "database_format", default="svg_only", show_default=True,
              type=click.Choice(bench.DATABASE_FORMATS))
@click.option("--plan-backend", default="rules", show_default=True)
@click.option("--cache", type=click.Path(file_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
def index_cmd(dataset, backend, database_format, plan_backend, cache, output):
    """Embed a dataset's database side and persist the retrieval index."""
    records = bench.ingest(dataset)
    config = bench.RunConfig(database_format=database_format, backend=backend or "mock-semantic")
    artifacts = bench.run_eval(
        config, records, resolve_backend(backend),
        plan_backend=_plan_backend(plan_backend), cache_dir=cache,
    )
    save_index(artifacts.index, output)
    click.echo(f"indexed {len(records)} items -> {output}", err=True)


@cli.command("query")
@click.option("--index", "index_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--text", required=True)
@click.option("--backend", default=None)
@click.option("-k", type=int, default=5, show_default=True)
@click.option("--layer-offset", type=int, default=1, show_default=True)
@click.option("--pooling", default="last_token", show_default=True)
@click.option("--json", "as_json", is_flag=True)
def query_cmd(index_path, text, backend, k, layer_offset, pooling, as_json):
    """Rank index items against a text query by cosine similarity."""
    index = load_index(index_path)
    template = DEFAULT_TEMPLATES["meol-text"]
    payload = render_prompt(template, ModalityInput(text=text))
    record = embed_payload(
        resolve_backend(backend), payload,
        selector=HiddenStateSelector(layer_offset=layer_offset, pooling=pooling),
    )
    results = query_topk(index, record.vector, k)
    if as_json:
        click.echo(json.dumps(
            [{"rank": r.rank, "item_id": r.item_id, "score": r.score} for r in results]
        ))
    else:
        for r in results:
            click.echo(f"{r.rank}\t{r.item_id}\t{r.score:.4f}")


@cli.command("eval")
@click.option("--config", type=click.Path(exists=True, dir_okay=False),
              help="key=value file supplying defaults for the flags below.")
@click.option("--dataset", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--backend", default="mock-semantic", show_default=True)
@click.option("--format", "database_format", default="image_plus_generated_svg",
              show_default=True, type=click.Choice(bench.DATABASE_FORMATS))
@click.option("--template", "template_id", default="meol-text", show_default=True)
@click.option("--length-variant", default="one_word", show_default=True)
@click.option("--layer-offset", type=int, default=1, show_default=True)
@click.option("--pooling", default="last_token", show_default=True)
@click.option("--plan-backend", default="rules", show_default=True)
@click.option("--cache", type=click.Path(file_okay=False))
@click.option("--parallelism", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def eval_cmd(ctx, config, dataset, backend, database_format, template_id,
             length_variant, layer_offset, pooling, plan_backend, cache,
             parallelism, out, as_json):
    """Run a full retrieval evaluation and write reports + figures."""
    _merge_config(ctx, ["backend", "database_format", "template_id",
                        "length_variant", "layer_offset", "pooling",
                        "plan_backend", "cache", "parallelism"])
    p = ctx.params
    records = bench.ingest(dataset, rejects_path=Path(out) / "rejects.jsonl"
                           if Path(out).exists() else None)
    run_config = bench.RunConfig(
        database_format=p["database_format"], template_id=p["template_id"],
        length_variant=p["length_variant"], layer_offset=p["layer_offset"],
        pooling=p["pooling"], backend=p["backend"],
    )
    artifacts = bench.run_eval(
        run_config, records, resolve_backend(p["backend"]),
        plan_backend=_plan_backend(p["plan_backend"]),
        cache_dir=p["cache"], parallelism=p["parallelism"],
    )
    summary = bench.write_eval_report(out, run_config, artifacts)
    click.echo(json.dumps(summary) if as_json else
               f"recall@10={summary['recall'].get('10')} mrr={summary['mrr']:.4f}")


@cli.command("ablate")
@click.option("--kind", type=click.Choice(bench.ABLATION_KINDS), required=True)
@click.option("--dataset", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--backend", default="mock-semantic", show_default=True)
@click.option("--format", "database_format", default="svg_only", show_default=True,
              type=click.Choice(bench.DATABASE_FORMATS))
@click.option("--layer-count", type=int, default=33, show_default=True)
@click.option("--plan-backend", default="rules", show_default=True)
@click.option("--cache", type=click.Path(file_okay=False))
@click.option("--parallelism", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--json", "as_json", is_flag=True)
def ablate_cmd(kind, dataset, backend, database_format, layer_count,
               plan_backend, cache, parallelism, out, as_json):
    """Sweep one configuration axis; write the grid CSV, figure, histograms."""
    records = bench.ingest(dataset)
    base = bench.RunConfig(database_format=database_format, backend=backend)
    grid = bench.default_grid(kind, base, layer_count=layer_count)
    rows = bench.run_ablation(
        kind, grid, records, resolve_backend(backend),
        plan_backend=_plan_backend(plan_backend), cache_dir=cache,
        parallelism=parallelism,
    )
    k_values = base.k_values
    path = bench.write_ablation_report(out, kind, rows, k_values)
    bench.write_ablation_figure(out, kind, rows, k=max(k for k in k_values if k <= 10))
    if kind in ("layer_sweep", "pooling"):
        from meol.bench.runner import histogram_for
        for row in rows:
            edges, counts = histogram_for(row["artifacts"])
            safe = str(row["label"]).replace("/", "_")
            bench.write_histogram(Path(out) / f"self_similarity_{safe}", edges, counts)
    if as_json:
        click.echo(json.dumps({"rows": len(rows), "csv": str(path)}))
    else:
        click.echo(f"wrote {len(rows)} grid points -> {path}", err=True)


@cli.command("serve-mock")
@click.option("--backend", default="mock-hash", show_default=True,
              type=click.Choice(sorted(MOCK_BACKENDS)))
@click.option("--addr", default="127.0.0.1:7871", show_default=True)
def serve_mock(backend, addr):
    """Serve a deterministic mock backend over the wire protocol."""
    host, _, port = addr.rpartition(":")
    server = EmbedServer((host or "127.0.0.1", int(port)), MOCK_BACKENDS[backend])
    click.echo(f"serving {backend} on {addr}", err=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass


@cli.command("adapt")
@click.argument("source", type=click.Path(exists=True, dir_okay=False))
@click.argument("destination", type=click.Path(dir_okay=False))
def adapt(source, destination):
    """Convert an upstream VGQA-style dump into the canonical JSONL format."""
    count = bench.adapt_upstream_dump(source, destination)
    click.echo(f"converted {count} records", err=True)


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return 0 if exc.exit_code == 0 else 1
    except (click.UsageError, click.ClickException) as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        sys.stderr.write("run with --help for usage\n")
        return 1
    except MeolError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except KeyboardInterrupt:
        return 1
    except Exception as exc:  # internal error
        click.echo(f"internal error: {type(exc).__name__}: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
