"""Command-line launcher for the embedding server."""

from __future__ import annotations

import dataclasses
import sys

import click

from mllm_server.config import ServerConfig, load_config
from mllm_server.model import load_model
from mllm_server.service import EmbedServer


@click.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="key=value file with ServerConfig fields.")
@click.option("--model", "model_id", default=None, help="Model id (default tiny-mm).")
@click.option("--addr", default=None, help="host:port to bind.")
@click.option("--chat-template/--no-chat-template", default=None,
              help="Wrap prompts in a chat template (off by default).")
def cli(config_path, model_id, addr, chat_template):
    """Serve a multimodal model's hidden states over the embedding protocol."""
    config = load_config(config_path) if config_path else ServerConfig()
    overrides = {}
    if model_id is not None:
        overrides["model_id"] = model_id
    if addr is not None:
        host, _, port = addr.rpartition(":")
        overrides["host"] = host or "127.0.0.1"
        overrides["port"] = int(port)
    if chat_template is not None:
        overrides["apply_chat_template"] = chat_template
    config = dataclasses.replace(config, **overrides)

    model = load_model(config.model_id, device=config.device)
    server = EmbedServer(config, model)
    host, port = server.server_address[:2]
    click.echo(
        f"serving model_id={model.model_id} dim={model.dim} "
        f"layer_count={model.layer_count} on {host}:{port}",
        err=True,
    )
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


def main() -> int:
    try:
        cli.main(standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return 0 if exc.exit_code == 0 else 1
    except (click.UsageError, click.ClickException) as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 1
    except Exception as exc:
        click.echo(f"internal error: {type(exc).__name__}: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
