"""Server configuration, loadable from a flat key=value file."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class ServerConfig:
    model_id: str = "tiny-mm"
    device: str = "cpu"
    max_context_tokens: int = 4096
    host: str = "127.0.0.1"
    port: int = 7871
    apply_chat_template: bool = False  # raw prompt by default

    def __post_init__(self):
        if self.max_context_tokens <= 0:
            raise ValueError("max_context_tokens must be positive")

    @property
    def address(self) -> tuple[str, int]:
        return (self.host, self.port)


def load_config(path: str | Path) -> ServerConfig:
    """Parse key=value lines ('#' starts a comment) into a ServerConfig."""
    values: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line: {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip().strip('"')
    kwargs: dict = {}
    for name in ("model_id", "device", "host"):
        if name in values:
            kwargs[name] = values[name]
    for name in ("max_context_tokens", "port"):
        if name in values:
            kwargs[name] = int(values[name])
    if "apply_chat_template" in values:
        kwargs["apply_chat_template"] = values["apply_chat_template"].lower() in (
            "1", "true", "yes",
        )
    unknown = set(values) - {
        "model_id", "device", "host", "max_context_tokens", "port",
        "apply_chat_template",
    }
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return ServerConfig(**kwargs)
