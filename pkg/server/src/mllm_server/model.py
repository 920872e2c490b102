"""Model adapters exposing per-layer hidden states.

The adapter contract is small: a model id, an embedding width, a layer count,
and ``hidden_states(text, image)`` returning one (tokens, dim) array per layer
in forward order, index 0 being the token embeddings. Capture happens before
any final normalization head, so offset 1 from the end is the true
penultimate transformer layer.

``TinyMultimodalModel`` is the built-in CPU target: a deterministic
byte-level transformer with a small image-patch encoder, initialized from a
fixed seed so identical requests yield identical vectors. Heavyweight
checkpoints load through ``HfAdapter`` when the transformers package and
weights are available.
"""

from __future__ import annotations

from typing import Protocol

import numpy as np
import torch


class ModelAdapter(Protocol):
    model_id: str
    dim: int
    layer_count: int

    def hidden_states(
        self, text: str, image: np.ndarray | None
    ) -> list[np.ndarray]: ...


_SEED = 0x5EED_0E01
_PATCH_GRID = 4  # image folds into a 4x4 grayscale grid -> 4 row tokens


class TinyMultimodalModel:
    """Fixed-weight byte-level transformer with an image-patch prefix."""

    def __init__(self, dim: int = 32, layers: int = 4, model_id: str = "tiny-mm"):
        self.model_id = model_id
        self.dim = dim
        self.layer_count = layers + 1  # embeddings + one state per layer
        gen = torch.Generator().manual_seed(_SEED)

        def weight(*shape: int) -> torch.Tensor:
            return torch.randn(*shape, generator=gen, dtype=torch.float32) * 0.2

        self._token_embed = weight(257, dim)  # 256 byte values + image marker
        self._patch_proj = weight(_PATCH_GRID, dim)
        self._positions = weight(4096, dim) * 0.1
        self._layers = [
            (weight(dim, dim), weight(dim, dim), weight(dim, dim))
            for _ in range(layers)
        ]

    def _image_tokens(self, image: np.ndarray) -> torch.Tensor:
        rgba = torch.from_numpy(image.astype(np.float32) / 255.0)
        luma = (rgba[..., :3].mean(dim=-1)) * rgba[..., 3]
        grid = _block_mean(luma, _PATCH_GRID)
        marker = self._token_embed[256]
        return marker + grid @ self._patch_proj

    @torch.no_grad()
    def hidden_states(
        self, text: str, image: np.ndarray | None
    ) -> list[np.ndarray]:
        rows = []
        if image is not None:
            rows.append(self._image_tokens(image))
        data = text.encode("utf-8") or b"\x00"
        rows.append(self._token_embed[torch.tensor(list(data), dtype=torch.long)])
        h = torch.cat(rows, dim=0)
        h = h + self._positions[: h.shape[0]]

        states = [h]
        for mix, expand, contract in self._layers:
            # causal mean over the prefix stands in for attention
            prefix_mean = torch.cumsum(h, dim=0) / torch.arange(
                1, h.shape[0] + 1, dtype=torch.float32
            ).unsqueeze(1)
            h = h + torch.tanh(prefix_mean @ mix + h @ expand) @ contract
            states.append(h)
        return [state.numpy().astype(np.float64) for state in states]


def _block_mean(luma: torch.Tensor, grid: int) -> torch.Tensor:
    """Average an (H, W) map into a (grid, grid) matrix, padding as needed."""
    height, width = luma.shape
    out = torch.zeros(grid, grid)
    for i in range(grid):
        for j in range(grid):
            block = luma[
                i * height // grid : max((i + 1) * height // grid, i * height // grid + 1),
                j * width // grid : max((j + 1) * width // grid, j * width // grid + 1),
            ]
            if block.numel():
                out[i, j] = block.mean()
    return out


class HfAdapter:
    """Wrap a Hugging Face causal LM (optionally multimodal) checkpoint."""

    def __init__(self, model_id: str, device: str = "cpu"):
        from transformers import AutoModel, AutoTokenizer  # deferred heavy import

        self.model_id = model_id
        self._tokenizer = AutoTokenizer.from_pretrained(model_id)
        self._model = AutoModel.from_pretrained(model_id).to(device).eval()
        self._device = device
        self.dim = int(self._model.config.hidden_size)
        self.layer_count = int(self._model.config.num_hidden_layers) + 1

    @torch.no_grad()
    def hidden_states(
        self, text: str, image: np.ndarray | None
    ) -> list[np.ndarray]:
        if image is not None:
            raise ValueError(
                f"{self.model_id} was loaded text-only; image input unsupported"
            )
        encoded = self._tokenizer(text, return_tensors="pt").to(self._device)
        output = self._model(**encoded, output_hidden_states=True)
        return [
            state[0].cpu().numpy().astype(np.float64)
            for state in output.hidden_states
        ]


def load_model(model_id: str, device: str = "cpu") -> ModelAdapter:
    if model_id == "tiny-mm":
        return TinyMultimodalModel()
    return HfAdapter(model_id, device=device)
