"""meol: training-free multimodal embedding and retrieval for SVG icons."""

__version__ = "0.1.0"
