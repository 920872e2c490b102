"""Embedding server hosting a multimodal model behind a socket protocol."""

__version__ = "0.1.0"
