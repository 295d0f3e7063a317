"""Granularity-controllable time-series generation.

Hierarchical register tokenization with finite scalar quantization, a
token-conditioned flow-matching decoder, and block-autoregressive token
generation over granularity levels.
"""

__version__ = "0.1.0"
