"""Toy autoregressive word-level language model with a wire protocol.

The package trains a small decoder-only transformer on a text corpus and
serves next-word log-probabilities over newline-delimited JSON (stdio or
TCP), the same protocol the spellchannel corrector speaks to external
language-model backends. The two packages share only that wire format.
"""

from lmserver.model import (
    END,
    START,
    UNK,
    ToyLMConfig,
    ToyTransformerLM,
    Vocab,
    load_checkpoint,
    save_checkpoint,
)
from lmserver.server import LMBackend, handle_line, serve_stdio, serve_tcp
from lmserver.training import TrainingDiverged, TrainResult, train_toy

__all__ = [
    "START",
    "END",
    "UNK",
    "ToyLMConfig",
    "ToyTransformerLM",
    "Vocab",
    "save_checkpoint",
    "load_checkpoint",
    "TrainResult",
    "TrainingDiverged",
    "train_toy",
    "LMBackend",
    "handle_line",
    "serve_stdio",
    "serve_tcp",
]
