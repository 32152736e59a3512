"""Model definition: configuration, word vocabulary, decoder-only network."""

from __future__ import annotations

import re
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import torch
from torch import nn

START = "<s>"
END = "</s>"
UNK = "<unk>"

_SENTENCE_END = re.compile(r"[.!?।]+")

CHECKPOINT_SCHEMA = 1


def split_tokens(line: str) -> list[list[str]]:
    """Whitespace-tokenized sentences of one input line.

    Sentence enders are period, question mark, exclamation mark, and the
    danda; everything else stays part of the word. Deliberately naive:
    the corpora this model is meant for are already one word per
    whitespace run.
    """
    out = []
    for seg in _SENTENCE_END.split(line):
        toks = seg.split()
        if toks:
            out.append(toks)
    return out


@dataclass(frozen=True)
class ToyLMConfig:
    """Hyperparameters, all desk-scale by default."""

    vocab_size: int = 5000
    embedding_dim: int = 64
    heads: int = 4
    layers: int = 2
    dropout: float = 0.05
    context_len: int = 32
    epochs: int = 8
    batch_size: int = 64
    lr: float = 3e-3
    seed: int = 0

    def __post_init__(self):
        if not 4 <= self.vocab_size <= 5000:
            raise ValueError("vocab_size must be between 4 and 5000")
        if self.embedding_dim <= 0 or self.embedding_dim % self.heads != 0:
            raise ValueError("heads must divide embedding_dim")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        if self.context_len < 2:
            raise ValueError("context_len must be >= 2")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be positive")


class Vocab:
    """Word ids: the three sentinels first, then words by frequency."""

    def __init__(self, words: Sequence[str]):
        self.words = tuple(words)
        self.index = {w: i for i, w in enumerate(self.words)}
        for sentinel in (START, END, UNK):
            if sentinel not in self.index:
                raise ValueError(f"vocabulary is missing the {sentinel} sentinel")

    @classmethod
    def build(cls, sentences: Iterable[Sequence[str]], max_size: int) -> "Vocab":
        counts: dict[str, int] = {}
        for toks in sentences:
            for t in toks:
                counts[t] = counts.get(t, 0) + 1
        counts.pop(START, None)
        counts.pop(END, None)
        counts.pop(UNK, None)
        keep = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[: max_size - 3]
        return cls((START, END, UNK) + tuple(w for w, _ in keep))

    def id_of(self, token: str) -> int:
        return self.index.get(token, self.index[UNK])

    def encode(self, tokens: Sequence[str]) -> list[int]:
        return [self.id_of(t) for t in tokens]

    def __len__(self) -> int:
        return len(self.words)


class ToyTransformerLM(nn.Module):
    """Decoder-only next-word model.

    Learned token and position embeddings feed a stack of causal
    self-attention blocks. The output head starts at zero so an untrained
    model scores every word identically (exact uniform distribution).
    """

    def __init__(self, config: ToyLMConfig, vocab_len: int):
        super().__init__()
        self.config = config
        self.token_emb = nn.Embedding(vocab_len, config.embedding_dim)
        self.pos_emb = nn.Embedding(config.context_len, config.embedding_dim)
        self.drop = nn.Dropout(config.dropout)
        layer = nn.TransformerEncoderLayer(
            d_model=config.embedding_dim,
            nhead=config.heads,
            dim_feedforward=4 * config.embedding_dim,
            dropout=config.dropout,
            batch_first=True,
            norm_first=True,
        )
        self.blocks = nn.TransformerEncoder(
            layer, num_layers=config.layers, enable_nested_tensor=False
        )
        self.norm = nn.LayerNorm(config.embedding_dim)
        self.head = nn.Linear(config.embedding_dim, vocab_len)
        nn.init.zeros_(self.head.weight)
        nn.init.zeros_(self.head.bias)

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        # ids: (batch, time) -> logits: (batch, time, vocab)
        t = ids.shape[1]
        if t > self.config.context_len:
            raise ValueError(f"sequence length {t} exceeds context_len")
        pos = torch.arange(t, device=ids.device)
        x = self.drop(self.token_emb(ids) + self.pos_emb(pos))
        causal = torch.triu(
            torch.ones(t, t, dtype=torch.bool, device=ids.device), diagonal=1
        )
        x = self.blocks(x, mask=causal)
        return self.head(self.norm(x))

    @torch.no_grad()
    def next_logprobs(self, vocab: Vocab, left: Sequence[str]) -> torch.Tensor:
        """Log-distribution over the vocabulary after the given left context.

        The context is mapped through the vocabulary (unknowns become the
        UNK sentinel), prefixed with the start sentinel, and truncated to
        the most recent window that fits the position table.
        """
        self.eval()
        ids = [vocab.id_of(START)] + vocab.encode(left)
        ids = ids[-self.config.context_len :]
        logits = self(torch.tensor([ids], dtype=torch.long))
        return torch.log_softmax(logits[0, -1], dim=-1)


def save_checkpoint(path, model: ToyTransformerLM, vocab: Vocab, history: list[dict]) -> None:
    torch.save(
        {
            "schema_version": CHECKPOINT_SCHEMA,
            "kind": "toy_transformer_lm",
            "config": asdict(model.config),
            "vocab": list(vocab.words),
            "state_dict": model.state_dict(),
            "history": history,
        },
        path,
    )


def load_checkpoint(path) -> tuple[ToyTransformerLM, Vocab, list[dict]]:
    data = torch.load(path, map_location="cpu", weights_only=True)
    if data.get("kind") != "toy_transformer_lm" or data.get("schema_version") != CHECKPOINT_SCHEMA:
        raise ValueError(f"{path}: not a schema-version-{CHECKPOINT_SCHEMA} toy LM checkpoint")
    config = ToyLMConfig(**data["config"])
    vocab = Vocab(data["vocab"])
    model = ToyTransformerLM(config, len(vocab))
    model.load_state_dict(data["state_dict"])
    model.eval()
    return model, vocab, data["history"]
