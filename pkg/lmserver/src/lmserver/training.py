"""Training loop: block batching over a token stream, divergence guard."""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass
from typing import Iterable

import torch
from torch.nn import functional as F

from lmserver.model import (
    END,
    START,
    ToyLMConfig,
    ToyTransformerLM,
    Vocab,
    split_tokens,
)

logger = logging.getLogger("lmserver")


class TrainingDiverged(RuntimeError):
    """Loss left the finite range, or training never beat the uniform baseline."""


@dataclass
class TrainResult:
    model: ToyTransformerLM
    vocab: Vocab
    history: list[dict]

    @property
    def final_heldout_ce(self) -> float:
        return self.history[-1]["heldout_ce"]


def _assert_finite(value: float, where: str) -> None:
    if not math.isfinite(value):
        raise TrainingDiverged(f"loss became non-finite ({value}) {where}")


def _encode_stream(sentences: list[list[str]], vocab: Vocab) -> torch.Tensor:
    ids: list[int] = []
    for toks in sentences:
        ids.extend(vocab.encode([START] + list(toks) + [END]))
    return torch.tensor(ids, dtype=torch.long)


def _blocks(stream: torch.Tensor, block_len: int) -> list[tuple[torch.Tensor, torch.Tensor]]:
    """(input, target) pairs of equal length carved from the stream."""
    out = []
    for s in range(0, len(stream) - 1, block_len):
        x = stream[s : s + block_len]
        y = stream[s + 1 : s + block_len + 1]
        if len(y) < len(x):
            x = x[: len(y)]
        if len(x) >= 1:
            out.append((x, y))
    return out


def _heldout_ce(model: ToyTransformerLM, blocks) -> float:
    model.eval()
    total = 0.0
    tokens = 0
    with torch.no_grad():
        for x, y in blocks:
            logits = model(x.unsqueeze(0))
            loss = F.cross_entropy(logits.squeeze(0), y, reduction="sum")
            total += loss.item()
            tokens += len(y)
    return total / tokens


def train_toy(corpus: Iterable[str], config: ToyLMConfig) -> TrainResult:
    """Train on an iterable of text lines; returns model, vocab, history.

    One tenth of the sentences (at least one) is held out; its per-token
    cross-entropy is logged every epoch and the final value must beat the
    uniform baseline log(vocab size). A non-finite loss aborts immediately
    with the epoch and step in the message.
    """
    torch.manual_seed(config.seed)
    rng = random.Random(config.seed)

    sentences = [toks for line in corpus for toks in split_tokens(line)]
    if len(sentences) < 10:
        raise ValueError("corpus too small: need at least 10 sentences")
    rng.shuffle(sentences)
    n_hold = max(1, len(sentences) // 10)
    held, train = sentences[:n_hold], sentences[n_hold:]

    vocab = Vocab.build(train, config.vocab_size)
    train_stream = _encode_stream(train, vocab)
    held_blocks = _blocks(_encode_stream(held, vocab), config.context_len)
    train_blocks = _blocks(train_stream, config.context_len)
    if not train_blocks or not held_blocks:
        raise ValueError("corpus too small for the configured context_len")

    model = ToyTransformerLM(config, len(vocab))
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.lr)
    baseline = math.log(len(vocab))
    logger.info(
        "training: %d sentences, %d held out, vocab %d, uniform baseline %.3f",
        len(sentences), n_hold, len(vocab), baseline,
    )

    history: list[dict] = []
    for epoch in range(config.epochs):
        model.train()
        order = list(range(len(train_blocks)))
        rng.shuffle(order)
        epoch_loss = 0.0
        epoch_tokens = 0
        for step_start in range(0, len(order), config.batch_size):
            batch = [train_blocks[i] for i in order[step_start : step_start + config.batch_size]]
            # blocks are equal length except the stream tail; group by length
            by_len: dict[int, list[tuple[torch.Tensor, torch.Tensor]]] = {}
            for x, y in batch:
                by_len.setdefault(len(x), []).append((x, y))
            optimizer.zero_grad()
            step_loss = 0.0
            step_tokens = sum(y.numel() for _, y in batch)
            for group in by_len.values():
                xs = torch.stack([x for x, _ in group])
                ys = torch.stack([y for _, y in group])
                logits = model(xs)
                loss = F.cross_entropy(
                    logits.reshape(-1, logits.shape[-1]), ys.reshape(-1), reduction="sum"
                )
                _assert_finite(
                    loss.item(), f"at epoch {epoch} step {step_start // config.batch_size}"
                )
                step_loss += loss.item()
                (loss / step_tokens).backward()
            torch.nn.utils.clip_grad_norm_(model.parameters(), 1.0)
            optimizer.step()
            epoch_loss += step_loss
            epoch_tokens += step_tokens
        heldout = _heldout_ce(model, held_blocks)
        _assert_finite(heldout, f"on the held-out set after epoch {epoch}")
        record = {
            "epoch": epoch,
            "train_loss": epoch_loss / epoch_tokens,
            "heldout_ce": heldout,
        }
        history.append(record)
        logger.info(
            "epoch %d: train loss %.4f, held-out ce %.4f",
            epoch, record["train_loss"], record["heldout_ce"],
        )

    if history[-1]["heldout_ce"] >= baseline:
        raise TrainingDiverged(
            f"held-out cross-entropy {history[-1]['heldout_ce']:.4f} did not beat "
            f"the uniform baseline {baseline:.4f}"
        )
    return TrainResult(model=model, vocab=vocab, history=history)
