"""Synthetic misspelling generator driven by a trained confusion model.

A marker token is interleaved between characters (never next to a
combining modifier); each character or marker position then corrupts with
probability proportional to that symbol's error frequency, resampling the
symbol from the confusion model's off-diagonal distribution. Marker
positions realize insertions; an ε draw realizes a deletion.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from spellchannel.channel import ConfusionModel
from spellchannel.textcore import EPSILON, ScriptProfile, tokenize

__all__ = [
    "MARKER",
    "NoiseModel",
    "EvalDataset",
    "derive_noise_model",
    "corrupt_tokens",
    "calibrate_rate_scale",
    "build_eval_dataset",
    "save_dataset",
    "load_dataset",
]

# Insertion-slot stand-in; never a real alphabet character.
MARKER = "\x00"


@dataclass
class NoiseModel:
    """Per-symbol corruption rates plus replacement distributions.

    count_probab maps each character (and MARKER) to its corruption
    probability; dict_selector maps each to a distribution over
    replacements, where the empty string means deletion.
    """

    count_probab: dict[str, float]
    dict_selector: dict[str, dict[str, float]]
    rate_scale: float
    seed: int
    source_hash: str
    _samplers: dict[str, tuple[list[str], list[float]]] = field(
        default_factory=dict, repr=False
    )

    def sampler(self, symbol: str) -> tuple[list[str], list[float]]:
        """(targets, cumulative weights) for random.choices, built lazily."""
        cached = self._samplers.get(symbol)
        if cached is None:
            row = self.dict_selector[symbol]
            targets = sorted(row)
            cum: list[float] = []
            acc = 0.0
            for t in targets:
                acc += row[t]
                cum.append(acc)
            cached = (targets, cum)
            self._samplers[symbol] = cached
        return cached


def derive_noise_model(
    model: ConfusionModel, rate_scale: float, seed: int
) -> NoiseModel:
    """Scale the model's per-character error rates and strip identity mass
    from each replacement row."""
    if rate_scale < 0:
        raise ValueError("rate_scale must be >= 0")
    count_probab: dict[str, float] = {}
    dict_selector: dict[str, dict[str, float]] = {}
    for c in sorted(model.alphabet):
        count_probab[c] = min(1.0, rate_scale * model.char_error_freq.get(c, 0.0))
        row = {t: p for t, p in model.edit_prob[c].items() if t != c}
        total = sum(row.values())
        dict_selector[c] = {t: p / total for t, p in row.items()}
    count_probab[MARKER] = min(
        1.0, rate_scale * model.char_error_freq.get(EPSILON, 0.0)
    )
    eps_row = {t: p for t, p in model.edit_prob[EPSILON].items() if t != EPSILON}
    eps_total = sum(eps_row.values())
    dict_selector[MARKER] = {t: p / eps_total for t, p in eps_row.items()}
    return NoiseModel(
        count_probab=count_probab,
        dict_selector=dict_selector,
        rate_scale=rate_scale,
        seed=seed,
        source_hash=model.content_hash(),
    )


def _interleave(word: str, modifiers: frozenset[str]) -> list[str]:
    """Characters with MARKER slotted between non-modifier neighbors; no
    marker after the final character."""
    out: list[str] = []
    last = len(word) - 1
    for j, ch in enumerate(word):
        out.append(ch)
        if j == last:
            continue
        if ch not in modifiers and word[j + 1] not in modifiers:
            out.append(MARKER)
    return out


def corrupt_tokens(
    tokens: Sequence[str],
    nm: NoiseModel,
    profile: ScriptProfile | None = None,
    rng: random.Random | None = None,
) -> list[str]:
    """Corrupt one sentence's tokens, preserving token count.

    Two RNG passes per word: first a corrupt/keep draw for every position
    whose symbol has a replacement row, then a replacement draw for each
    corrupted position. Symbols without a replacement row never corrupt.
    """
    if rng is None:
        rng = random.Random(nm.seed)
    modifiers = profile.modifiers if profile is not None else frozenset()
    out: list[str] = []
    for word in tokens:
        temp = _interleave(word, modifiers)
        flags = [
            rng.random() < nm.count_probab.get(t, 0.0) if t in nm.dict_selector else False
            for t in temp
        ]
        chars = []
        for t, flagged in zip(temp, flags):
            if not flagged:
                chars.append(t)
                continue
            targets, cum = nm.sampler(t)
            chars.append(rng.choices(targets, cum_weights=cum, k=1)[0])
        joined = "".join(c for c in chars if c != MARKER and c != EPSILON)
        # a fully-deleted word would break token alignment downstream
        out.append(joined if joined else word)
    return out


def _subseed(seed: int, index: int) -> int:
    digest = hashlib.sha256(f"{seed}:{index}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def calibrate_rate_scale(
    sentences: Iterable[str],
    model: ConfusionModel,
    target: float = 0.25,
    seed: int = 0,
    profile: ScriptProfile | None = None,
    tol: float = 0.005,
    max_iter: int = 50,
) -> tuple[NoiseModel, float]:
    """Bisect rate_scale until the token corruption rate hits `target`.

    Rates are measured with the same per-sentence sub-seeding that dataset
    generation uses, so the calibrated model reproduces the measured rate
    exactly when generating from the same sentences and seed.
    """
    if not 0.0 < target < 1.0:
        raise ValueError("target must lie strictly between 0 and 1")
    token_lists = [tokenize(s, profile) for s in sentences]
    token_lists = [t for t in token_lists if t]
    total = sum(len(t) for t in token_lists)
    if total == 0:
        raise ValueError("no tokens to calibrate on")

    def corruption_rate(scale: float) -> tuple[NoiseModel, float]:
        nm = derive_noise_model(model, scale, seed)
        changed = 0
        for i, toks in enumerate(token_lists):
            noisy = corrupt_tokens(toks, nm, profile, random.Random(_subseed(seed, i)))
            changed += sum(1 for a, b in zip(toks, noisy) if a != b)
        return nm, changed / total

    lo, hi = 0.0, 1.0
    nm, rate = corruption_rate(hi)
    grow = 0
    while rate < target:
        lo, hi = hi, hi * 2.0
        grow += 1
        if grow > 24:
            raise ValueError(
                f"target corruption rate {target} unreachable; best achieved {rate:.4f}"
            )
        nm, rate = corruption_rate(hi)
    best_nm, best_rate = nm, rate
    for _ in range(max_iter):
        if abs(best_rate - target) <= tol:
            break
        mid = (lo + hi) / 2.0
        nm, rate = corruption_rate(mid)
        if abs(rate - target) < abs(best_rate - target):
            best_nm, best_rate = nm, rate
        if rate < target:
            lo = mid
        else:
            hi = mid
    return best_nm, best_rate


@dataclass
class EvalDataset:
    """Aligned (noisy, clean) token sequences plus generation metadata."""

    pairs: list[tuple[list[str], list[str]]]
    meta: dict

    def __len__(self) -> int:
        return len(self.pairs)


def build_eval_dataset(
    sentences: Iterable[str],
    nm: NoiseModel,
    profile: ScriptProfile | None = None,
) -> EvalDataset:
    """Corrupt clean sentences into a parallel dataset.

    Each sentence gets an independent sub-seeded RNG, so generation is
    reproducible and order-independent under parallel execution.
    """
    pairs: list[tuple[list[str], list[str]]] = []
    index = 0
    total = changed = 0
    for sentence in sentences:
        clean = tokenize(sentence, profile)
        if not clean:
            continue
        rng = random.Random(_subseed(nm.seed, index))
        noisy = corrupt_tokens(clean, nm, profile, rng)
        pairs.append((noisy, clean))
        total += len(clean)
        changed += sum(1 for a, b in zip(clean, noisy) if a != b)
        index += 1
    meta = {
        "seed": nm.seed,
        "rate_scale": nm.rate_scale,
        "generator_model_hash": nm.source_hash,
        "sentences": len(pairs),
        "token_corruption_rate": changed / total if total else 0.0,
    }
    return EvalDataset(pairs, meta)


def save_dataset(dataset: EvalDataset, path) -> None:
    """TSV noisy<TAB>clean plus a .meta.json sidecar."""
    import json

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for noisy, clean in dataset.pairs:
            fh.write(f"{' '.join(noisy)}\t{' '.join(clean)}\n")
    with open(f"{path}.meta.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(dataset.meta, fh, ensure_ascii=False, sort_keys=True, indent=1)
        fh.write("\n")


def load_dataset(path) -> EvalDataset:
    import json
    import os

    pairs: list[tuple[list[str], list[str]]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected noisy<TAB>clean")
            pairs.append((parts[0].split(), parts[1].split()))
    meta = {}
    sidecar = f"{path}.meta.json"
    if os.path.exists(sidecar):
        with open(sidecar, "r", encoding="utf-8") as fh:
            meta = json.load(fh)
    return EvalDataset(pairs, meta)
