"""Candidate generation and noisy-channel ranking.

Candidates come from a deletion-neighborhood index over the vocabulary;
ranking combines the channel likelihood with a prior raised to a
hyperparameter exponent, at word level or jointly over a sentence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

from spellchannel.channel import (
    CDParams,
    ConfusionModel,
    bm_likelihood,
    cd_likelihood,
)
from spellchannel.textcore import (
    ScriptProfile,
    dl_distance,
    double_metaphone,
    transliterate,
)

__all__ = [
    "CandidateIndex",
    "Candidate",
    "CandidateSet",
    "CorrectionConfig",
    "CorrectionModels",
    "CorrectionResult",
    "generate_candidates",
    "correct_word",
    "correct_sentence",
    "ablation_correct",
    "run_correction",
]


def _deletes(word: str, depth: int) -> set[str]:
    """All strings reachable from `word` by up to `depth` deletions."""
    results = {word}
    frontier = {word}
    for _ in range(depth):
        nxt = set()
        for w in frontier:
            for i in range(len(w)):
                d = w[:i] + w[i + 1 :]
                if d not in results:
                    nxt.add(d)
        results.update(nxt)
        frontier = nxt
    return results


class CandidateIndex:
    """Deletion-neighborhood index answering all-words-within-distance queries.

    Words are indexed by every deletion (up to max_ed) of their first
    prefix_len characters; query hits are verified with the real distance,
    so lookups return exactly the words within the requested bound.
    """

    def __init__(self, vocab_counts: dict[str, int], max_ed: int, prefix_len: int):
        self.vocab = dict(vocab_counts)
        self.max_ed = max_ed
        self.prefix_len = prefix_len
        self._buckets: dict[str, list[str]] = {}

    @classmethod
    def build(
        cls, vocab_counts: dict[str, int], max_ed: int = 2, prefix_len: int = 7
    ) -> "CandidateIndex":
        if max_ed < 0:
            raise ValueError("max_ed must be >= 0")
        if prefix_len < 1:
            raise ValueError("prefix_len must be >= 1")
        index = cls(vocab_counts, max_ed, prefix_len)
        for word in sorted(index.vocab):
            for d in _deletes(word[:prefix_len], max_ed):
                index._buckets.setdefault(d, []).append(word)
        return index

    def query(self, word: str, k: int) -> list[str]:
        """All vocabulary words within distance k of `word`, sorted."""
        if k > self.max_ed:
            raise ValueError(f"index built for max_ed={self.max_ed}, asked for {k}")
        seen: set[str] = set()
        hits: list[str] = []
        for d in _deletes(word[: self.prefix_len], k):
            for cand in self._buckets.get(d, ()):
                if cand in seen:
                    continue
                seen.add(cand)
                if abs(len(cand) - len(word)) <= k and dl_distance(word, cand) <= k:
                    hits.append(cand)
        hits.sort()
        return hits

    def __len__(self) -> int:
        return len(self.vocab)

    def __contains__(self, word: str) -> bool:
        return word in self.vocab


@dataclass(frozen=True)
class Candidate:
    word: str
    channel_logp: float | None = None
    prior_logp: float | None = None
    posterior_logp: float | None = None


@dataclass
class CandidateSet:
    """Candidate pool C(x) for one observed word, optionally scored.

    Scored sets are sorted by posterior descending (ties: higher channel
    score, then lexicographic).
    """

    observed: str
    candidates: list[Candidate]
    filtered_by_metaphone: bool = False

    def words(self) -> list[str]:
        return [c.word for c in self.candidates]

    def __iter__(self) -> Iterator[str]:
        return iter(self.words())

    def __len__(self) -> int:
        return len(self.candidates)

    def __contains__(self, word: str) -> bool:
        return any(c.word == word for c in self.candidates)

    def best(self) -> Candidate:
        return self.candidates[0]

    def to_json_dict(self) -> dict:
        return {
            "observed": self.observed,
            "filtered_by_metaphone": self.filtered_by_metaphone,
            "candidates": [
                {
                    "word": c.word,
                    "channel_logp": c.channel_logp,
                    "prior_logp": c.prior_logp,
                    "posterior_logp": c.posterior_logp,
                }
                for c in self.candidates
            ],
        }


@dataclass(frozen=True)
class CorrectionConfig:
    lambda_: float = 1.0
    mode: str = "sentence"
    error_model: str = "bm"
    per_word_cap: int = 8
    beam_width: int = 16
    enumeration_limit: int = 10_000
    ablation: bool = False
    oov_penalty_logp: float = -50.0
    ablation_vocab: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.lambda_ < 0:
            raise ValueError("lambda_ must be >= 0")
        if self.mode not in ("word", "sentence"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.error_model not in ("bm", "cd"):
            raise ValueError(f"unknown error model {self.error_model!r}")
        if self.per_word_cap < 1:
            raise ValueError("per_word_cap must be >= 1")
        if self.beam_width < 1:
            raise ValueError("beam_width must be >= 1")


@dataclass
class CorrectionModels:
    """Immutable bundle the corrector scores with."""

    confusion: ConfusionModel | None
    lm: object
    index: CandidateIndex
    profile: ScriptProfile
    cd_params: CDParams = field(default_factory=CDParams)
    ablation_index: CandidateIndex | None = None


@dataclass
class CorrectionResult:
    original: list[str]
    corrected: list[str]
    traces: list[CandidateSet]
    changed: list[int]

    def to_json_dict(self) -> dict:
        return {
            "original": self.original,
            "corrected": self.corrected,
            "changed": self.changed,
            "traces": [t.to_json_dict() for t in self.traces],
        }


@lru_cache(maxsize=1_000_000)
def _metaphone_cached(latin: str) -> str:
    return double_metaphone(latin)


def _phonetic_code(word: str, profile: ScriptProfile) -> str:
    return _metaphone_cached(transliterate(word, profile))


def generate_candidates(
    word: str, index: CandidateIndex, profile: ScriptProfile
) -> CandidateSet:
    """Vocabulary candidates for one observed word.

    Distance bound is 1 for words of length <= 3, else 2. Lists of fewer
    than 5 hits pass through unfiltered; larger lists keep only the words
    at minimum phonetic-code distance from the observed word. The observed
    word itself is always a member.
    """
    k = 1 if len(word) <= 3 else 2
    raw = index.query(word, k)
    filtered = False
    if len(raw) < 5:
        kept = raw
    else:
        obs_code = _phonetic_code(word, profile)
        dists = [(dl_distance(obs_code, _phonetic_code(c, profile)), c) for c in raw]
        best = min(d for d, _ in dists)
        kept = [c for d, c in dists if d == best]
        filtered = True
    if word not in kept:
        kept = kept + [word]
    return CandidateSet(word, [Candidate(w) for w in kept], filtered)


def _channel_scores(
    observed: str, words: Sequence[str], models: CorrectionModels, config: CorrectionConfig
) -> list[float]:
    if config.error_model == "bm":
        if models.confusion is None:
            raise ValueError("bm scoring requires a trained confusion model")
        return [bm_likelihood(observed, w, models.confusion) for w in words]
    return [cd_likelihood(observed, w, words, models.cd_params) for w in words]


def correct_word(
    observed: str,
    left_context: Sequence[str],
    right_context: Sequence[str],
    models: CorrectionModels,
    config: CorrectionConfig,
) -> CandidateSet:
    """Score and rank the candidate set for one word in context."""
    cand_set = generate_candidates(observed, models.index, models.profile)
    words = cand_set.words()
    channel = _channel_scores(observed, words, models, config)
    priors = models.lm.score_candidates(list(left_context), list(right_context), words)
    scored = [
        Candidate(w, ch, pr, ch + config.lambda_ * pr)
        for w, ch, pr in zip(words, channel, priors)
    ]
    scored.sort(key=lambda c: (-c.posterior_logp, -c.channel_logp, c.word))
    return CandidateSet(observed, scored, cand_set.filtered_by_metaphone)


def _capped_pool(
    observed: str,
    models: CorrectionModels,
    config: CorrectionConfig,
) -> tuple[CandidateSet, list[str], list[float]]:
    """Candidate pool with channel scores, truncated to per_word_cap by
    channel score (the observed word always survives truncation)."""
    cand_set = generate_candidates(observed, models.index, models.profile)
    words = cand_set.words()
    channel = _channel_scores(observed, words, models, config)
    order = sorted(range(len(words)), key=lambda i: (-channel[i], words[i]))
    keep = order[: config.per_word_cap]
    kept_words = [words[i] for i in keep]
    kept_channel = [channel[i] for i in keep]
    if observed not in kept_words:
        idx = words.index(observed)
        kept_words.append(observed)
        kept_channel.append(channel[idx])
    return cand_set, kept_words, kept_channel


def correct_sentence(
    tokens: Sequence[str],
    models: CorrectionModels,
    config: CorrectionConfig,
) -> CorrectionResult:
    """Jointly rank candidate sentences.

    Sentence score = sum of channel scores + lambda * sum of per-position
    prior scores, each position conditioned on the chosen prefix (and the
    observed right context, for backends that use it). Small product
    spaces are enumerated exactly; larger ones use a beam.
    """
    tokens = list(tokens)
    if not tokens:
        raise ValueError("tokens must be non-empty")
    n = len(tokens)

    pools: list[tuple[list[str], list[float]]] = []
    traces: list[CandidateSet] = []
    product = 1
    for i, tok in enumerate(tokens):
        cand_set, words, channel = _capped_pool(tok, models, config)
        pools.append((words, channel))
        traces.append(cand_set)
        product = min(product * len(words), config.enumeration_limit + 1)

    lam = config.lambda_

    def expand(prefix: list[str], i: int) -> list[tuple[float, str]]:
        words, channel = pools[i]
        priors = models.lm.score_candidates(prefix, tokens[i + 1 :], words)
        return [
            (ch + lam * pr, w) for w, ch, pr in zip(words, channel, priors)
        ]

    if product <= config.enumeration_limit:
        best_key: tuple | None = None
        best_words: list[str] = []

        def dfs(i: int, prefix: list[str], score: float) -> None:
            nonlocal best_key, best_words
            if i == n:
                key = (-score, tuple(prefix))
                if best_key is None or key < best_key:
                    best_key = key
                    best_words = list(prefix)
                return
            for step_score, w in expand(prefix, i):
                dfs(i + 1, prefix + [w], score + step_score)

        dfs(0, [], 0.0)
        corrected = best_words
    else:
        beams: list[tuple[float, tuple[str, ...]]] = [(0.0, ())]
        for i in range(n):
            expansions: list[tuple[float, tuple[str, ...]]] = []
            for score, prefix in beams:
                for step_score, w in expand(list(prefix), i):
                    expansions.append((score + step_score, prefix + (w,)))
            expansions.sort(key=lambda e: (-e[0], e[1]))
            beams = expansions[: config.beam_width]
        corrected = list(beams[0][1])

    scored_traces = [
        correct_word(tok, corrected[:i], tokens[i + 1 :], models, config)
        for i, tok in enumerate(tokens)
    ]
    changed = [i for i in range(n) if corrected[i] != tokens[i]]
    return CorrectionResult(tokens, corrected, scored_traces, changed)


def _correct_wordwise(
    tokens: Sequence[str],
    models: CorrectionModels,
    config: CorrectionConfig,
) -> CorrectionResult:
    tokens = list(tokens)
    traces = [
        correct_word(tok, tokens[:i], tokens[i + 1 :], models, config)
        for i, tok in enumerate(tokens)
    ]
    corrected = [t.best().word for t in traces]
    changed = [i for i in range(len(tokens)) if corrected[i] != tokens[i]]
    return CorrectionResult(tokens, corrected, traces, changed)


def ablation_correct(
    tokens: Sequence[str],
    confusion: ConfusionModel | None,
    config: CorrectionConfig,
    index: CandidateIndex | None = None,
    profile: ScriptProfile | None = None,
    cd_params: CDParams = CDParams(),
) -> CorrectionResult:
    """Maximum-likelihood correction against a fixed word list, no prior.

    Candidates come from the ablation vocabulary; an observed word missing
    from that vocabulary competes with its channel score plus the OOV
    penalty. With no prior the sentence objective decomposes per token, so
    word and sentence mode coincide.
    """
    from spellchannel.profiles import LATIN

    if not config.ablation_vocab and index is None:
        raise ValueError("ablation requires ablation_vocab or a prebuilt index")
    if index is None:
        index = CandidateIndex.build({w: 1 for w in config.ablation_vocab})
    profile = profile or LATIN

    tokens = list(tokens)
    corrected: list[str] = []
    traces: list[CandidateSet] = []
    for tok in tokens:
        cand_set = generate_candidates(tok, index, profile)
        words = cand_set.words()
        if config.error_model == "bm":
            if confusion is None:
                raise ValueError("bm scoring requires a trained confusion model")
            channel = [bm_likelihood(tok, w, confusion) for w in words]
        else:
            channel = [cd_likelihood(tok, w, words, cd_params) for w in words]
        scored = []
        for w, ch in zip(words, channel):
            if w == tok and tok not in index:
                ch = ch + config.oov_penalty_logp
            scored.append(Candidate(w, ch, 0.0, ch))
        scored.sort(key=lambda c: (-c.posterior_logp, -c.channel_logp, c.word))
        traces.append(CandidateSet(tok, scored, cand_set.filtered_by_metaphone))
        corrected.append(scored[0].word)
    changed = [i for i in range(len(tokens)) if corrected[i] != tokens[i]]
    return CorrectionResult(tokens, corrected, traces, changed)


def run_correction(
    tokens: Sequence[str],
    models: CorrectionModels,
    config: CorrectionConfig,
) -> CorrectionResult:
    """Dispatch on config: ablation, word mode, or sentence mode."""
    if config.ablation:
        index = models.ablation_index
        if index is None or index.vocab.keys() != config.ablation_vocab:
            index = CandidateIndex.build({w: 1 for w in config.ablation_vocab})
            models.ablation_index = index
        return ablation_correct(
            list(tokens), models.confusion, config, index, models.profile, models.cd_params
        )
    if config.mode == "word":
        return _correct_wordwise(tokens, models, config)
    return correct_sentence(tokens, models, config)
