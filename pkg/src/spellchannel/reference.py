"""Slow, transparent reference implementations for cross-checking.

Everything here trades speed for obviousness: exhaustive searches and
linear scans that restate the definitions directly. The self-check
command and the test suites verify the fast production paths against
these.
"""

from __future__ import annotations

import math

from spellchannel.channel import ConfusionModel
from spellchannel.textcore import (
    EPSILON,
    ScriptProfile,
    dl_distance,
    double_metaphone,
    transliterate,
)

__all__ = [
    "ref_dl_scripts",
    "ref_dl_memo",
    "ref_bm_enumerate",
    "ref_query_scan",
    "ref_generate_candidates",
]


def ref_dl_scripts(a: str, b: str) -> int:
    """Minimum edit-script cost by exhaustive search over all scripts.

    Moves: substitute/match, adjacent transposition (consuming two
    characters on each side), delete, insert. Branch-and-bound pruning
    only skips scripts already worse than the running best.
    """
    best = math.inf

    def go(i: int, j: int, cost: int) -> None:
        nonlocal best
        if cost >= best:
            return
        if i == len(a) and j == len(b):
            best = cost
            return
        if i < len(a) and j < len(b):
            go(i + 1, j + 1, cost + (a[i] != b[j]))
        if (
            i + 1 < len(a)
            and j + 1 < len(b)
            and a[i] == b[j + 1]
            and a[i + 1] == b[j]
            and a[i] != a[i + 1]
        ):
            go(i + 2, j + 2, cost + 1)
        if i < len(a):
            go(i + 1, j, cost + 1)
        if j < len(b):
            go(i, j + 1, cost + 1)

    go(0, 0, 0)
    return int(best)


def ref_dl_memo(a: str, b: str) -> int:
    """Textbook top-down recursion for the restricted (optimal string
    alignment) distance, memoized so length-6 sweeps stay fast."""
    memo: dict[tuple[int, int], int] = {}

    def d(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        key = (i, j)
        if key in memo:
            return memo[key]
        best = min(
            d(i - 1, j) + 1,
            d(i, j - 1) + 1,
            d(i - 1, j - 1) + (a[i - 1] != b[j - 1]),
        )
        if i > 1 and j > 1 and a[i - 1] == b[j - 2] and a[i - 2] == b[j - 1]:
            best = min(best, d(i - 2, j - 2) + 1)
        memo[key] = best
        return best

    return d(len(a), len(b))


def ref_bm_enumerate(observed: str, candidate: str, model: ConfusionModel) -> float:
    """Maximum log-likelihood over every explicit single-character
    alignment, enumerated without memoization."""
    best = -math.inf

    def go(i: int, j: int, acc: float) -> None:
        nonlocal best
        if i == len(candidate) and j == len(observed):
            best = max(best, acc)
            return
        if i < len(candidate) and j < len(observed):
            go(i + 1, j + 1, acc + model.logp(candidate[i], observed[j]))
        if i < len(candidate):
            go(i + 1, j, acc + model.logp(candidate[i], EPSILON))
        if j < len(observed):
            go(i, j + 1, acc + model.logp(EPSILON, observed[j]))

    go(0, 0, 0.0)
    return best


def ref_query_scan(vocab_words, word: str, k: int) -> list[str]:
    """Linear-scan distance filter over the whole vocabulary."""
    return sorted(w for w in vocab_words if dl_distance(word, w) <= k)


def ref_generate_candidates(
    word: str, vocab_counts: dict[str, int], profile: ScriptProfile
) -> tuple[list[str], bool]:
    """Candidate heuristic restated step by step over a linear scan.

    Length <= 3 searches at distance 1, longer words at distance 2; under
    five hits pass through; otherwise only the hits at minimum phonetic
    distance survive; the observed word is always a member.
    """
    k = 1 if len(word) <= 3 else 2
    hits = sorted(w for w in vocab_counts if dl_distance(word, w) <= k)
    if len(hits) < 5:
        kept, filtered = hits, False
    else:
        obs_code = double_metaphone(transliterate(word, profile))
        dists = {
            c: dl_distance(obs_code, double_metaphone(transliterate(c, profile)))
            for c in hits
        }
        minimum = min(dists.values())
        kept = [c for c in hits if dists[c] == minimum]
        filtered = True
    if word not in kept:
        kept = kept + [word]
    return kept, filtered
