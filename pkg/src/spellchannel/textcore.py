"""String substrate: tokenization, edit distance, alignment, transliteration.

Everything here is a pure function on immutable inputs, so unrestricted
concurrent use is safe.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field

from spellchannel.metaphone import double_metaphone

__all__ = [
    "EPSILON",
    "ScriptProfile",
    "Alignment",
    "tokenize",
    "dl_distance",
    "dl_alignment",
    "transliterate",
    "double_metaphone",
    "load_profile",
]

# The empty-partition symbol. Alignments and confusion-model rows use the
# empty string for it, which is also how it serializes to JSON keys.
EPSILON = ""


@dataclass(frozen=True)
class ScriptProfile:
    """Per-script knobs: combining-character list and a romanization table.

    Characters without a ``translit`` entry pass through unchanged, so the
    mapping is total over any input.
    """

    name: str
    modifiers: frozenset[str] = field(default_factory=frozenset)
    translit: dict[str, str] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "modifiers": sorted(self.modifiers),
            "translit": {k: self.translit[k] for k in sorted(self.translit)},
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ScriptProfile":
        return cls(
            name=data["name"],
            modifiers=frozenset(data.get("modifiers", [])),
            translit=dict(data.get("translit", {})),
        )


def load_profile(path) -> ScriptProfile:
    """Load a ScriptProfile from a JSON file ({"name":…,"modifiers":[…],"translit":{…}})."""
    with open(path, "r", encoding="utf-8") as fh:
        return ScriptProfile.from_json_dict(json.load(fh))


def _strip_edge_punct(token: str) -> str:
    # Unicode punctuation (categories P*) is stripped at token edges only;
    # interior punctuation stays so composed words survive intact.
    start, end = 0, len(token)
    while start < end and unicodedata.category(token[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(token[end - 1]).startswith("P"):
        end -= 1
    return token[start:end]


def tokenize(text: str, profile: ScriptProfile | None = None) -> list[str]:
    """Whitespace-split `text` and strip edge punctuation; drops empty tokens.

    The rules are script-independent; `profile` is accepted so callers can
    thread one through uniformly.
    """
    out = []
    for raw in text.split():
        tok = _strip_edge_punct(raw)
        if tok:
            out.append(tok)
    return out


def dl_distance(a: str, b: str) -> int:
    """Damerau-Levenshtein distance, restricted (optimal string alignment) variant.

    Counts insertions, deletions, substitutions and adjacent transpositions;
    a transposed pair cannot be edited again.
    """
    if a == b:
        return 0
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    prev2: list[int] | None = None
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        cur = [i] + [0] * lb
        ai = a[i - 1]
        for j in range(1, lb + 1):
            cost = 0 if ai == b[j - 1] else 1
            best = prev[j - 1] + cost
            d = prev[j] + 1
            if d < best:
                best = d
            d = cur[j - 1] + 1
            if d < best:
                best = d
            if cost and i > 1 and j > 1 and ai == b[j - 2] and a[i - 2] == b[j - 1]:
                d = prev2[j - 2] + 1  # type: ignore[index]
                if d < best:
                    best = d
            cur[j] = best
        prev2 = prev
        prev = cur
    return prev[lb]


@dataclass(frozen=True)
class Alignment:
    """Character alignment between a source and a target string.

    Each pair is (source char or EPSILON, target char or EPSILON); (ε, ε)
    never occurs. Dropping ε from either side reconstructs that string.
    """

    pairs: tuple[tuple[str, str], ...]

    @property
    def source(self) -> str:
        return "".join(s for s, _ in self.pairs)

    @property
    def target(self) -> str:
        return "".join(t for _, t in self.pairs)

    @property
    def cost(self) -> int:
        """Number of non-identity pairs."""
        return sum(1 for s, t in self.pairs if s != t)


def dl_alignment(a: str, b: str) -> Alignment:
    """Minimal-cost character alignment of source `a` to target `b`.

    Uses plain insert/delete/substitute steps (no transposition step: the
    character channel has no transposition event, so a transposition shows
    up as two substitutions). Traceback tie-break is fixed — prefer
    match > substitution > deletion > insertion — which makes the alignment,
    and therefore model training, deterministic.
    """
    la, lb = len(a), len(b)
    # Full Levenshtein table; strings here are words, not documents.
    dist = [[0] * (lb + 1) for _ in range(la + 1)]
    for i in range(la + 1):
        dist[i][0] = i
    for j in range(lb + 1):
        dist[0][j] = j
    for i in range(1, la + 1):
        ai = a[i - 1]
        row = dist[i]
        above = dist[i - 1]
        for j in range(1, lb + 1):
            cost = 0 if ai == b[j - 1] else 1
            row[j] = min(above[j - 1] + cost, above[j] + 1, row[j - 1] + 1)
    pairs: list[tuple[str, str]] = []
    i, j = la, lb
    while i > 0 or j > 0:
        here = dist[i][j]
        if i > 0 and j > 0 and a[i - 1] == b[j - 1] and dist[i - 1][j - 1] == here:
            pairs.append((a[i - 1], b[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and dist[i - 1][j - 1] + 1 == here:
            pairs.append((a[i - 1], b[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and dist[i - 1][j] + 1 == here:
            pairs.append((a[i - 1], EPSILON))
            i -= 1
        else:
            pairs.append((EPSILON, b[j - 1]))
            j -= 1
    pairs.reverse()
    return Alignment(tuple(pairs))


def transliterate(word: str, profile: ScriptProfile) -> str:
    """Apply the profile's per-character romanization map, in order.

    Unmapped characters pass through unchanged.
    """
    table = profile.translit
    if not table:
        return word
    return "".join(table.get(ch, ch) for ch in word)
