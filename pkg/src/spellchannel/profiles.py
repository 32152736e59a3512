"""Built-in script profiles.

Two defaults ship with the toolkit: a Devanagari profile carrying the
character-modifier list and a romanization table, and a pass-through Latin
profile. The romanization follows a fixed Harvard-Kyoto-flavoured ASCII
scheme; candidate pruning only needs it to be deterministic, not scholarly.
"""

from __future__ import annotations

from spellchannel.textcore import ScriptProfile

__all__ = ["DEVANAGARI", "LATIN", "get_profile", "PROFILES"]

# Combining characters that must never be separated from their base during
# noising (the marker-interleave step skips these neighbours).
_DEVANAGARI_MODIFIERS = frozenset(
    ["ँ", "ै", "ो", "ी", "ु", "ू", "ि", "ृ", "ॠ", "ॡ"]
)

_DEVANAGARI_TRANSLIT = {
    # independent vowels
    "अ": "a", "आ": "aa", "इ": "i", "ई": "ii", "उ": "u", "ऊ": "uu",
    "ऋ": "ri", "ॠ": "rii", "ऌ": "li", "ॡ": "lii",
    "ए": "e", "ऐ": "ai", "ओ": "o", "औ": "au",
    "ऍ": "e", "ऑ": "o",
    # consonants (inherent a)
    "क": "ka", "ख": "kha", "ग": "ga", "घ": "gha", "ङ": "nga",
    "च": "cha", "छ": "chha", "ज": "ja", "झ": "jha", "ञ": "nya",
    "ट": "ta", "ठ": "tha", "ड": "da", "ढ": "dha", "ण": "na",
    "त": "ta", "थ": "tha", "द": "da", "ध": "dha", "न": "na",
    "प": "pa", "फ": "pha", "ब": "ba", "भ": "bha", "म": "ma",
    "य": "ya", "र": "ra", "ल": "la", "व": "wa",
    "श": "sha", "ष": "sha", "स": "sa", "ह": "ha",
    # nukta consonants
    "क़": "qa", "ख़": "kha", "ग़": "ga", "ज़": "za", "ड़": "ra",
    "ढ़": "rha", "फ़": "fa", "य़": "ya",
    # dependent vowel signs
    "ा": "aa", "ि": "i", "ी": "ii", "ु": "u", "ू": "uu",
    "ृ": "ri", "ॄ": "rii", "ॢ": "li", "ॣ": "lii",
    "े": "e", "ै": "ai", "ो": "o", "ौ": "au", "ॅ": "e", "ॉ": "o",
    # signs
    "ं": "n", "ँ": "n", "ः": "h", "्": "", "ऽ": "", "ॐ": "om",
    # digits
    "०": "0", "१": "1", "२": "2", "३": "3", "४": "4",
    "५": "5", "६": "6", "७": "7", "८": "8", "९": "9",
    # punctuation that may survive inside tokens
    "।": "", "॥": "",
}

DEVANAGARI = ScriptProfile(
    name="devanagari",
    modifiers=_DEVANAGARI_MODIFIERS,
    translit=_DEVANAGARI_TRANSLIT,
)

LATIN = ScriptProfile(name="latin")

PROFILES = {"devanagari": DEVANAGARI, "latin": LATIN}


def get_profile(name: str) -> ScriptProfile:
    try:
        return PROFILES[name]
    except KeyError:
        raise KeyError(
            f"unknown profile {name!r}; built-ins: {sorted(PROFILES)}"
        ) from None
