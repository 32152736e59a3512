"""Character-level error model.

Trains single-character edit probabilities P(observed | intended) from
unsupervised (correct, misspelled, frequency) triples and scores word
likelihoods with them, either through the trained confusion matrix or a
constant-distributive baseline.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Collection, Iterable

from spellchannel.corpus import FrequencyTable
from spellchannel.textcore import EPSILON, dl_alignment, dl_distance

__all__ = [
    "Triple",
    "ConfusionModel",
    "CDParams",
    "LOG_FLOOR",
    "extract_triples",
    "train_confusion",
    "bm_likelihood",
    "cd_likelihood",
    "sentence_likelihood",
    "export_heatmap",
    "save_triples",
    "load_triples",
]

# Smallest per-edit log factor; keeps likelihoods finite for unseen edits
# and for characters outside the trained alphabet.
LOG_FLOOR = -25.0

EPSILON_LABEL = "ε"


@dataclass(frozen=True)
class Triple:
    """One mined error observation: `misspelled` seen `frequency` times as a
    corruption of `correct`."""

    correct: str
    misspelled: str
    frequency: int

    def __post_init__(self):
        if self.correct == self.misspelled:
            raise ValueError("correct and misspelled forms must differ")
        if self.frequency < 1:
            raise ValueError("frequency must be >= 1")


@dataclass(frozen=True)
class CDParams:
    """Constant-distributive channel parameter: mass kept on the observed word."""

    alpha: float = 0.65

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")


@dataclass
class ConfusionModel:
    """Row-stochastic single-character edit table over alphabet ∪ {ε}.

    edit_prob[source][target] = P(target observed | source intended).
    The (ε, ε) cell carries no mass. char_error_freq[c] is the raw
    (unsmoothed) share of c-sourced alignment mass that was a non-identity
    edit; char_error_freq[ε] is the insertion mass relative to all
    character-sourced mass, i.e. the per-slot insertion rate.
    """

    edit_prob: dict[str, dict[str, float]]
    char_error_freq: dict[str, float]
    alphabet: frozenset[str]
    smoothing_k: float = 0.1

    def logp(self, source: str, target: str) -> float:
        """Floored log edit probability; unseen/foreign edits get LOG_FLOOR."""
        p = self.edit_prob.get(source, {}).get(target, 0.0)
        if p <= 0.0:
            return LOG_FLOOR
        return max(math.log(p), LOG_FLOOR)

    def to_json_dict(self) -> dict:
        return {
            "alphabet": sorted(self.alphabet),
            "smoothing_k": self.smoothing_k,
            "rows": {
                src: {tgt: p for tgt, p in sorted(row.items())}
                for src, row in sorted(self.edit_prob.items())
            },
            "char_error_freq": dict(sorted(self.char_error_freq.items())),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ConfusionModel":
        return cls(
            edit_prob={src: dict(row) for src, row in data["rows"].items()},
            char_error_freq=dict(data["char_error_freq"]),
            alphabet=frozenset(data["alphabet"]),
            smoothing_k=float(data["smoothing_k"]),
        )

    def to_json_text(self) -> str:
        payload = {"schema_version": 1, "kind": "confusion_model"}
        payload.update(self.to_json_dict())
        return json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=1) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json_text())

    @classmethod
    def load(cls, path) -> "ConfusionModel":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if data.get("kind") != "confusion_model" or data.get("schema_version") != 1:
            raise ValueError(f"{path}: not a schema-version-1 confusion model file")
        return cls.from_json_dict(data)

    def content_hash(self) -> str:
        import hashlib

        blob = json.dumps(
            self.to_json_dict(), ensure_ascii=False, sort_keys=True, separators=(",", ":")
        )
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def extract_triples(
    table: FrequencyTable, max_ed: int = 2, ratio: float = 5.0
) -> list[Triple]:
    """Mine (correct, misspelled, freq) triples from a frequency table.

    A pair qualifies when the correct form is within `max_ed` edits of the
    misspelled form and at least `ratio` times more frequent.
    """
    if not table.counts:
        raise ValueError("frequency table is empty")
    # local import: corrector depends on this module for scoring
    from spellchannel.corrector import CandidateIndex

    index = CandidateIndex.build(table.counts, max_ed=max_ed)
    triples = []
    for misspelled, m_count in table.counts.items():
        threshold = ratio * m_count
        for correct in index.query(misspelled, max_ed):
            if correct != misspelled and table.counts[correct] >= threshold:
                triples.append(Triple(correct, misspelled, m_count))
    triples.sort(key=lambda t: (t.correct, t.misspelled))
    return triples


def train_confusion(
    triples: Iterable[Triple], alphabet: Collection[str], smoothing_k: float = 0.1
) -> ConfusionModel:
    """Count aligned character pairs across triples and add-k normalize.

    Each triple contributes its plain-alignment pairs (identity pairs
    included) weighted by frequency. Rows are smoothed over alphabet ∪ {ε}
    except that (ε, ε) gets no share.
    """
    if smoothing_k <= 0:
        raise ValueError("smoothing_k must be positive")
    alpha_set = frozenset(alphabet)
    if EPSILON in alpha_set:
        raise ValueError("alphabet must not contain the empty string")

    counts: dict[str, dict[str, float]] = {}
    triples = list(triples)
    if not triples:
        warnings.warn("training on zero triples: model is smoothing-only", stacklevel=2)
    for t in triples:
        for ch in t.correct + t.misspelled:
            if ch not in alpha_set:
                raise ValueError(f"character {ch!r} not in alphabet")
        for src, tgt in dl_alignment(t.correct, t.misspelled).pairs:
            row = counts.setdefault(src, {})
            row[tgt] = row.get(tgt, 0.0) + t.frequency

    symbols = sorted(alpha_set)
    edit_prob: dict[str, dict[str, float]] = {}
    for src in symbols + [EPSILON]:
        targets = symbols + [EPSILON] if src != EPSILON else symbols
        row_counts = counts.get(src, {})
        total = sum(row_counts.values()) + smoothing_k * len(targets)
        edit_prob[src] = {
            tgt: (row_counts.get(tgt, 0.0) + smoothing_k) / total for tgt in targets
        }
        if src == EPSILON:
            edit_prob[src][EPSILON] = 0.0

    char_error_freq: dict[str, float] = {}
    char_sourced_mass = 0.0
    for src in symbols:
        row_counts = counts.get(src, {})
        total = sum(row_counts.values())
        char_sourced_mass += total
        errors = total - row_counts.get(src, 0.0)
        char_error_freq[src] = errors / total if total > 0 else 0.0
    insertion_mass = sum(counts.get(EPSILON, {}).values())
    char_error_freq[EPSILON] = (
        insertion_mass / char_sourced_mass if char_sourced_mass > 0 else 0.0
    )

    return ConfusionModel(
        edit_prob=edit_prob,
        char_error_freq=char_error_freq,
        alphabet=alpha_set,
        smoothing_k=smoothing_k,
    )


def bm_likelihood(observed: str, candidate: str, model: ConfusionModel) -> float:
    """Best log-likelihood of `observed` given intended `candidate`.

    Max-product dynamic program over single-character alignments: cell
    moves consume (candidate char, observed char) for match/substitution,
    (candidate char, ε) for deletion, (ε, observed char) for insertion.
    """
    n, m = len(candidate), len(observed)
    prev = [0.0] * (m + 1)
    for j in range(1, m + 1):
        prev[j] = prev[j - 1] + model.logp(EPSILON, observed[j - 1])
    for i in range(1, n + 1):
        src = candidate[i - 1]
        del_lp = model.logp(src, EPSILON)
        cur = [prev[0] + del_lp] + [0.0] * m
        for j in range(1, m + 1):
            tgt = observed[j - 1]
            cur[j] = max(
                prev[j - 1] + model.logp(src, tgt),
                prev[j] + del_lp,
                cur[j - 1] + model.logp(EPSILON, tgt),
            )
        prev = cur
    return prev[m]


def cd_likelihood(
    observed: str,
    candidate: str,
    cand_set: Collection[str],
    params: CDParams = CDParams(),
) -> float:
    """Constant-distributive channel: α on the observed word, the rest
    spread uniformly over the other candidates, -inf outside the set."""
    if candidate == observed:
        return math.log(params.alpha)
    words = set(cand_set)
    words.add(observed)
    if candidate not in words or len(words) < 2:
        return float("-inf")
    return math.log((1.0 - params.alpha) / (len(words) - 1))


def sentence_likelihood(
    observed: list[str],
    candidate: list[str],
    scorer: Callable[[str, str], float],
) -> float:
    """Sum of per-word channel log-likelihoods (token counts must match)."""
    if len(observed) != len(candidate):
        raise ValueError(
            f"token count mismatch: {len(observed)} observed vs {len(candidate)} candidate"
        )
    return sum(scorer(o, c) for o, c in zip(observed, candidate))


def export_heatmap(model: ConfusionModel, chars: Iterable[str]) -> str:
    """CSV matrix of edit probabilities: one row per requested source
    character, columns spanning the full alphabet plus ε."""
    targets = sorted(model.alphabet) + [EPSILON]
    requested = list(chars)
    for ch in requested:
        if ch != EPSILON and ch not in model.alphabet:
            raise ValueError(f"character {ch!r} not in the model alphabet")
    lines = ["source," + ",".join(t if t != EPSILON else EPSILON_LABEL for t in targets)]
    for src in requested:
        row = model.edit_prob.get(src, {})
        label = src if src != EPSILON else EPSILON_LABEL
        cells = ",".join(repr(row.get(t, 0.0)) for t in targets)
        lines.append(f"{label},{cells}")
    return "\n".join(lines) + "\n"


def save_triples(triples: Iterable[Triple], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t in triples:
            fh.write(f"{t.correct}\t{t.misspelled}\t{t.frequency}\n")


def load_triples(path) -> list[Triple]:
    triples = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: malformed triple row {line!r}")
            triples.append(Triple(parts[0], parts[1], int(parts[2])))
    return triples
