"""Corpus ingestion: frequency tables, cutoff vocabularies, descriptive stats."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator, Union

from spellchannel.textcore import ScriptProfile, tokenize

__all__ = [
    "FrequencyTable",
    "Vocabulary",
    "CorpusStats",
    "SummaryStats",
    "CorpusDecodeError",
    "ingest",
    "build_vocab",
    "stats",
    "split_sentences",
]

TextSource = Union[str, Path, IO, Iterable[str]]

# Sentence delimiters: Devanagari danda plus the usual terminators.
_SENTENCE_SPLIT = re.compile(r"[।.!?]+")


class CorpusDecodeError(ValueError):
    """Raised when a corpus byte stream is not valid UTF-8."""

    def __init__(self, byte_offset: int, reason: str):
        super().__init__(f"invalid UTF-8 at byte offset {byte_offset}: {reason}")
        self.byte_offset = byte_offset


def _iter_lines(source: TextSource) -> Iterator[str]:
    """Yield decoded lines from a path, an open file, or an iterable of strings.

    Byte inputs are decoded line by line (UTF-8 sequences never straddle a
    newline byte), so memory stays bounded by line length and decode errors
    can report an absolute byte offset.
    """
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            yield from _iter_lines(fh)
        return
    offset = 0
    for line in source:
        if isinstance(line, bytes):
            try:
                yield line.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise CorpusDecodeError(offset + exc.start, exc.reason) from None
            offset += len(line)
        else:
            yield line


@dataclass
class FrequencyTable:
    """word -> count map with the corresponding token total.

    Invariant: total_tokens == sum(counts.values()) and no zero counts.
    """

    counts: dict[str, int] = field(default_factory=dict)
    total_tokens: int = 0

    def add(self, word: str, count: int = 1) -> None:
        if count <= 0:
            raise ValueError("count must be positive")
        self.counts[word] = self.counts.get(word, 0) + count
        self.total_tokens += count

    def merge(self, other: "FrequencyTable") -> "FrequencyTable":
        """Combine two tables (sharded ingestion support); returns a new table."""
        merged = Counter(self.counts)
        merged.update(other.counts)
        return FrequencyTable(dict(merged), self.total_tokens + other.total_tokens)

    def __len__(self) -> int:
        return len(self.counts)

    def items_by_count(self) -> list[tuple[str, int]]:
        """(word, count) pairs sorted by descending count, then word."""
        return sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))

    def save_tsv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for word, count in self.items_by_count():
                fh.write(f"{word}\t{count}\n")

    @classmethod
    def load_tsv(cls, path) -> "FrequencyTable":
        table = cls()
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                try:
                    word, count = line.split("\t")
                    table.add(word, int(count))
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: malformed TSV row {line!r}") from None
        return table


@dataclass(frozen=True)
class Vocabulary:
    """Real-word list: cutoff-filtered words with their corpus counts."""

    counts: dict[str, int]

    def __contains__(self, word: str) -> bool:
        return word in self.counts

    def __len__(self) -> int:
        return len(self.counts)

    def words(self) -> list[str]:
        return sorted(self.counts)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for word in sorted(self.counts, key=lambda w: (-self.counts[w], w)):
                fh.write(f"{word}\t{self.counts[word]}\n")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        """Load from TSV (word<TAB>count) or a plain one-word-per-line list."""
        counts: dict[str, int] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if "\t" in line:
                    word, count = line.split("\t")
                    counts[word] = int(count)
                else:
                    counts[line] = counts.get(line, 0) + 1
        return cls(counts)


def ingest(source: TextSource, profile: ScriptProfile | None = None) -> FrequencyTable:
    """Build a FrequencyTable from a text source, streaming line by line."""
    counts: Counter[str] = Counter()
    total = 0
    for line in _iter_lines(source):
        toks = tokenize(line, profile)
        counts.update(toks)
        total += len(toks)
    return FrequencyTable(dict(counts), total)


def build_vocab(table: FrequencyTable, cutoff: int) -> Vocabulary:
    """Words whose corpus count is at least `cutoff`."""
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    return Vocabulary({w: c for w, c in table.counts.items() if c >= cutoff})


def split_sentences(text: str) -> list[str]:
    """Split on danda / . / ! / ?; returns non-empty segments."""
    return [seg for seg in _SENTENCE_SPLIT.split(text) if seg.strip()]


def _quartiles_type7(values: list[float]) -> tuple[float, float, float]:
    # linear-interpolation quartiles (R type 7 / numpy default)
    vals = sorted(values)
    n = len(vals)
    if n == 0:
        raise ValueError("no data")
    if n == 1:
        return (float(vals[0]),) * 3

    def q(p: float) -> float:
        h = (n - 1) * p
        lo = int(h)
        frac = h - lo
        if lo + 1 < n:
            return vals[lo] + frac * (vals[lo + 1] - vals[lo])
        return float(vals[lo])

    return q(0.25), q(0.5), q(0.75)


@dataclass(frozen=True)
class SummaryStats:
    q1: float
    q2: float
    q3: float
    mean: float
    max: float

    @classmethod
    def from_values(cls, values: list[int]) -> "SummaryStats":
        if not values:
            return cls(0.0, 0.0, 0.0, 0.0, 0.0)
        q1, q2, q3 = _quartiles_type7([float(v) for v in values])
        return cls(q1, q2, q3, sum(values) / len(values), float(max(values)))

    def as_row(self) -> list[float]:
        return [self.q1, self.q2, self.q3, self.mean, self.max]


@dataclass(frozen=True)
class CorpusStats:
    words_per_paragraph: SummaryStats
    sentences_per_paragraph: SummaryStats
    vocab_size_by_cutoff: tuple[tuple[int, int], ...]

    def to_json_dict(self) -> dict:
        return {
            "words_per_paragraph": vars(self.words_per_paragraph),
            "sentences_per_paragraph": vars(self.sentences_per_paragraph),
            "vocab_size_by_cutoff": [list(pair) for pair in self.vocab_size_by_cutoff],
        }

    def to_csv(self, label: str = "corpus") -> str:
        """Rows shaped like the words/sentences-per-paragraph summary tables,
        followed by (cutoff, vocab size) curve rows."""
        lines = ["dataset,measure,q1,q2,q3,mean,max"]
        for measure, summary in (
            ("words_per_paragraph", self.words_per_paragraph),
            ("sentences_per_paragraph", self.sentences_per_paragraph),
        ):
            row = ",".join(repr(v) for v in summary.as_row())
            lines.append(f"{label},{measure},{row}")
        lines.append("dataset,cutoff,vocab_size")
        for cutoff, size in self.vocab_size_by_cutoff:
            lines.append(f"{label},{cutoff},{size}")
        return "\n".join(lines) + "\n"


def stats(
    source: TextSource,
    profile: ScriptProfile | None = None,
    cutoffs: Iterable[int] = (1, 2, 5, 10, 20, 50, 100),
) -> CorpusStats:
    """Per-paragraph summaries plus the vocabulary-size-vs-cutoff curve.

    Paragraphs are blank-line delimited; sentence boundaries are danda/.!?.
    """
    words_per_para: list[int] = []
    sents_per_para: list[int] = []
    counts: Counter[str] = Counter()
    para_lines: list[str] = []

    def flush() -> None:
        if not para_lines:
            return
        text = " ".join(para_lines)
        toks = tokenize(text, profile)
        counts.update(toks)
        words_per_para.append(len(toks))
        sents_per_para.append(
            sum(1 for seg in split_sentences(text) if tokenize(seg, profile))
        )
        para_lines.clear()

    for line in _iter_lines(source):
        if line.strip():
            para_lines.append(line.strip())
        else:
            flush()
    flush()

    curve = tuple(
        (cutoff, sum(1 for c in counts.values() if c >= cutoff))
        for cutoff in sorted(set(int(c) for c in cutoffs))
    )
    return CorpusStats(
        words_per_paragraph=SummaryStats.from_values(words_per_para),
        sentences_per_paragraph=SummaryStats.from_values(sents_per_para),
        vocab_size_by_cutoff=curve,
    )
