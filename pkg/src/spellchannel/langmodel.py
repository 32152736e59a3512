"""Word priors: an interpolated Kneser-Ney bigram model, a uniform
fallback, and a newline-delimited-JSON client for external LM backends."""

from __future__ import annotations

import json
import math
import socket
import subprocess
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

from spellchannel.corpus import TextSource, _iter_lines, split_sentences
from spellchannel.textcore import ScriptProfile, tokenize

__all__ = [
    "START",
    "END",
    "UNK",
    "KNBigramModel",
    "UniformPrior",
    "LMQuery",
    "PluginClient",
    "PluginError",
    "train_kn",
    "kn_logprob",
    "sentence_logprob",
    "plugin_score",
    "check_protocol",
    "PROTOCOL_VERSION",
]

START = "<s>"
END = "</s>"
UNK = "<unk>"

PROTOCOL_VERSION = 1

# Safety floor only; interpolated KN with the phantom continuation count
# already keeps every in-vocab probability positive.
_LM_LOG_FLOOR = -60.0


@dataclass(frozen=True)
class LMQuery:
    """One scoring request: candidates to score between two contexts."""

    left_context: tuple[str, ...]
    right_context: tuple[str, ...]
    candidates: tuple[str, ...]

    def __post_init__(self):
        if not self.candidates:
            raise ValueError("candidates must be non-empty")


class PluginError(RuntimeError):
    """Transport or contract failure talking to an external LM backend."""


@dataclass
class KNBigramModel:
    """Bigram counts with absolute discounting and continuation backoff.

    P(w|v) = max(c(v,w) - d, 0)/c(v) + (d * |followers(v)| / c(v)) * Pcont(w)
    where Pcont(w) = |distinct left neighbors of w| / |bigram types| and
    c(v) = sum_w c(v,w). Unseen contexts fall back to Pcont alone.
    """

    unigram_counts: dict[str, int]
    bigram_counts: dict[str, dict[str, int]]
    discount_d: float
    vocab: frozenset[str]
    continuation_counts: dict[str, int] = field(default_factory=dict)
    follower_counts: dict[str, int] = field(default_factory=dict)
    bigram_type_total: int = 0
    context_totals: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 < self.discount_d < 1.0:
            raise ValueError("discount_d must lie strictly between 0 and 1")
        if not self.continuation_counts:
            self._derive_type_counts()

    def _derive_type_counts(self) -> None:
        continuation: dict[str, int] = {}
        followers: dict[str, int] = {}
        totals: dict[str, int] = {}
        types = 0
        for v, row in self.bigram_counts.items():
            followers[v] = len(row)
            totals[v] = sum(row.values())
            types += len(row)
            for w in row:
                continuation[w] = continuation.get(w, 0) + 1
        # A never-seen <unk> still needs a positive continuation share;
        # growing the type total keeps sum(Pcont) = 1.
        if continuation.get(UNK, 0) == 0:
            continuation[UNK] = 1
            types += 1
        self.continuation_counts = continuation
        self.follower_counts = followers
        self.bigram_type_total = types
        self.context_totals = totals

    def map_word(self, word: str) -> str:
        return word if word in self.vocab else UNK

    def continuation_prob(self, word: str) -> float:
        return self.continuation_counts.get(word, 0) / self.bigram_type_total

    def logprob(self, word: str, prev: str) -> float:
        w = self.map_word(word)
        v = self.map_word(prev)
        p_cont = self.continuation_prob(w)
        total = self.context_totals.get(v, 0)
        if total == 0:
            p = p_cont
        else:
            c_vw = self.bigram_counts.get(v, {}).get(w, 0)
            lam = self.discount_d * self.follower_counts[v] / total
            p = max(c_vw - self.discount_d, 0.0) / total + lam * p_cont
        if p <= 0.0:
            return _LM_LOG_FLOOR
        return max(math.log(p), _LM_LOG_FLOOR)

    def score_candidates(
        self,
        left: Sequence[str],
        right: Sequence[str],
        candidates: Sequence[str],
    ) -> list[float]:
        # bigram backend: only the nearest left word matters
        prev = left[-1] if left else START
        return [self.logprob(w, prev) for w in candidates]

    def to_json_dict(self) -> dict:
        return {
            "discount_d": self.discount_d,
            "vocab": sorted(self.vocab),
            "unigram_counts": dict(sorted(self.unigram_counts.items())),
            "bigram_counts": {
                v: dict(sorted(row.items()))
                for v, row in sorted(self.bigram_counts.items())
            },
        }

    def to_json_text(self) -> str:
        payload = {"schema_version": 1, "kind": "kn_bigram"}
        payload.update(self.to_json_dict())
        return json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=1) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json_text())

    @classmethod
    def load(cls, path) -> "KNBigramModel":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if data.get("kind") != "kn_bigram" or data.get("schema_version") != 1:
            raise ValueError(f"{path}: not a schema-version-1 bigram model file")
        return cls(
            unigram_counts={w: int(c) for w, c in data["unigram_counts"].items()},
            bigram_counts={
                v: {w: int(c) for w, c in row.items()}
                for v, row in data["bigram_counts"].items()
            },
            discount_d=float(data["discount_d"]),
            vocab=frozenset(data["vocab"]),
        )

    def content_hash(self) -> str:
        import hashlib

        blob = json.dumps(
            self.to_json_dict(), ensure_ascii=False, sort_keys=True, separators=(",", ":")
        )
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class UniformPrior:
    """Constant prior: every candidate scores -log(vocab_size)."""

    vocab_size: int = 1

    def logprob(self, word: str, prev: str) -> float:
        return -math.log(max(self.vocab_size, 1))

    def score_candidates(
        self,
        left: Sequence[str],
        right: Sequence[str],
        candidates: Sequence[str],
    ) -> list[float]:
        return [self.logprob(w, "") for w in candidates]


def train_kn(
    source: TextSource,
    discount_d: float = 0.75,
    vocab_cutoff: int = 1,
    profile: ScriptProfile | None = None,
) -> KNBigramModel:
    """Train the bigram model from raw text.

    Each input line is segmented into sentences, words below the cutoff
    become the unknown sentinel, and every sentence is wrapped in
    start/end sentinels.
    """
    if not 0.0 < discount_d < 1.0:
        raise ValueError("discount_d must lie strictly between 0 and 1")
    if vocab_cutoff < 1:
        raise ValueError("vocab_cutoff must be >= 1")

    sentences: list[list[str]] = []
    word_counts: dict[str, int] = {}
    for line in _iter_lines(source):
        for seg in split_sentences(line):
            toks = tokenize(seg, profile)
            if not toks:
                continue
            sentences.append(toks)
            for t in toks:
                word_counts[t] = word_counts.get(t, 0) + 1
    if not sentences:
        raise ValueError("corpus contains no sentences")

    vocab = {w for w, c in word_counts.items() if c >= vocab_cutoff}
    vocab.update((START, END, UNK))

    unigrams: dict[str, int] = {}
    bigrams: dict[str, dict[str, int]] = {}
    for toks in sentences:
        mapped = [START] + [t if t in vocab else UNK for t in toks] + [END]
        for w in mapped:
            unigrams[w] = unigrams.get(w, 0) + 1
        for v, w in zip(mapped, mapped[1:]):
            row = bigrams.setdefault(v, {})
            row[w] = row.get(w, 0) + 1

    return KNBigramModel(
        unigram_counts=unigrams,
        bigram_counts=bigrams,
        discount_d=discount_d,
        vocab=frozenset(vocab),
    )


def kn_logprob(model: KNBigramModel, word: str, prev: str) -> float:
    return model.logprob(word, prev)


def sentence_logprob(backend, words: Sequence[str]) -> float:
    """Sum of per-position log-probabilities under the backend.

    The bigram backend conditions each word on its predecessor (start
    sentinel first); plugin backends receive the full left/right contexts.
    """
    if not words:
        raise ValueError("words must be non-empty")
    total = 0.0
    for i, w in enumerate(words):
        scores = backend.score_candidates(list(words[:i]), list(words[i + 1 :]), [w])
        total += scores[0]
    return total


class PluginClient:
    """Newline-delimited JSON client for external LM backends.

    One request in flight at a time; responses must come back in request
    order with matching ids.
    """

    def __init__(self, reader: IO[str], writer: IO[str], closer=None):
        self._reader = reader
        self._writer = writer
        self._closer = closer
        self._next_id = 0

    @classmethod
    def spawn(cls, argv: Sequence[str]) -> "PluginClient":
        proc = subprocess.Popen(
            list(argv),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            encoding="utf-8",
            bufsize=1,
        )

        def closer():
            if proc.stdin:
                proc.stdin.close()
            proc.wait(timeout=10)
            if proc.stdout:
                proc.stdout.close()

        return cls(proc.stdout, proc.stdin, closer)

    @classmethod
    def connect(cls, host: str, port: int, timeout: float = 30.0) -> "PluginClient":
        sock = socket.create_connection((host, port), timeout=timeout)
        reader = sock.makefile("r", encoding="utf-8", newline="\n")
        writer = sock.makefile("w", encoding="utf-8", newline="\n")

        def closer():
            reader.close()
            writer.close()
            sock.close()

        return cls(reader, writer, closer)

    @classmethod
    def open_endpoint(cls, endpoint: str) -> "PluginClient":
        """host:port connects over TCP; anything else is a command line."""
        host, sep, port = endpoint.rpartition(":")
        if sep and host and port.isdigit() and "/" not in host and " " not in host:
            return cls.connect(host, int(port))
        import shlex

        return cls.spawn(shlex.split(endpoint))

    def score(self, query: LMQuery) -> list[float]:
        qid = self._next_id
        self._next_id += 1
        request = {
            "id": qid,
            "left": list(query.left_context),
            "right": list(query.right_context),
            "candidates": list(query.candidates),
            "v": PROTOCOL_VERSION,
        }
        try:
            self._writer.write(json.dumps(request, ensure_ascii=False) + "\n")
            self._writer.flush()
            line = self._reader.readline()
        except (OSError, ValueError) as exc:
            raise PluginError(f"plugin transport failure: {exc}") from exc
        if not line:
            raise PluginError("plugin closed the stream")
        try:
            response = json.loads(line)
        except json.JSONDecodeError as exc:
            raise PluginError(f"plugin sent invalid JSON: {exc}") from exc
        if response.get("error"):
            raise PluginError(f"plugin error: {response['error']}")
        if response.get("id") != qid:
            raise PluginError(
                f"plugin response id {response.get('id')!r} does not match request {qid}"
            )
        logprobs = response.get("logprobs")
        if not isinstance(logprobs, list) or len(logprobs) != len(query.candidates):
            raise PluginError("plugin logprobs length does not match candidates")
        values = []
        for lp in logprobs:
            if not isinstance(lp, (int, float)) or not math.isfinite(lp) or lp > 0:
                raise PluginError(f"plugin returned invalid log-probability {lp!r}")
            values.append(float(lp))
        return values

    def score_candidates(
        self,
        left: Sequence[str],
        right: Sequence[str],
        candidates: Sequence[str],
    ) -> list[float]:
        return self.score(LMQuery(tuple(left), tuple(right), tuple(candidates)))

    def close(self) -> None:
        if self._closer:
            self._closer()
            self._closer = None

    def __enter__(self) -> "PluginClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def plugin_score(endpoint, query: LMQuery) -> list[float]:
    """Score one query against an endpoint (client instance or endpoint string)."""
    if isinstance(endpoint, PluginClient):
        return endpoint.score(query)
    with PluginClient.open_endpoint(endpoint) as client:
        return client.score(query)


def check_protocol(client: PluginClient, extra_probes: Iterable[LMQuery] = ()) -> list[dict]:
    """Probe a backend for wire-contract conformance.

    Returns one record per check: {"name", "passed", "detail"}. Used by the
    self-check command and by backend test suites.
    """
    results: list[dict] = []

    def record(name: str, fn) -> None:
        try:
            detail = fn()
            results.append({"name": name, "passed": True, "detail": detail or "ok"})
        except Exception as exc:
            results.append({"name": name, "passed": False, "detail": str(exc)})

    probes = [
        LMQuery(("the",), (), ("cat", "dog", "house")),
        LMQuery((), ("after",), ("single",)),
        LMQuery(("a", "b", "c"), ("d", "e"), ("x", "y", "z", "w")),
    ] + list(extra_probes)

    for i, probe in enumerate(probes):
        def run(probe=probe):
            values = client.score(probe)
            if len(values) != len(probe.candidates):
                raise PluginError("length mismatch")
            for lp in values:
                if not math.isfinite(lp) or lp > 0:
                    raise PluginError(f"invalid logprob {lp}")
            return f"{len(values)} finite logprobs <= 0"

        record(f"probe_{i}_lengths_and_range", run)

    def run_order():
        # back-to-back requests must keep id/order discipline
        first = client.score(LMQuery((), (), ("one", "two")))
        second = client.score(LMQuery((), (), ("three",)))
        if len(first) != 2 or len(second) != 1:
            raise PluginError("ordering probe length mismatch")
        return "sequential ids answered in order"

    record("sequential_requests", run_order)
    return results
