"""Protocol endpoint: newline-delimited JSON over stdio or TCP.

Requests carry an id, a left and right word context, and a candidate
list; responses echo the id and return one log-probability per
candidate. Malformed input yields an error response with the same id and
never tears down the stream. The right context is ignored: this backend
is purely autoregressive.
"""

from __future__ import annotations

import json
import socketserver
import sys
from typing import IO

from lmserver.model import ToyTransformerLM, Vocab, load_checkpoint

PROTOCOL_VERSION = 1


class LMBackend:
    """A loaded model plus its vocabulary, ready to score candidates.

    Weights are immutable during serving (eval mode, no gradients), so one
    backend can safely serve several connections at once.
    """

    def __init__(self, model: ToyTransformerLM, vocab: Vocab):
        self.model = model.eval()
        self.vocab = vocab

    @classmethod
    def from_checkpoint(cls, path) -> "LMBackend":
        model, vocab, _ = load_checkpoint(path)
        return cls(model, vocab)

    def candidate_logprobs(self, left: list[str], candidates: list[str]) -> list[float]:
        dist = self.model.next_logprobs(self.vocab, left)
        return [float(dist[self.vocab.id_of(c)]) for c in candidates]


def handle_line(backend: LMBackend, line: str) -> dict:
    qid = None
    try:
        request = json.loads(line)
        qid = request.get("id")
        candidates = request.get("candidates")
        if (
            not isinstance(candidates, list)
            or not candidates
            or not all(isinstance(c, str) for c in candidates)
        ):
            raise ValueError("candidates must be a non-empty list of strings")
        left = request.get("left", [])
        if not isinstance(left, list) or not all(isinstance(t, str) for t in left):
            raise ValueError("left context must be a list of strings")
        logprobs = backend.candidate_logprobs(left, candidates)
        return {"id": qid, "logprobs": logprobs, "v": PROTOCOL_VERSION}
    except Exception as exc:
        return {"id": qid, "error": str(exc), "v": PROTOCOL_VERSION}


def serve_stdio(backend: LMBackend, stdin: IO[str] = None, stdout: IO[str] = None) -> None:
    """Answer requests line by line until the input stream closes."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        stdout.write(json.dumps(handle_line(backend, line), ensure_ascii=False) + "\n")
        stdout.flush()


def serve_tcp(backend: LMBackend, host: str, port: int) -> socketserver.ThreadingTCPServer:
    """Build a threaded TCP server; the caller runs serve_forever().

    Each connection is its own request stream with one request in flight
    at a time; port 0 binds an ephemeral port (see server_address).
    """

    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            for raw in self.rfile:
                line = raw.decode("utf-8").strip()
                if not line:
                    continue
                response = json.dumps(handle_line(backend, line), ensure_ascii=False)
                self.wfile.write((response + "\n").encode("utf-8"))
                self.wfile.flush()

    server = socketserver.ThreadingTCPServer((host, port), Handler)
    server.daemon_threads = True
    return server
