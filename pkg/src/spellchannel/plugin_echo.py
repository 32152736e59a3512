"""Minimal LM backend for protocol testing: uniform scores over candidates.

Speaks the newline-delimited JSON protocol on stdin/stdout. Every
candidate gets log(1/len(candidates)); malformed requests produce an
error response with the same id and never kill the stream.

Run with: python -m spellchannel.plugin_echo
"""

from __future__ import annotations

import json
import math
import sys


def handle_line(line: str) -> dict:
    qid = None
    try:
        request = json.loads(line)
        qid = request.get("id")
        candidates = request.get("candidates")
        if not isinstance(candidates, list) or not candidates:
            raise ValueError("candidates must be a non-empty list")
        lp = -math.log(len(candidates))
        return {"id": qid, "logprobs": [lp] * len(candidates), "v": 1}
    except Exception as exc:
        return {"id": qid, "error": str(exc), "v": 1}


def main() -> int:
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        response = handle_line(line)
        sys.stdout.write(json.dumps(response, ensure_ascii=False) + "\n")
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
