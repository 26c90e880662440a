#!/usr/bin/env python3
"""Regenerate the recorded remote-service fixtures under tests/fixtures/.

Covers the scorer wire protocol (canonical request/response pair plus the
hash-keyed replay entries for a batch and its singletons) and one recorded
PDF-parser exchange. Run from the repository root after changing the wire
format; the files are committed.
"""

from __future__ import annotations

import json
from pathlib import Path

from tdm_miner.replay import ReplayCache, request_key
from tdm_miner.scorer import RemoteScorer, ScoreRequest

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"

SINGLE_PAIR = ScoreRequest(
    context="we evaluate extractive question answering on the squad benchmark with f1",
    hypothesis="Question Answering : SQuAD : F1",
)
SINGLE_PROBS = [0.97]

BATCH = [
    SINGLE_PAIR,
    ScoreRequest(
        context="we evaluate extractive question answering on the squad benchmark with f1",
        hypothesis="Image Classification : CIFAR-10 : Accuracy",
    ),
    ScoreRequest(
        context="we evaluate extractive question answering on the squad benchmark with f1",
        hypothesis="Machine Translation : WMT14 English-German : BLEU",
    ),
]
BATCH_PROBS = [0.97, 0.08, 0.03]


def main() -> None:
    wire = FIXTURES / "wire"
    wire.mkdir(parents=True, exist_ok=True)
    request_bytes = RemoteScorer.encode_request([SINGLE_PAIR])
    (wire / "score_request.json").write_bytes(request_bytes + b"\n")
    (wire / "score_response.json").write_text(
        json.dumps({"probabilities": SINGLE_PROBS}) + "\n", encoding="utf-8"
    )

    replay = ReplayCache(FIXTURES / "score_replay", suffix="json")
    replay.put(request_bytes, json.dumps({"probabilities": SINGLE_PROBS}).encode("utf-8"))
    replay.put(
        RemoteScorer.encode_request(BATCH),
        json.dumps({"probabilities": BATCH_PROBS}).encode("utf-8"),
    )
    for req, prob in zip(BATCH, BATCH_PROBS):
        replay.put(
            RemoteScorer.encode_request([req]),
            json.dumps({"probabilities": [prob]}).encode("utf-8"),
        )

    pdf = FIXTURES / "pdf_replay" / "two-page.pdf"
    pdf.parent.mkdir(parents=True, exist_ok=True)
    pdf.write_bytes(b"%PDF-1.4 fixture stand-in for a two-page paper\n%%EOF\n")
    tei = (FIXTURES / "tei" / "qa-squad.tei.xml").read_bytes()
    pdf_cache = ReplayCache(FIXTURES / "pdf_replay", suffix="tei.xml")
    pdf_cache.put(pdf.read_bytes(), tei)
    print("wire fixtures written; single-pair request key:", request_key(request_bytes))


if __name__ == "__main__":
    main()
