"""Synthetic 50-paper toy corpus in the pipeline's exchange formats.

Contexts mention only the dataset words of the paper's gold triples, so
the lexical-overlap baseline cannot clear its threshold on real triples
(one of three hypothesis words) and falls back to Unknown everywhere,
while a trained pair classifier can pick the cross-segment token match
up. One fifth of the papers carry no triple at all.
"""

from __future__ import annotations

import json
import random
from pathlib import Path


def write_toy_corpus(
    out_dir: str | Path, papers: int = 50, labels: int = 12, seed: int = 0
) -> dict[str, Path]:
    """Write papers.jsonl, evaluations.jsonl and features.jsonl; returns paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    triples = [
        {"task": f"area{i}", "dataset": f"corpus{i}", "metric": f"measure{i}"}
        for i in range(labels)
    ]
    paper_rows, evaluation_rows, feature_rows = [], [], []
    for j in range(papers):
        paper_id = f"toy{j:03d}"
        labeled = j % 5 != 0  # every fifth paper has no triples
        if labeled:
            gold = rng.sample(triples, 3)
            mentioned = " ".join(t["dataset"] for t in gold)
            text = f"results reported on {mentioned} using split s{rng.randint(0, 9)}"
            evaluation_rows.extend({"paper_id": paper_id, **t} for t in gold)
        else:
            text = f"a general discussion piece number u{j} citing no benchmark at all"
        paper_rows.append(
            {
                "paper_id": paper_id,
                "title": f"Toy Paper {j}",
                "abstract": text,
                "url": f"https://example.org/toy/{j}",
            }
        )
        feature_rows.append(
            {
                "paper_id": paper_id,
                "token_count": len(text.split()),
                "text": text,
                "spans": {},
            }
        )

    paths = {
        "papers": out_dir / "papers.jsonl",
        "evaluations": out_dir / "evaluations.jsonl",
        "features": out_dir / "features.jsonl",
    }
    for key, rows in (
        ("papers", paper_rows),
        ("evaluations", evaluation_rows),
        ("features", feature_rows),
    ):
        with open(paths[key], "w", encoding="utf-8") as handle:
            for row in rows:
                handle.write(json.dumps(row, ensure_ascii=False) + "\n")
    return paths
