#!/usr/bin/env python3
"""Freeze the end-to-end pipeline outputs over the fixture papers.

Runs ingest (from the recorded TEI conversions) -> build-corpus ->
predict (baseline scorer) -> evaluate (both settings) -> export, then
copies the byte-for-byte reference outputs into tests/fixtures/golden/.
Rerun only when the pipeline's output format intentionally changes, and
review the diff before committing.
"""

from __future__ import annotations

import shutil
import sys
import tempfile
from pathlib import Path

from tdm_miner.cli import main

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"
GOLDEN = FIXTURES / "golden"

SEED = "7"
NUM_FALSE = "2"


def run(*argv: str) -> None:
    code = main(list(argv))
    if code != 0:
        sys.exit(f"step failed ({code}): {' '.join(argv)}")


def main_() -> None:
    GOLDEN.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        work = Path(tmp)
        run("ingest", "--source", "tei", "--input", str(FIXTURES / "tei"),
            "--out", str(work / "ingest"))
        run("build-corpus",
            "--papers", str(FIXTURES / "dump" / "papers.jsonl"),
            "--evaluations", str(FIXTURES / "dump" / "evaluations.jsonl"),
            "--features", str(work / "ingest" / "features.jsonl"),
            "--out", str(work / "corpus"), "--num-false", NUM_FALSE, "--seed", SEED)
        run("predict", "--features", str(work / "ingest" / "features.jsonl"),
            "--vocab", str(work / "corpus" / "vocab.jsonl"),
            "--out", str(work / "pred"), "--scorer", "baseline")
        run("evaluate", "--predictions", str(work / "pred" / "predictions.jsonl"),
            "--gold", str(work / "corpus" / "gold.jsonl"),
            "--out", str(work / "eval_with"), "--setting", "with-unknown")
        run("evaluate", "--predictions", str(work / "pred" / "predictions.jsonl"),
            "--gold", str(work / "corpus" / "gold.jsonl"),
            "--out", str(work / "eval_without"), "--setting", "without-unknown")
        run("export", "--predictions", str(work / "pred" / "predictions.jsonl"),
            "--gold", str(work / "corpus" / "gold.jsonl"),
            "--out", str(work / "kg"), "--format", "ntriples")
        run("export", "--predictions", str(work / "pred" / "predictions.jsonl"),
            "--gold", str(work / "corpus" / "gold.jsonl"),
            "--out", str(work / "kg_json"), "--format", "jsonlines")

        frozen = {
            "features.jsonl": work / "ingest" / "features.jsonl",
            "docs.jsonl": work / "ingest" / "docs.jsonl",
            "gold.jsonl": work / "corpus" / "gold.jsonl",
            "vocab.jsonl": work / "corpus" / "vocab.jsonl",
            "instances.jsonl": work / "corpus" / "instances.jsonl",
            "folds.json": work / "corpus" / "folds.json",
            "predictions.jsonl": work / "pred" / "predictions.jsonl",
            "report_with_unknown.json": work / "eval_with" / "report.json",
            "report_with_unknown.txt": work / "eval_with" / "report.txt",
            "report_without_unknown.json": work / "eval_without" / "report.json",
            "report_without_unknown.txt": work / "eval_without" / "report.txt",
            "triples.nt": work / "kg" / "triples.nt",
            "records.jsonl": work / "kg_json" / "records.jsonl",
        }
        for name, src in frozen.items():
            shutil.copyfile(src, GOLDEN / name)
            print(f"froze {name} ({src.stat().st_size} bytes)")


if __name__ == "__main__":
    main_()
