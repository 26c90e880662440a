"""Shared toy workspace: corpus files, pipeline outputs, one trained artifact.

The pipeline package is exercised strictly through its command line and
file formats; nothing from it is imported here.
"""

from __future__ import annotations

import json
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path

import pytest

from model_service.toy import write_toy_corpus
from model_service.train import TrainConfig, train

REPO_ROOT = Path(__file__).resolve().parents[2]
WIRE_FIXTURES = REPO_ROOT / "tests" / "fixtures" / "wire"

NUM_FALSE = "10"
SEED = "11"


def run_pipeline(*argv: str) -> None:
    proc = subprocess.run(
        [sys.executable, "-m", "tdm_miner.cli", *argv], capture_output=True, text=True
    )
    assert proc.returncode == 0, f"pipeline {argv} failed:\n{proc.stdout}\n{proc.stderr}"


@dataclass
class ToyWorkspace:
    root: Path
    papers: Path
    evaluations: Path
    features: Path
    built: Path
    train_instances: Path
    test_features: Path
    test_ids: set[str]


@pytest.fixture(scope="session")
def toy_workspace(tmp_path_factory) -> ToyWorkspace:
    root = tmp_path_factory.mktemp("toy")
    paths = write_toy_corpus(root / "src", papers=50, seed=0)
    built = root / "built"
    run_pipeline(
        "build-corpus",
        "--papers", str(paths["papers"]),
        "--evaluations", str(paths["evaluations"]),
        "--features", str(paths["features"]),
        "--out", str(built),
        "--num-false", NUM_FALSE, "--seed", SEED,
    )
    folds = json.loads((built / "folds.json").read_text())
    train_ids = {pid for pid, fold in folds.items() if fold == 1}
    test_ids = {pid for pid, fold in folds.items() if fold == 0}

    train_instances = root / "train_instances.jsonl"
    with open(built / "instances.jsonl") as src, open(train_instances, "w") as dst:
        for line in src:
            if json.loads(line)["paper_id"] in train_ids:
                dst.write(line)
    test_features = root / "test_features.jsonl"
    with open(paths["features"]) as src, open(test_features, "w") as dst:
        for line in src:
            if json.loads(line)["paper_id"] in test_ids:
                dst.write(line)
    return ToyWorkspace(
        root=root,
        papers=paths["papers"],
        evaluations=paths["evaluations"],
        features=paths["features"],
        built=built,
        train_instances=train_instances,
        test_features=test_features,
        test_ids=test_ids,
    )


@pytest.fixture(scope="session")
def toy_artifact(toy_workspace: ToyWorkspace) -> Path:
    return train(
        toy_workspace.train_instances, TrainConfig.toy(), toy_workspace.root / "artifact"
    )
