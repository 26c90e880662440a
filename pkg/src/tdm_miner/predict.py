"""Per-paper prediction: score every vocabulary triple, threshold, fall back to Unknown."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from tdm_miner.corpus import TdmTriple
from tdm_miner.doctaet import ContextFeature
from tdm_miner.errors import PredictError, TdmError
from tdm_miner.scorer import BaselineScorer, ScoreRequest, Scorer, render_hypothesis


@dataclass
class PredictionSet:
    paper_id: str
    predicted: set[TdmTriple] = field(default_factory=set)
    scores: dict[TdmTriple, float] = field(default_factory=dict)

    @property
    def is_unknown(self) -> bool:
        return any(triple.is_unknown for triple in self.predicted)


def predict_paper(
    context: ContextFeature,
    vocab,
    scorer: Scorer,
    threshold: float = 0.5,
    top_k: int | None = None,
    prefilter: bool = False,
) -> PredictionSet:
    """Score all vocabulary triples against one paper's context.

    ``predicted`` holds the triples whose probability clears the
    threshold, optionally truncated to the top_k highest (ties broken by
    vocabulary order); an empty set becomes {Unknown}. With ``prefilter``
    only triples with a positive baseline score are sent to the scorer,
    the rest are recorded at 0.0.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie strictly between 0 and 1")
    if top_k is not None and top_k < 1:
        raise ValueError("top_k must be >= 1")
    triples = list(vocab)
    requests = [
        ScoreRequest(context=context.text, hypothesis=render_hypothesis(t)) for t in triples
    ]
    scores: dict[TdmTriple, float] = {}
    if prefilter:
        baseline = BaselineScorer().score_pairs(requests)
        kept = [i for i, p in enumerate(baseline) if p > 0.0]
        scores.update({triples[i]: 0.0 for i in range(len(triples)) if i not in set(kept)})
        triples = [triples[i] for i in kept]
        requests = [requests[i] for i in kept]
    try:
        probabilities = scorer.score_pairs(requests)
    except TdmError as exc:
        raise PredictError(context.paper_id, exc) from exc
    scores.update(dict(zip(triples, probabilities)))

    above = [(i, t) for i, t in enumerate(triples) if probabilities[i] >= threshold]
    if top_k is not None:
        above.sort(key=lambda pair: (-probabilities[pair[0]], pair[0]))
        above = above[:top_k]
    predicted = {t for _, t in above}
    if not predicted:
        predicted = {TdmTriple.unknown()}
    return PredictionSet(paper_id=context.paper_id, predicted=predicted, scores=scores)


def predict_corpus(
    features: Sequence[ContextFeature],
    vocab,
    scorer: Scorer,
    threshold: float = 0.5,
    top_k: int | None = None,
    prefilter: bool = False,
    jobs: int = 1,
) -> list[PredictionSet]:
    """Predict every paper, in parallel when asked, merged in paper_id order."""

    def run(feature: ContextFeature) -> PredictionSet:
        return predict_paper(feature, vocab, scorer, threshold, top_k, prefilter)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, features))
    else:
        results = [run(feature) for feature in features]
    return sorted(results, key=lambda p: p.paper_id)


def write_predictions(predictions: Iterable[PredictionSet], path: str | Path) -> None:
    """Line-delimited rows: paper_id, task, dataset, metric, score.

    Unknown predictions carry the literal "unknown" in all three label
    fields and a score of 0.0.
    """
    with open(path, "w", encoding="utf-8") as handle:
        for prediction in predictions:
            ordered = sorted(prediction.predicted, key=lambda t: t.sort_key)
            for triple in ordered:
                record = {"paper_id": prediction.paper_id}
                record.update(triple.to_record())
                record["score"] = prediction.scores.get(triple, 0.0)
                handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def read_predictions(path: str | Path) -> list[PredictionSet]:
    by_id: dict[str, PredictionSet] = {}
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            record = json.loads(line)
            triple = TdmTriple.from_record(record)
            prediction = by_id.setdefault(record["paper_id"], PredictionSet(record["paper_id"]))
            prediction.predicted.add(triple)
            if not triple.is_unknown:
                prediction.scores[triple] = float(record.get("score", 0.0))
    return [by_id[pid] for pid in sorted(by_id)]
