"""Distant-supervision corpus: annotations, label vocabulary, instances, folds.

Annotations come from a PwC-style dump (papers-with-abstracts plus
evaluation-tables records). True inference instances pair a paper's
context with its gold triples; false instances are sampled uniformly
without replacement from the rest of the vocabulary, with a per-paper
RNG stream so parallel generation order cannot change outputs.
"""

from __future__ import annotations

import gzip
import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from tdm_miner.doctaet import ContextFeature
from tdm_miner.errors import (
    EmptyVocabularyError,
    MalformedDumpError,
    TooFewPapersError,
)

UNKNOWN_LITERAL = "unknown"


@dataclass(frozen=True)
class TdmTriple:
    task: str
    dataset: str
    metric: str
    is_unknown: bool = False

    def __post_init__(self):
        object.__setattr__(self, "task", " ".join(self.task.split()))
        object.__setattr__(self, "dataset", " ".join(self.dataset.split()))
        object.__setattr__(self, "metric", " ".join(self.metric.split()))
        if self.is_unknown:
            if self.task or self.dataset or self.metric:
                raise ValueError("the Unknown label carries no texts")
        elif not (self.task and self.dataset and self.metric):
            raise ValueError("task, dataset and metric must all be non-empty")

    @classmethod
    def unknown(cls) -> "TdmTriple":
        return cls("", "", "", is_unknown=True)

    @property
    def sort_key(self) -> tuple[str, str, str]:
        return (self.task, self.dataset, self.metric)

    def to_record(self) -> dict:
        if self.is_unknown:
            return {"task": UNKNOWN_LITERAL, "dataset": UNKNOWN_LITERAL, "metric": UNKNOWN_LITERAL}
        return {"task": self.task, "dataset": self.dataset, "metric": self.metric}

    @classmethod
    def from_record(cls, record: dict) -> "TdmTriple":
        values = (record["task"], record["dataset"], record["metric"])
        if all(value == UNKNOWN_LITERAL for value in values):
            return cls.unknown()
        return cls(*values)


@dataclass
class PaperAnnotation:
    paper_id: str
    title: str = ""
    url: str = ""
    triples: set[TdmTriple] = field(default_factory=set)
    split: str | None = None

    @property
    def is_unknown(self) -> bool:
        return all(triple.is_unknown for triple in self.triples) if self.triples else True

    def to_dict(self) -> dict:
        record = {
            "paper_id": self.paper_id,
            "title": self.title,
            "url": self.url,
            "triples": [t.to_record() for t in sorted(self.triples, key=lambda t: t.sort_key)],
        }
        if self.split is not None:
            record["split"] = self.split
        return record

    @classmethod
    def from_dict(cls, record: dict) -> "PaperAnnotation":
        return cls(
            paper_id=record["paper_id"],
            title=record.get("title", ""),
            url=record.get("url", ""),
            triples={TdmTriple.from_record(t) for t in record.get("triples", [])},
            split=record.get("split"),
        )


@dataclass
class LoadResult:
    annotations: list[PaperAnnotation]
    warnings: list[str] = field(default_factory=list)


def _read_records(path: str | Path) -> list[dict]:
    path = Path(path)
    try:
        raw = path.read_bytes()
        if raw[:2] == b"\x1f\x8b":
            raw = gzip.decompress(raw)
        text = raw.decode("utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise MalformedDumpError(f"{path}: {exc}") from exc
    text = text.strip()
    if not text:
        return []
    try:
        if text.startswith("["):
            records = json.loads(text)
        else:
            records = [json.loads(line) for line in text.splitlines() if line.strip()]
    except json.JSONDecodeError as exc:
        raise MalformedDumpError(f"{path}: {exc}") from exc
    if not all(isinstance(record, dict) for record in records):
        raise MalformedDumpError(f"{path}: expected a list of record objects")
    return records


def load_annotations(papers_file: str | Path, evaluations_file: str | Path) -> LoadResult:
    """Join the two dump files into one PaperAnnotation per paper.

    Bad evaluation rows (empty label text, unknown paper id) are skipped
    and reported as warnings rather than aborting the load.
    """
    warnings: list[str] = []
    by_id: dict[str, PaperAnnotation] = {}
    for record in _read_records(papers_file):
        paper_id = str(record.get("paper_id", "")).strip()
        if not paper_id:
            raise MalformedDumpError(f"{papers_file}: paper record without paper_id")
        if paper_id in by_id:
            warnings.append(f"duplicate paper record {paper_id!r} ignored")
            continue
        by_id[paper_id] = PaperAnnotation(
            paper_id=paper_id,
            title=str(record.get("title", "")),
            url=str(record.get("url", "")),
            split=record.get("split"),
        )
    for i, record in enumerate(_read_records(evaluations_file)):
        paper_id = str(record.get("paper_id", "")).strip()
        texts = [str(record.get(key, "")).strip() for key in ("task", "dataset", "metric")]
        if not all(texts):
            warnings.append(f"evaluation row {i} skipped: empty task/dataset/metric text")
            continue
        annotation = by_id.get(paper_id)
        if annotation is None:
            warnings.append(f"evaluation row {i} references unknown paper {paper_id!r}")
            continue
        annotation.triples.add(TdmTriple(*texts))
    return LoadResult(annotations=list(by_id.values()), warnings=warnings)


@dataclass
class LabelVocabulary:
    triples: tuple[TdmTriple, ...]
    frequency: dict[TdmTriple, int]

    def __post_init__(self):
        self._index = {triple: i for i, triple in enumerate(self.triples)}

    def __len__(self) -> int:
        return len(self.triples)

    def __iter__(self):
        return iter(self.triples)

    def __contains__(self, triple: TdmTriple) -> bool:
        return triple in self._index

    def index(self, triple: TdmTriple) -> int:
        return self._index[triple]

    def tasks(self) -> set[str]:
        return {triple.task for triple in self.triples}

    def datasets(self) -> set[str]:
        return {triple.dataset for triple in self.triples}

    def metrics(self) -> set[str]:
        return {triple.metric for triple in self.triples}

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            for triple in self.triples:
                record = triple.to_record()
                record["frequency"] = self.frequency[triple]
                handle.write(json.dumps(record, ensure_ascii=False) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "LabelVocabulary":
        triples: list[TdmTriple] = []
        frequency: dict[TdmTriple, int] = {}
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                if not line.strip():
                    continue
                record = json.loads(line)
                triple = TdmTriple(record["task"], record["dataset"], record["metric"])
                triples.append(triple)
                frequency[triple] = int(record.get("frequency", 1))
        return cls(triples=tuple(triples), frequency=frequency)


def build_vocabulary(
    annotations: Sequence[PaperAnnotation], min_frequency: int = 1
) -> LabelVocabulary:
    """Distinct triples with paper frequency >= min_frequency, in lexicographic order."""
    counts: dict[TdmTriple, int] = {}
    for annotation in annotations:
        for triple in annotation.triples:
            if not triple.is_unknown:
                counts[triple] = counts.get(triple, 0) + 1
    kept = sorted(
        (triple for triple, count in counts.items() if count >= min_frequency),
        key=lambda t: t.sort_key,
    )
    if not kept:
        raise EmptyVocabularyError(
            f"no triple reaches paper frequency {min_frequency}"
        )
    return LabelVocabulary(
        triples=tuple(kept), frequency={t: counts[t] for t in kept}
    )


def assign_unknown(
    annotations: Sequence[PaperAnnotation], vocabulary: LabelVocabulary
) -> list[PaperAnnotation]:
    """Intersect each paper's triples with the vocabulary; empty papers become Unknown."""
    result = []
    for annotation in annotations:
        kept = {t for t in annotation.triples if t in vocabulary}
        if not kept:
            kept = {TdmTriple.unknown()}
        result.append(
            PaperAnnotation(
                paper_id=annotation.paper_id,
                title=annotation.title,
                url=annotation.url,
                triples=kept,
                split=annotation.split,
            )
        )
    return result


@dataclass
class SamplingConfig:
    num_false: int = 50
    rng_seed: int = 0

    def __post_init__(self):
        if self.num_false < 1:
            raise ValueError("num_false must be >= 1")


@dataclass
class InferenceInstance:
    paper_id: str
    triple: TdmTriple
    context: ContextFeature
    label: bool

    def to_record(self) -> dict:
        record = {"paper_id": self.paper_id, "label": self.label}
        record.update(self.triple.to_record())
        record["context"] = self.context.text
        return record


def paper_rng(rng_seed: int, paper_id: str) -> random.Random:
    """Per-paper RNG stream derived from a stable hash so ordering is immaterial."""
    digest = hashlib.sha256(f"{rng_seed}:{paper_id}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def generate_instances(
    paper: PaperAnnotation,
    context: ContextFeature,
    vocab: LabelVocabulary,
    cfg: SamplingConfig,
) -> list[InferenceInstance]:
    """True instances for the paper's gold triples plus sampled false ones.

    False triples are drawn uniformly without replacement from the
    vocabulary minus the gold set; the draw is exhausted when the
    vocabulary is smaller than the requested count.
    """
    gold = {t for t in paper.triples if not t.is_unknown}
    true_triples = sorted(gold, key=lambda t: t.sort_key)
    candidates = [t for t in vocab if t not in gold]
    rng = paper_rng(cfg.rng_seed, paper.paper_id)
    false_triples = rng.sample(candidates, min(cfg.num_false, len(candidates)))
    instances = [
        InferenceInstance(paper.paper_id, triple, context, True) for triple in true_triples
    ]
    instances.extend(
        InferenceInstance(paper.paper_id, triple, context, False) for triple in false_triples
    )
    return instances


@dataclass
class FoldSplit:
    assignment: dict[str, int]

    def fold_ids(self, fold: int) -> list[str]:
        return [pid for pid, f in self.assignment.items() if f == fold]

    def test_ids(self, fold: int) -> list[str]:
        return self.fold_ids(fold)

    def train_ids(self, fold: int) -> list[str]:
        return self.fold_ids(1 - fold)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.assignment, handle, ensure_ascii=False, indent=0, sort_keys=True)
            handle.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "FoldSplit":
        with open(path, encoding="utf-8") as handle:
            return cls(assignment={k: int(v) for k, v in json.load(handle).items()})


def make_folds(annotations: Sequence[PaperAnnotation], rng_seed: int = 0) -> FoldSplit:
    """Random halving of the paper set for two-fold cross-validation."""
    paper_ids = sorted({annotation.paper_id for annotation in annotations})
    if len(paper_ids) < 2:
        raise TooFewPapersError("fold splitting needs at least two papers")
    rng = random.Random(rng_seed)
    rng.shuffle(paper_ids)
    half = len(paper_ids) // 2
    assignment = {pid: (0 if i < half else 1) for i, pid in enumerate(paper_ids)}
    return FoldSplit(assignment=assignment)


@dataclass
class CorpusStats:
    papers: int
    unknown_papers: int
    total_triples: int
    avg_triples_per_paper: float | None
    distinct_triples: int
    distinct_tasks: int
    distinct_datasets: int
    distinct_metrics: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def corpus_stats(annotations: Sequence[PaperAnnotation]) -> CorpusStats:
    """Corpus-level counts; the average is per non-unknown paper."""
    distinct: set[TdmTriple] = set()
    total = 0
    unknown = 0
    for annotation in annotations:
        if annotation.is_unknown:
            unknown += 1
            continue
        gold = {t for t in annotation.triples if not t.is_unknown}
        total += len(gold)
        distinct.update(gold)
    labeled = len(annotations) - unknown
    return CorpusStats(
        papers=len(annotations),
        unknown_papers=unknown,
        total_triples=total,
        avg_triples_per_paper=(total / labeled) if labeled else None,
        distinct_triples=len(distinct),
        distinct_tasks=len({t.task for t in distinct}),
        distinct_datasets=len({t.dataset for t in distinct}),
        distinct_metrics=len({t.metric for t in distinct}),
    )


def write_annotations(annotations: Iterable[PaperAnnotation], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for annotation in annotations:
            handle.write(json.dumps(annotation.to_dict(), ensure_ascii=False) + "\n")


def read_annotations(path: str | Path) -> list[PaperAnnotation]:
    annotations = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                annotations.append(PaperAnnotation.from_dict(json.loads(line)))
    return annotations


def write_instances(instances: Iterable[InferenceInstance], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for instance in instances:
            handle.write(json.dumps(instance.to_record(), ensure_ascii=False) + "\n")
