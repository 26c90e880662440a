"""Serialize accepted predictions as Benchmark-shaped knowledge-graph statements.

N-Triples output links a paper resource to task/dataset/metric resources
via three predicates under a configurable base IRI, with one label
literal per resource. Resource IRIs are deterministic slugs so identical
labels across papers share a node; slug collisions between distinct
labels are disambiguated with a short hash suffix.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Sequence

from tdm_miner.corpus import PaperAnnotation
from tdm_miner.predict import PredictionSet

DEFAULT_BASE_IRI = "http://example.org/tdm/"
RDFS_LABEL = "http://www.w3.org/2000/01/rdf-schema#label"

RELATION_PREDICATES = {
    "task": "hasResearchProblem",
    "dataset": "evaluatesOnDataset",
    "metric": "evaluatesWithMetric",
}

FORMATS = ("ntriples", "jsonlines")


@dataclass
class BenchmarkRecord:
    paper_id: str
    paper_title: str
    paper_url: str
    task: str
    dataset: str
    metric: str
    model_name: str | None = None
    score: float | None = None

    def to_dict(self) -> dict:
        record = {
            "paper_id": self.paper_id,
            "paper_title": self.paper_title,
            "paper_url": self.paper_url,
            "task": self.task,
            "dataset": self.dataset,
            "metric": self.metric,
        }
        if self.model_name is not None:
            record["model_name"] = self.model_name
        if self.score is not None:
            record["score"] = self.score
        return record


@dataclass
class ExportResult:
    text: str
    records: int
    warnings: list[str] = field(default_factory=list)


def slugify(label: str) -> str:
    """Lowercase ASCII slug: alphanumerics kept, everything else a hyphen."""
    return "".join(
        c.lower() if ("a" <= c.lower() <= "z" or "0" <= c <= "9") else "-" for c in label
    )


class _SlugRegistry:
    """One namespace of collision-free slugs; same label always maps to one slug."""

    def __init__(self):
        self._by_label: dict[str, str] = {}
        self._owners: dict[str, str] = {}

    def slug(self, label: str) -> str:
        if label in self._by_label:
            return self._by_label[label]
        base = slugify(label)
        if self._owners.get(base, label) != label:
            base = f"{base}-{hashlib.sha1(label.encode('utf-8')).hexdigest()[:8]}"
        self._owners[base] = label
        self._by_label[label] = base
        return base


def _has_control_chars(*texts: str) -> bool:
    return any(ord(c) < 0x20 for text in texts for c in text)


def _escape_literal(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )


def collect_records(
    predictions: Sequence[PredictionSet], annotations: Sequence[PaperAnnotation]
) -> tuple[list[BenchmarkRecord], list[str]]:
    """Join predictions with paper metadata; Unknown predictions are dropped,
    records with control characters in any label are skipped with a warning."""
    meta = {annotation.paper_id: annotation for annotation in annotations}
    records: list[BenchmarkRecord] = []
    warnings: list[str] = []
    for prediction in predictions:
        annotation = meta.get(prediction.paper_id)
        title = annotation.title if annotation else ""
        url = annotation.url if annotation else ""
        for triple in sorted(prediction.predicted, key=lambda t: t.sort_key):
            if triple.is_unknown:
                continue
            if _has_control_chars(triple.task, triple.dataset, triple.metric, title):
                warnings.append(
                    f"record skipped, control character in labels: paper {prediction.paper_id!r}"
                )
                continue
            records.append(
                BenchmarkRecord(
                    paper_id=prediction.paper_id,
                    paper_title=title,
                    paper_url=url,
                    task=triple.task,
                    dataset=triple.dataset,
                    metric=triple.metric,
                )
            )
    return records, warnings


def _render_ntriples(records: Sequence[BenchmarkRecord], base_iri: str) -> str:
    if not base_iri.endswith(("/", "#")):
        base_iri += "/"
    papers = _SlugRegistry()
    registries = {"task": _SlugRegistry(), "dataset": _SlugRegistry(), "metric": _SlugRegistry()}
    lines: list[str] = []
    labeled: set[str] = set()
    for record in records:
        paper_iri = f"{base_iri}paper/{papers.slug(record.paper_id)}"
        for kind in ("task", "dataset", "metric"):
            label = getattr(record, kind)
            node_iri = f"{base_iri}{kind}/{registries[kind].slug(label)}"
            predicate_iri = f"{base_iri}{RELATION_PREDICATES[kind]}"
            lines.append(f"<{paper_iri}> <{predicate_iri}> <{node_iri}> .")
            if node_iri not in labeled:
                labeled.add(node_iri)
                lines.append(f'<{node_iri}> <{RDFS_LABEL}> "{_escape_literal(label)}" .')
    return "\n".join(lines) + ("\n" if lines else "")


def _render_jsonlines(records: Sequence[BenchmarkRecord]) -> str:
    return "".join(json.dumps(r.to_dict(), ensure_ascii=False) + "\n" for r in records)


def export_triples(
    predictions: Sequence[PredictionSet],
    annotations: Sequence[PaperAnnotation],
    format: str = "ntriples",
    base_iri: str = DEFAULT_BASE_IRI,
) -> ExportResult:
    if format not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    records, warnings = collect_records(predictions, annotations)
    if format == "ntriples":
        text = _render_ntriples(records, base_iri)
    else:
        text = _render_jsonlines(records)
    return ExportResult(text=text, records=len(records), warnings=warnings)
