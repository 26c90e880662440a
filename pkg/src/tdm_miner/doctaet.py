"""DocTAET context feature: Title, Abstract, Experimental-setup head, Table info.

The feature concatenates the four components in that order, with two
truncation stages: a per-component whitespace-token budget for the
experimental-setup and table components, then a right trim of the whole
text to the configured cap. An uncapped measurement mode skips both
stages so corpus-level length statistics describe the raw feature.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

from tdm_miner.errors import EmptyCollectionError, EmptyDocumentError
from tdm_miner.ingest import StructuredDoc, normalize_ws

COMPONENTS = ("title", "abstract", "exp_setup", "table_info")

DEFAULT_HEADING_PATTERNS = ("experiment", "setup", "evaluation", "implementation")

_SENTENCE_SPLIT = re.compile(r"(?<=[.?!])\s+(?=[A-Z])")


@dataclass
class DocTaetConfig:
    cap: int = 512
    exp_table_budget: int = 150
    exp_section_sentences: int = 5
    exp_heading_patterns: tuple[str, ...] = DEFAULT_HEADING_PATTERNS

    def __post_init__(self):
        if self.cap < 1:
            raise ValueError("cap must be >= 1")
        if self.exp_table_budget < 0:
            raise ValueError("exp_table_budget must be >= 0")
        if self.exp_section_sentences < 1:
            raise ValueError("exp_section_sentences must be >= 1")

    @classmethod
    def for_cap(cls, cap: int) -> "DocTaetConfig":
        """The two model profiles: 512 with 150-token component budgets,
        2000 with budgets widened to the cap (the right trim dominates)."""
        if cap == 512:
            return cls(cap=512, exp_table_budget=150)
        if cap == 2000:
            return cls(cap=2000, exp_table_budget=2000)
        raise ValueError(f"unsupported cap profile: {cap} (choose 512 or 2000)")


@dataclass
class ContextFeature:
    paper_id: str
    text: str
    spans: dict[str, tuple[int, int]] = field(default_factory=dict)
    token_count: int = 0

    def component_text(self, component: str) -> str:
        start, end = self.spans[component]
        return self.text[start:end]

    def to_dict(self) -> dict:
        return {
            "paper_id": self.paper_id,
            "token_count": self.token_count,
            "text": self.text,
            "spans": {name: list(span) for name, span in self.spans.items()},
        }

    @classmethod
    def from_dict(cls, record: dict) -> "ContextFeature":
        return cls(
            paper_id=record["paper_id"],
            text=record["text"],
            spans={name: tuple(span) for name, span in record.get("spans", {}).items()},
            token_count=record["token_count"],
        )


def split_sentences(text: str) -> list[str]:
    """Split on sentence punctuation followed by whitespace and an uppercase letter."""
    text = text.strip()
    if not text:
        return []
    return _SENTENCE_SPLIT.split(text)


def _truncate(tokens: list[str], budget: int | None) -> list[str]:
    if budget is None:
        return tokens
    return tokens[:budget]


def _exp_setup_tokens(doc: StructuredDoc, cfg: DocTaetConfig, budget: int | None) -> list[str]:
    for section in doc.sections:
        heading = section.heading.lower()
        if any(pattern.lower() in heading for pattern in cfg.exp_heading_patterns):
            body = normalize_ws(" ".join(section.paragraphs))
            sentences = split_sentences(body)[: cfg.exp_section_sentences]
            return _truncate(" ".join(sentences).split(), budget)
    return []


def _table_info_tokens(doc: StructuredDoc, budget: int | None) -> list[str]:
    tokens: list[str] = []
    for table in doc.tables:
        tokens.extend(normalize_ws(table.caption).split())
        for cell in table.cells:
            tokens.extend(normalize_ws(cell).split())
        if budget is not None and len(tokens) >= budget:
            break
    return _truncate(tokens, budget)


def extract_doctaet(
    doc: StructuredDoc, cfg: DocTaetConfig | None = None, uncapped: bool = False
) -> ContextFeature:
    """Compute the context feature of a document.

    With ``uncapped`` the component budgets and the final cap are both
    skipped (measurement mode for corpus statistics).
    """
    cfg = cfg or DocTaetConfig()
    if not doc.title.strip() and not doc.abstract.strip():
        raise EmptyDocumentError(f"paper {doc.paper_id!r} has neither title nor abstract")

    budget = None if uncapped else cfg.exp_table_budget
    component_tokens = {
        "title": normalize_ws(doc.title).split(),
        "abstract": normalize_ws(doc.abstract).split(),
        "exp_setup": _exp_setup_tokens(doc, cfg, budget),
        "table_info": _table_info_tokens(doc, budget),
    }

    if not uncapped:
        remaining = cfg.cap
        for name in COMPONENTS:
            kept = component_tokens[name][:remaining]
            component_tokens[name] = kept
            remaining -= len(kept)

    text_parts: list[str] = []
    spans: dict[str, tuple[int, int]] = {}
    cursor = 0
    for name in COMPONENTS:
        tokens = component_tokens[name]
        if not tokens:
            spans[name] = (cursor, cursor)
            continue
        if text_parts:
            cursor += 1  # joining space
        chunk = " ".join(tokens)
        spans[name] = (cursor, cursor + len(chunk))
        text_parts.append(chunk)
        cursor += len(chunk)

    text = " ".join(text_parts)
    return ContextFeature(
        paper_id=doc.paper_id, text=text, spans=spans, token_count=len(text.split())
    )


class LengthStats(NamedTuple):
    max: int
    min: int
    mean: float


def feature_length_stats(features: Iterable[ContextFeature]) -> LengthStats:
    counts = [feature.token_count for feature in features]
    if not counts:
        raise EmptyCollectionError("no features to summarize")
    return LengthStats(max(counts), min(counts), sum(counts) / len(counts))


def write_features(features: Iterable[ContextFeature], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for feature in features:
            handle.write(json.dumps(feature.to_dict(), ensure_ascii=False) + "\n")


def read_features(path: str | Path) -> list[ContextFeature]:
    features = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                features.append(ContextFeature.from_dict(json.loads(line)))
    return features
