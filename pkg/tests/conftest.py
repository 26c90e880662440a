from __future__ import annotations

import sys
from pathlib import Path

import pytest

from tdm_miner.corpus import PaperAnnotation, TdmTriple
from tdm_miner.doctaet import ContextFeature
from tdm_miner.ingest import Section, StructuredDoc, Table

FIXTURES = Path(__file__).parent / "fixtures"

FAKE_CONVERTER = f"{sys.executable} {FIXTURES / 'fake_pandoc.py'} {{input}} {{output}}"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def tei_dir() -> Path:
    return FIXTURES / "tei"


@pytest.fixture
def dump_files() -> tuple[Path, Path]:
    return FIXTURES / "dump" / "papers.jsonl", FIXTURES / "dump" / "evaluations.jsonl"


def make_doc(
    paper_id: str = "p1",
    title: str = "A Title",
    abstract: str = "An abstract sentence.",
    sections: list[tuple[str, list[str]]] | None = None,
    tables: list[tuple[str, list[str]]] | None = None,
) -> StructuredDoc:
    return StructuredDoc(
        paper_id=paper_id,
        title=title,
        abstract=abstract,
        sections=[Section(h, ps) for h, ps in (sections or [])],
        tables=[Table(c, cells) for c, cells in (tables or [])],
    )


def make_feature(paper_id: str = "p1", text: str = "some context text") -> ContextFeature:
    return ContextFeature(
        paper_id=paper_id,
        text=text,
        spans={
            "title": (0, len(text)),
            "abstract": (len(text), len(text)),
            "exp_setup": (len(text), len(text)),
            "table_info": (len(text), len(text)),
        },
        token_count=len(text.split()),
    )


def triple(task: str = "QA", dataset: str = "SQuAD", metric: str = "F1") -> TdmTriple:
    return TdmTriple(task, dataset, metric)


def annotation(paper_id: str, *triples: TdmTriple, **kwargs) -> PaperAnnotation:
    return PaperAnnotation(paper_id=paper_id, triples=set(triples), **kwargs)
