from __future__ import annotations

import json

import pytest

from tdm_miner.corpus import PaperAnnotation, TdmTriple
from tdm_miner.kg_export import (
    BenchmarkRecord,
    collect_records,
    export_triples,
    slugify,
)
from tdm_miner.predict import PredictionSet

from tests.oracles import parse_ntriples

QA = TdmTriple("QA", "SQuAD", "F1")
IC = TdmTriple("Image Classification", "CIFAR-10", "Accuracy")


def ann(paper_id, title="A Paper", url="https://example.org/p"):
    return PaperAnnotation(paper_id, title=title, url=url, triples={QA})


def test_one_record_emits_three_relations_and_three_labels():
    result = export_triples([PredictionSet("p1", predicted={QA})], [ann("p1")])
    triples = parse_ntriples(result.text)
    relations = [t for t in triples if not t[2].startswith("literal:")]
    labels = [t for t in triples if t[2].startswith("literal:")]
    assert len(relations) == 3
    assert len(labels) == 3
    predicates = {p.rsplit("/", 1)[-1] for _, p, _ in relations}
    assert predicates == {"hasResearchProblem", "evaluatesOnDataset", "evaluatesWithMetric"}
    assert {o for _, _, o in labels} == {"literal:QA", "literal:SQuAD", "literal:F1"}


def test_shared_dataset_node_across_papers():
    predictions = [
        PredictionSet("p1", predicted={QA}),
        PredictionSet("p2", predicted={TdmTriple("RC", "SQuAD", "EM")}),
    ]
    result = export_triples(predictions, [ann("p1"), ann("p2")])
    triples = parse_ntriples(result.text)
    dataset_edges = [t for t in triples if t[1].endswith("evaluatesOnDataset")]
    assert len(dataset_edges) == 2
    assert len({o for _, _, o in dataset_edges}) == 1  # one shared node
    label_statements = [t for t in triples if t[2] == "literal:SQuAD"]
    assert len(label_statements) == 1


def test_unknown_predictions_emit_nothing():
    result = export_triples(
        [PredictionSet("p1", predicted={TdmTriple.unknown()})], [ann("p1")]
    )
    assert result.text == ""
    assert result.records == 0


def test_injective_on_records():
    predictions = [
        PredictionSet("p1", predicted={QA, IC}),
        PredictionSet("p2", predicted={QA}),
    ]
    result = export_triples(predictions, [ann("p1"), ann("p2")])
    relations = [t for t in parse_ntriples(result.text) if not t[2].startswith("literal:")]
    assert len(relations) == len(set(relations)) == 9


def test_deterministic_output():
    predictions = [PredictionSet("p1", predicted={QA, IC})]
    first = export_triples(predictions, [ann("p1")])
    second = export_triples(predictions, [ann("p1")])
    assert first.text == second.text


def test_slug_rule():
    assert slugify("SQuAD 1.1") == "squad-1-1"
    assert slugify("F1") == "f1"
    assert slugify("CIFAR-10") == "cifar-10"


def test_slug_collision_disambiguated():
    upper = TdmTriple("t", "d", "F1")
    lower = TdmTriple("t", "d", "f1")
    predictions = [PredictionSet("p1", predicted={upper, lower})]
    result = export_triples(predictions, [ann("p1")])
    triples = parse_ntriples(result.text)
    metric_nodes = {o for _, p, o in triples if p.endswith("evaluatesWithMetric")}
    assert len(metric_nodes) == 2
    labels = {o for _, p, o in triples if p.endswith("#label")}
    assert "literal:F1" in labels and "literal:f1" in labels


def test_control_characters_skip_record_with_warning():
    bad = TdmTriple("Ta\x01sk", "D", "M")  # \x01 survives whitespace normalization
    predictions = [PredictionSet("p1", predicted={bad, QA})]
    result = export_triples(predictions, [ann("p1")])
    assert len(result.warnings) == 1
    assert result.records == 1
    parse_ntriples(result.text)


def test_literal_escaping_roundtrips():
    tricky = TdmTriple('Say "hi"', "back\\slash", "M")
    result = export_triples([PredictionSet("p1", predicted={tricky})], [ann("p1")])
    labels = {o for _, p, o in parse_ntriples(result.text) if p.endswith("#label")}
    assert 'literal:Say "hi"' in labels
    assert "literal:back\\slash" in labels


def test_jsonlines_format():
    result = export_triples(
        [PredictionSet("p1", predicted={QA})],
        [ann("p1", title="T", url="u")],
        format="jsonlines",
    )
    rows = [json.loads(line) for line in result.text.splitlines()]
    assert rows == [
        {
            "paper_id": "p1",
            "paper_title": "T",
            "paper_url": "u",
            "task": "QA",
            "dataset": "SQuAD",
            "metric": "F1",
        }
    ]


def test_missing_annotation_yields_empty_metadata():
    records, warnings = collect_records([PredictionSet("p1", predicted={QA})], [])
    assert warnings == []
    assert records[0].paper_title == "" and records[0].paper_url == ""


def test_custom_base_iri():
    result = export_triples(
        [PredictionSet("p1", predicted={QA})], [ann("p1")], base_iri="https://kg.example.com/x"
    )
    for subject, predicate, obj in parse_ntriples(result.text):
        assert subject.startswith("https://kg.example.com/x/")


def test_unknown_format_rejected():
    with pytest.raises(ValueError):
        export_triples([], [], format="turtle")


def test_benchmark_record_optional_fields_absent():
    record = BenchmarkRecord("p", "t", "u", "a", "b", "c")
    assert "model_name" not in record.to_dict()
    assert "score" not in record.to_dict()
