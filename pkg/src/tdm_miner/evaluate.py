"""Micro/macro precision, recall, F1 over prediction sets versus gold.

Two evaluation settings: ``with_unknown`` treats Unknown as an ordinary
label and counts every paper; ``without_unknown`` drops papers whose
gold set is {Unknown}. Micro scores come from global TP/FP/FN counts
over all (paper, label) decisions; macro scores average per-paper
metrics (a per-label variant is available behind ``macro_mode``).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Mapping, Sequence

from tdm_miner.corpus import PaperAnnotation, TdmTriple
from tdm_miner.errors import (
    EmptyEvaluationError,
    SettingMismatchError,
    UnknownPaperIdError,
)
from tdm_miner.predict import PredictionSet

CONCEPTS = ("Task", "Dataset", "Metric")

_UNKNOWN_MARK = ("<unknown>",)


class Setting(str, enum.Enum):
    WITH_UNKNOWN = "with_unknown"
    WITHOUT_UNKNOWN = "without_unknown"


@dataclass(frozen=True)
class MetricBlock:
    macro_p: float
    macro_r: float
    macro_f1: float
    micro_p: float
    micro_r: float
    micro_f1: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, record: Mapping[str, float]) -> "MetricBlock":
        return cls(**{k: float(record[k]) for k in cls.__dataclass_fields__})


@dataclass
class EvaluationReport:
    setting: Setting
    overall: MetricBlock
    per_concept: dict[str, MetricBlock] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "setting": self.setting.value,
            "overall": self.overall.to_dict(),
            "per_concept": {name: block.to_dict() for name, block in self.per_concept.items()},
        }

    @classmethod
    def from_dict(cls, record: dict) -> "EvaluationReport":
        return cls(
            setting=Setting(record["setting"]),
            overall=MetricBlock.from_dict(record["overall"]),
            per_concept={
                name: MetricBlock.from_dict(block)
                for name, block in record.get("per_concept", {}).items()
            },
        )

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.to_dict(), handle, ensure_ascii=False, indent=2, sort_keys=True)
            handle.write("\n")


def f1_score(p: float, r: float) -> float:
    if p + r == 0.0:
        return 0.0
    return 2.0 * p * r / (p + r)


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def _paper_sets(
    predictions: Sequence[PredictionSet],
    gold: Sequence[PaperAnnotation],
    setting: Setting,
) -> dict[str, tuple[set, set]]:
    gold_by_id = {annotation.paper_id: annotation for annotation in gold}
    for prediction in predictions:
        if prediction.paper_id not in gold_by_id:
            raise UnknownPaperIdError(f"prediction for unknown paper {prediction.paper_id!r}")
    pred_by_id = {prediction.paper_id: prediction.predicted for prediction in predictions}
    unknown_fallback = {TdmTriple.unknown()}
    pairs: dict[str, tuple[set, set]] = {}
    for paper_id in sorted(gold_by_id):
        annotation = gold_by_id[paper_id]
        if setting is Setting.WITHOUT_UNKNOWN and annotation.is_unknown:
            continue
        predicted = pred_by_id.get(paper_id, unknown_fallback)
        pairs[paper_id] = (set(annotation.triples), set(predicted))
    if not pairs:
        raise EmptyEvaluationError("no papers remain under this evaluation setting")
    return pairs


def _project(labels: set, concept: str) -> set:
    attr = concept.lower()
    return {
        _UNKNOWN_MARK if label.is_unknown else getattr(label, attr) for label in labels
    }


def _score_pairs(pairs: dict[str, tuple[set, set]], macro_mode: str) -> MetricBlock:
    tp = fp = fn = 0
    paper_p: list[float] = []
    paper_r: list[float] = []
    paper_f1: list[float] = []
    for gold_set, pred_set in pairs.values():
        hit = len(gold_set & pred_set)
        tp += hit
        fp += len(pred_set) - hit
        fn += len(gold_set) - hit
        p = _safe_div(hit, len(pred_set))
        r = _safe_div(hit, len(gold_set))
        paper_p.append(p)
        paper_r.append(r)
        paper_f1.append(f1_score(p, r))

    if macro_mode == "paper":
        macro_p = sum(paper_p) / len(paper_p)
        macro_r = sum(paper_r) / len(paper_r)
        macro_f1 = sum(paper_f1) / len(paper_f1)
    elif macro_mode == "label":
        per_label: dict[Hashable, list[int]] = {}
        for gold_set, pred_set in pairs.values():
            for label in gold_set | pred_set:
                counts = per_label.setdefault(label, [0, 0, 0])
                if label in gold_set and label in pred_set:
                    counts[0] += 1
                elif label in pred_set:
                    counts[1] += 1
                else:
                    counts[2] += 1
        label_p = [_safe_div(c[0], c[0] + c[1]) for c in per_label.values()]
        label_r = [_safe_div(c[0], c[0] + c[2]) for c in per_label.values()]
        macro_p = sum(label_p) / len(label_p)
        macro_r = sum(label_r) / len(label_r)
        macro_f1 = sum(f1_score(p, r) for p, r in zip(label_p, label_r)) / len(label_p)
    else:
        raise ValueError(f"unknown macro_mode: {macro_mode}")

    micro_p = _safe_div(tp, tp + fp)
    micro_r = _safe_div(tp, tp + fn)
    return MetricBlock(
        macro_p=macro_p,
        macro_r=macro_r,
        macro_f1=macro_f1,
        micro_p=micro_p,
        micro_r=micro_r,
        micro_f1=f1_score(micro_p, micro_r),
    )


def evaluate(
    predictions: Sequence[PredictionSet],
    gold: Sequence[PaperAnnotation],
    setting: Setting = Setting.WITH_UNKNOWN,
    macro_mode: str = "paper",
) -> EvaluationReport:
    """Full report: overall scores plus per-concept projections.

    Papers present in gold but absent from predictions count as
    predicting {Unknown}.
    """
    pairs = _paper_sets(predictions, gold, setting)
    overall = _score_pairs(pairs, macro_mode)
    per_concept = {}
    for concept in CONCEPTS:
        projected = {
            paper_id: (_project(gold_set, concept), _project(pred_set, concept))
            for paper_id, (gold_set, pred_set) in pairs.items()
        }
        per_concept[concept] = _score_pairs(projected, macro_mode)
    return EvaluationReport(setting=setting, overall=overall, per_concept=per_concept)


def evaluate_concept(
    predictions: Sequence[PredictionSet],
    gold: Sequence[PaperAnnotation],
    concept: str,
    setting: Setting = Setting.WITH_UNKNOWN,
    macro_mode: str = "paper",
) -> MetricBlock:
    """Scores after projecting every gold and predicted triple onto one concept."""
    if concept not in CONCEPTS:
        raise ValueError(f"concept must be one of {CONCEPTS}")
    pairs = _paper_sets(predictions, gold, setting)
    projected = {
        paper_id: (_project(gold_set, concept), _project(pred_set, concept))
        for paper_id, (gold_set, pred_set) in pairs.items()
    }
    return _score_pairs(projected, macro_mode)


def _mean_block(blocks: Sequence[MetricBlock]) -> MetricBlock:
    return MetricBlock(
        **{
            name: sum(getattr(block, name) for block in blocks) / len(blocks)
            for name in MetricBlock.__dataclass_fields__
        }
    )


def crossfold_average(reports: Sequence[EvaluationReport]) -> EvaluationReport:
    """Arithmetic mean of every metric field across the two fold reports."""
    if len(reports) != 2:
        raise ValueError("cross-fold averaging expects exactly two reports")
    first, second = reports
    if first.setting is not second.setting:
        raise SettingMismatchError(
            f"cannot average {first.setting.value} with {second.setting.value}"
        )
    if set(first.per_concept) != set(second.per_concept):
        raise SettingMismatchError("reports carry different per-concept breakdowns")
    return EvaluationReport(
        setting=first.setting,
        overall=_mean_block([first.overall, second.overall]),
        per_concept={
            name: _mean_block([first.per_concept[name], second.per_concept[name]])
            for name in first.per_concept
        },
    )


def format_report(report: EvaluationReport) -> str:
    """Plain-text table in Ma-P, Ma-R, Ma-F1, Mi-P, Mi-R, Mi-F1 column order."""
    header = f"{'':<10}" + "".join(
        f"{name:>8}" for name in ("Ma-P", "Ma-R", "Ma-F1", "Mi-P", "Mi-R", "Mi-F1")
    )
    lines = [f"setting: {report.setting.value}", header]

    def row(name: str, block: MetricBlock) -> str:
        values = (
            block.macro_p, block.macro_r, block.macro_f1,
            block.micro_p, block.micro_r, block.micro_f1,
        )
        return f"{name:<10}" + "".join(f"{100.0 * value:>8.2f}" for value in values)

    lines.append(row("overall", report.overall))
    for concept in CONCEPTS:
        if concept in report.per_concept:
            lines.append(row(concept, report.per_concept[concept]))
    return "\n".join(lines) + "\n"
