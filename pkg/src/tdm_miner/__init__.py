"""Mine (Task, Dataset, Metric) leaderboard triples from scholarly papers.

Pipeline stages: document ingestion (LaTeX/PDF/TEI -> StructuredDoc),
DocTAET context features, distant-supervision corpus construction,
entailment scoring, per-paper prediction, micro/macro evaluation, and
knowledge-graph export.
"""

__version__ = "0.1.0"

from tdm_miner.corpus import (
    LabelVocabulary,
    PaperAnnotation,
    SamplingConfig,
    TdmTriple,
)
from tdm_miner.doctaet import ContextFeature, DocTaetConfig, extract_doctaet
from tdm_miner.evaluate import EvaluationReport, Setting, evaluate
from tdm_miner.ingest import SourceKind, StructuredDoc, parse_tei
from tdm_miner.predict import PredictionSet, predict_paper
from tdm_miner.scorer import BaselineScorer, RemoteScorer, render_hypothesis

__all__ = [
    "__version__",
    "BaselineScorer",
    "ContextFeature",
    "DocTaetConfig",
    "EvaluationReport",
    "LabelVocabulary",
    "PaperAnnotation",
    "PredictionSet",
    "RemoteScorer",
    "SamplingConfig",
    "Setting",
    "SourceKind",
    "StructuredDoc",
    "TdmTriple",
    "evaluate",
    "extract_doctaet",
    "parse_tei",
    "predict_paper",
    "render_hypothesis",
]
