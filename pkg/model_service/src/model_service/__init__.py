"""Sequence-pair entailment model: training and the /score HTTP service."""

__version__ = "0.1.0"

from model_service.train import ScoringModel, TrainConfig, train
from model_service.service import create_app, serve

__all__ = ["ScoringModel", "TrainConfig", "create_app", "serve", "train", "__version__"]
