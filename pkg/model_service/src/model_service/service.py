"""HTTP face of a trained artifact: POST /score and GET /health.

The wire protocol is shared with the pipeline's remote scorer: the body
is {"pairs": [{"context": ..., "hypothesis": ...}]} and the answer is
{"probabilities": [...]} with one value per pair, in order. Batches above
MAX_PAIRS are refused with 413.
"""

from __future__ import annotations

import socket
from pathlib import Path

import uvicorn
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from model_service.errors import PortInUseError
from model_service.train import ScoringModel

MAX_PAIRS = 512


class ScorePair(BaseModel):
    context: str
    hypothesis: str


class ScoreBody(BaseModel):
    pairs: list[ScorePair]


class ScoreResponse(BaseModel):
    probabilities: list[float]


def create_app(artifact_dir: str | Path) -> FastAPI:
    model = ScoringModel.load(artifact_dir)
    app = FastAPI(title="tdm-model-service")

    @app.post("/score", response_model=ScoreResponse)
    def score(body: ScoreBody) -> ScoreResponse:
        if len(body.pairs) > MAX_PAIRS:
            raise HTTPException(
                status_code=413, detail=f"batch of {len(body.pairs)} exceeds {MAX_PAIRS} pairs"
            )
        probabilities = model.score_pairs(
            [(pair.context, pair.hypothesis) for pair in body.pairs]
        )
        return ScoreResponse(probabilities=probabilities)

    @app.get("/health")
    def health() -> dict:
        return {"model": model.name, "max_length": model.config.max_length}

    return app


def check_port_free(port: int, host: str = "127.0.0.1") -> None:
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as exc:
        raise PortInUseError(f"{host}:{port} is already bound: {exc}") from exc
    finally:
        probe.close()


def serve(artifact_dir: str | Path, port: int, host: str = "127.0.0.1") -> None:
    check_port_free(port, host)
    app = create_app(artifact_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
