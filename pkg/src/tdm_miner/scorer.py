"""Scoring contract: (context, hypothesis) -> entailment probability.

Two implementations share one interface: a dependency-free lexical
baseline (hypothesis-token coverage of the context) and a client for the
remote model service speaking the POST /score wire protocol. Scoring is
read-only, so remote retries are safe.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import requests

from tdm_miner.corpus import TdmTriple
from tdm_miner.errors import (
    EndpointUnreachableError,
    HttpError,
    RemoteTimeoutError,
    SchemaError,
    UnknownTripleError,
)
from tdm_miner.replay import ReplayCache

HYPOTHESIS_SEPARATOR = " : "


@dataclass(frozen=True)
class ScoreRequest:
    context: str
    hypothesis: str

    def __post_init__(self):
        if not self.context or not self.hypothesis:
            raise ValueError("context and hypothesis must both be non-empty")


@dataclass(frozen=True)
class ScoreResult:
    probability_true: float

    def __post_init__(self):
        if not 0.0 <= self.probability_true <= 1.0:
            raise ValueError(f"probability out of range: {self.probability_true}")


def render_hypothesis(triple: TdmTriple) -> str:
    """Colon-joined "task : dataset : metric" rendering of a triple."""
    if triple.is_unknown:
        raise UnknownTripleError("the Unknown label has no hypothesis rendering")
    return HYPOTHESIS_SEPARATOR.join((triple.task, triple.dataset, triple.metric))


def score_baseline(req: ScoreRequest) -> ScoreResult:
    """Fraction of distinct hypothesis words present in the context.

    Words are lowercased whitespace tokens; the ":" separators of the
    hypothesis rendering are dropped.
    """
    hypothesis_words = {
        token.lower() for token in req.hypothesis.split() if token != ":"
    }
    if not hypothesis_words:
        return ScoreResult(0.0)
    context_words = {token.lower() for token in req.context.split()}
    overlap = len(hypothesis_words & context_words)
    return ScoreResult(overlap / len(hypothesis_words))


class Scorer(Protocol):
    def score_pairs(self, reqs: Sequence[ScoreRequest]) -> list[float]:
        ...


class BaselineScorer:
    name = "baseline"

    def score_pairs(self, reqs: Sequence[ScoreRequest]) -> list[float]:
        return [score_baseline(req).probability_true for req in reqs]


class RemoteScorer:
    """Client for the model service POST /score endpoint.

    Requests are chunked to ``batch_size`` pairs; responses carry one
    probability per pair in request order. Connection-level failures are
    retried with exponential backoff, a semaphore limits concurrent
    in-flight batches, and a replay directory makes tests hermetic.
    """

    name = "remote"

    def __init__(
        self,
        endpoint: str,
        batch_size: int = 64,
        timeout: float = 30.0,
        retries: int = 2,
        backoff: float = 0.5,
        max_concurrent_batches: int = 4,
        replay_dir: str | Path | None = None,
        record: bool = False,
        auth_token: str | None = None,
        session: requests.Session | None = None,
    ):
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        self.endpoint = endpoint
        self.batch_size = batch_size
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self.cache = ReplayCache(replay_dir, suffix="json") if replay_dir else None
        self.record = record
        self.auth_token = auth_token or os.environ.get("TDM_ENDPOINT_TOKEN")
        self.session = session or requests.Session()
        self._slots = threading.Semaphore(max_concurrent_batches)

    @staticmethod
    def encode_request(reqs: Sequence[ScoreRequest]) -> bytes:
        body = {
            "pairs": [
                {"context": req.context, "hypothesis": req.hypothesis} for req in reqs
            ]
        }
        return json.dumps(body, ensure_ascii=False).encode("utf-8")

    def score(self, req: ScoreRequest) -> ScoreResult:
        return ScoreResult(self.score_pairs([req])[0])

    def score_pairs(self, reqs: Sequence[ScoreRequest]) -> list[float]:
        probabilities: list[float] = []
        for start in range(0, len(reqs), self.batch_size):
            batch = reqs[start : start + self.batch_size]
            probabilities.extend(self._score_batch(batch))
        return probabilities

    def _score_batch(self, batch: Sequence[ScoreRequest]) -> list[float]:
        payload = self.encode_request(batch)
        if self.cache is not None:
            cached = self.cache.get(payload)
            if cached is not None:
                return self._parse_response(cached, len(batch))
        body = self._post_with_retries(payload)
        if self.cache is not None and self.record:
            self.cache.put(payload, body)
        return self._parse_response(body, len(batch))

    def _post_with_retries(self, payload: bytes) -> bytes:
        headers = {"Content-Type": "application/json"}
        if self.auth_token:
            headers["Authorization"] = f"Bearer {self.auth_token}"
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                with self._slots:
                    response = self.session.post(
                        self.endpoint, data=payload, headers=headers, timeout=self.timeout
                    )
            except requests.Timeout as exc:
                last_error = RemoteTimeoutError(f"{self.endpoint}: {exc}")
                continue
            except requests.ConnectionError as exc:
                last_error = EndpointUnreachableError(f"{self.endpoint}: {exc}")
                continue
            if response.status_code >= 500:
                last_error = HttpError(response.status_code, response.text)
                continue
            if response.status_code != 200:
                raise HttpError(response.status_code, response.text)
            return response.content
        assert last_error is not None
        raise last_error

    @staticmethod
    def _parse_response(body: bytes, expected: int) -> list[float]:
        try:
            decoded = json.loads(body.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise SchemaError(f"response is not JSON: {exc}") from exc
        probabilities = decoded.get("probabilities") if isinstance(decoded, dict) else None
        if not isinstance(probabilities, list):
            raise SchemaError("response missing 'probabilities' list")
        if len(probabilities) != expected:
            raise SchemaError(
                f"expected {expected} probabilities, got {len(probabilities)}"
            )
        values = []
        for value in probabilities:
            if not isinstance(value, (int, float)) or not 0.0 <= float(value) <= 1.0:
                raise SchemaError(f"probability out of range: {value!r}")
            values.append(float(value))
        return values


def make_scorer(
    kind: str,
    endpoint: str | None = None,
    batch_size: int = 64,
    replay_dir: str | Path | None = None,
    record: bool = False,
) -> Scorer:
    if kind == "baseline":
        return BaselineScorer()
    if kind == "remote":
        if not endpoint:
            raise ValueError("remote scorer requires an endpoint")
        return RemoteScorer(
            endpoint, batch_size=batch_size, replay_dir=replay_dir, record=record
        )
    raise ValueError(f"unknown scorer kind: {kind}")
