"""Record/replay cache for remote-service exchanges, keyed by request hash.

A cache directory holds one file per recorded exchange, named
``<sha256-of-request>.<suffix>`` and containing the raw response body.
Tests pre-seed these directories so the suite never touches the network.
"""

from __future__ import annotations

import hashlib
from pathlib import Path


def request_key(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()


class ReplayCache:
    def __init__(self, directory: str | Path, suffix: str = "bin"):
        self.directory = Path(directory)
        self.suffix = suffix

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.{self.suffix}"

    def get(self, payload: bytes) -> bytes | None:
        path = self._path(request_key(payload))
        if path.is_file():
            return path.read_bytes()
        return None

    def put(self, payload: bytes, response: bytes) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self._path(request_key(payload))
        path.write_bytes(response)
        return path
