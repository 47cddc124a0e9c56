"""Child-process model client speaking line-delimited JSON.

Wire protocol, one JSON document per line on stdin/stdout:

    request:  {"op": "predict", "instances": [[f64, ...], ...]}
    response: {"labels": [int, ...]}

Labels are binary codes 0/1.  A handle owns its child process: requests
are serialized (one in flight at a time) and responses are matched to
requests by order.
"""
from __future__ import annotations

import json
import queue
import shlex
import subprocess
import threading

import numpy as np

from ..errors import ModelError
from .base import BlackBoxModel, check_matrix

_EOF = object()


class ExternalModel(BlackBoxModel):
    """Black-box adapter around an external prediction process."""

    def __init__(
        self,
        command: str | list[str],
        n_features: int,
        timeout_ms: int = 10_000,
        descriptor: str = "external",
    ):
        self.descriptor = descriptor
        self.n_features = n_features
        self.timeout_ms = timeout_ms
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
            )
        except OSError as exc:
            raise ModelError(f"cannot launch external model {argv!r}: {exc}") from None
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()
        self._lock = threading.Lock()

    def _pump(self) -> None:
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(_EOF)

    def predict_labels(self, rows: np.ndarray) -> np.ndarray:
        rows = check_matrix(rows, self.n_features)
        request = json.dumps(
            {"op": "predict", "instances": [list(map(float, r)) for r in rows]}
        )
        with self._lock:
            try:
                self._proc.stdin.write(request + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError):
                raise ModelError("external model process is not accepting requests")
            try:
                line = self._lines.get(timeout=self.timeout_ms / 1000.0)
            except queue.Empty:
                raise ModelError(
                    f"external model timed out after {self.timeout_ms} ms"
                ) from None
        if line is _EOF:
            raise ModelError("external model process exited mid-request")
        try:
            payload = json.loads(line)
        except json.JSONDecodeError:
            raise ModelError(f"malformed external model response: {line!r}") from None
        labels = payload.get("labels") if isinstance(payload, dict) else None
        if not isinstance(labels, list) or len(labels) != rows.shape[0]:
            raise ModelError(
                f"external model response must carry {rows.shape[0]} labels, "
                f"got: {line!r}"
            )
        if not all(isinstance(v, int) and v in (0, 1) for v in labels):
            raise ModelError(f"external model labels must be 0/1 ints, got: {line!r}")
        return np.asarray(labels, dtype=np.int64)

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=2)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        self._reader.join(timeout=2)

    def __enter__(self) -> "ExternalModel":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def external_predict(handle: ExternalModel, rows: np.ndarray) -> np.ndarray:
    """One request/response round trip on an open handle."""
    return handle.predict_labels(rows)
