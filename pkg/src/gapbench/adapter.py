"""Subprocess adapter protocol for external forecasting backends.

Wire format, newline-delimited JSON over the child's stdin/stdout, one
request per line, UTF-8, compact separators, numbers in shortest
round-trip decimal form:

    request:  {"id":<u64>,"step_s":<u32>,"horizon":<u32>,"history":[<f64>...]}
    response: {"id":<u64>,"values":[<f64>...]}
              {"id":<u64>,"error":"<msg>"}

One persistent child process serves an adapter for the whole run (model
loading usually dominates latency); requests to one adapter are serialized.
On timeout or a malformed response the request is re-sent with a fresh id,
up to ``max_retries`` extra attempts; stale responses are dropped by id.
A dead child is relaunched on the next call, so one bad gap never poisons
the rest of the run.
"""

from __future__ import annotations

import json
import queue
import subprocess
import sys
import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AdapterCrashed,
    AdapterMalformedResponse,
    AdapterReportedError,
    AdapterTimeout,
)
from .models.base import Forecaster

DEFAULT_TIMEOUT_S = 30.0
DEFAULT_MAX_RETRIES = 2


@dataclass(frozen=True)
class AdapterSpec:
    name: str
    command: tuple[str, ...]
    timeout_s: float = DEFAULT_TIMEOUT_S
    max_retries: int = DEFAULT_MAX_RETRIES
    deterministic: bool = True

    def __post_init__(self):
        if self.timeout_s <= 0:
            raise ValueError("timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if not self.command:
            raise ValueError("command must not be empty")
        object.__setattr__(self, "command", tuple(self.command))


class AdapterClient:
    """Owns the child process and the request/response cycle."""

    def __init__(self, spec: AdapterSpec):
        self.spec = spec
        self._proc: subprocess.Popen | None = None
        self._lines: queue.Queue | None = None
        self._next_id = 1
        self._lock = threading.Lock()

    # -- process management -------------------------------------------------

    def _ensure_running(self):
        if self._proc is not None and self._proc.poll() is None:
            return
        try:
            self._proc = subprocess.Popen(
                list(self.spec.command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            self._proc = None
            raise AdapterCrashed(f"adapter {self.spec.name}: cannot launch: {exc}") from None
        self._lines = queue.Queue()
        reader = threading.Thread(
            target=_pump_lines, args=(self._proc.stdout, self._lines), daemon=True
        )
        reader.start()

    def close(self):
        if self._proc is not None and self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=2.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
        self._proc = None

    # -- protocol ------------------------------------------------------------

    def forecast(self, history: np.ndarray, horizon: int, step_s: int = 1800) -> np.ndarray:
        history = np.asarray(history, dtype=np.float64)
        with self._lock:
            last_error: Exception | None = None
            for _ in range(self.spec.max_retries + 1):
                try:
                    return self._attempt(history, horizon, step_s)
                except AdapterReportedError:
                    raise  # deliberate refusal, retrying will not help
                except (AdapterTimeout, AdapterMalformedResponse, AdapterCrashed) as exc:
                    last_error = exc
            raise last_error

    def _attempt(self, history, horizon, step_s) -> np.ndarray:
        self._ensure_running()
        request_id = self._next_id
        self._next_id += 1
        line = json.dumps(
            {
                "id": request_id,
                "step_s": int(step_s),
                "horizon": int(horizon),
                "history": [float(v) for v in history],
            },
            separators=(",", ":"),
        )
        try:
            self._proc.stdin.write(line + "\n")
            self._proc.stdin.flush()
        except (OSError, ValueError) as exc:
            self.close()
            raise AdapterCrashed(f"adapter {self.spec.name}: write failed: {exc}") from None
        return self._read_response(request_id, horizon)

    def _read_response(self, request_id: int, horizon: int) -> np.ndarray:
        deadline = self.spec.timeout_s
        import time

        t0 = time.monotonic()
        while True:
            remaining = deadline - (time.monotonic() - t0)
            if remaining <= 0:
                raise AdapterTimeout(
                    f"adapter {self.spec.name}: no response within {self.spec.timeout_s}s"
                )
            try:
                item = self._lines.get(timeout=remaining)
            except queue.Empty:
                raise AdapterTimeout(
                    f"adapter {self.spec.name}: no response within {self.spec.timeout_s}s"
                ) from None
            if item is _EOF:
                self.close()
                raise AdapterCrashed(f"adapter {self.spec.name}: process closed its output")
            try:
                msg = json.loads(item)
            except json.JSONDecodeError as exc:
                raise AdapterMalformedResponse(
                    f"adapter {self.spec.name}: bad JSON: {exc}"
                ) from None
            if not isinstance(msg, dict) or msg.get("id") != request_id:
                continue  # stale response from an abandoned attempt
            if "error" in msg:
                raise AdapterReportedError(f"adapter {self.spec.name}: {msg['error']}")
            values = msg.get("values")
            if not isinstance(values, list) or len(values) != horizon:
                raise AdapterMalformedResponse(
                    f"adapter {self.spec.name}: expected {horizon} values, "
                    f"got {len(values) if isinstance(values, list) else type(values).__name__}"
                )
            arr = np.asarray(values, dtype=np.float64)
            if not np.all(np.isfinite(arr)):
                raise AdapterMalformedResponse(
                    f"adapter {self.spec.name}: non-finite values in response"
                )
            return arr


_EOF = object()


def _pump_lines(stream, out_queue):
    try:
        for line in stream:
            out_queue.put(line)
    except ValueError:
        pass
    out_queue.put(_EOF)


class AdapterForecaster(Forecaster):
    """Roster wrapper exposing an adapter as a Forecaster."""

    category = "external"
    min_history = 1

    def __init__(self, spec: AdapterSpec, step_s: int = 1800):
        self.name = spec.name
        self.deterministic = spec.deterministic
        self.step_s = step_s
        self.client = AdapterClient(spec)

    def forecast(self, history, horizon):
        return self.client.forecast(history, horizon, self.step_s)

    def close(self):
        self.client.close()


def echo_adapter_command() -> tuple[str, ...]:
    """Launch command for the bundled reference adapter."""
    return (sys.executable, "-m", "gapbench.adapters.echo")
