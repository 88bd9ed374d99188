"""Boundary to external neural scorers.

Two transports deliver the same signals: precomputed score files (UTF-8
delimited tables with a typed header) and a line-delimited JSON
request/response protocol over a child process's standard streams. See
docs/score-files.md and docs/scorer-protocol.md for the exact grammars.
"""

from __future__ import annotations

import json
import logging
import queue
import subprocess
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import VidcurateError

log = logging.getLogger(__name__)

TASKS = ("aesthetic", "ocr", "embed_frame", "embed_text", "caption", "judge")
SCALAR_TASKS = ("aesthetic", "ocr")
PROTOCOL_VERSION = 1


class ScoreFileError(VidcurateError):
    pass


class ScorerError(VidcurateError):
    pass


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    dim: Optional[int] = None  # None marks a scalar column

    @classmethod
    def parse(cls, text: str) -> "ColumnSpec":
        if ":" in text:
            name, _, dim = text.partition(":")
            if not name or not dim.isdigit() or int(dim) < 1:
                raise ScoreFileError(f"bad column declaration {text!r}")
            return cls(name, int(dim))
        if not text:
            raise ScoreFileError("empty column name")
        return cls(text, None)

    def render(self) -> str:
        return self.name if self.dim is None else f"{self.name}:{self.dim}"


class ScoreFile:
    """Rows of named scalars and fixed-dimension vectors keyed by clip id."""

    def __init__(self, columns: Sequence[ColumnSpec], rows: dict):
        self.columns = list(columns)
        self.rows = rows

    @classmethod
    def load(cls, path) -> "ScoreFile":
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n")
            if not header:
                raise ScoreFileError(f"{path}: missing header")
            names = header.split(",")
            if names[0] != "clip_id":
                raise ScoreFileError(f"{path}: first column must be clip_id, got {names[0]!r}")
            columns = [ColumnSpec.parse(n) for n in names[1:]]
            rows: dict = {}
            for lineno, raw in enumerate(fh, start=2):
                line = raw.rstrip("\n")
                if not line:
                    continue
                cells = line.split(",")
                if len(cells) != len(columns) + 1:
                    raise ScoreFileError(
                        f"{path}: line {lineno}: expected {len(columns) + 1} cells, got {len(cells)}"
                    )
                key = cells[0]
                if not key:
                    raise ScoreFileError(f"{path}: line {lineno}: empty clip_id")
                if key in rows:
                    raise ScoreFileError(f"{path}: line {lineno}: duplicate clip_id {key}")
                row = {}
                for spec, cell in zip(columns, cells[1:]):
                    if cell == "":
                        continue
                    if spec.dim is None:
                        try:
                            row[spec.name] = float(cell)
                        except ValueError:
                            raise ScoreFileError(
                                f"{path}: line {lineno}: unparseable scalar "
                                f"{cell!r} in column {spec.name}"
                            ) from None
                    else:
                        parts = cell.split()
                        if len(parts) != spec.dim:
                            raise ScoreFileError(
                                f"{path}: line {lineno}: column {spec.name} expects "
                                f"{spec.dim} values, got {len(parts)}"
                            )
                        try:
                            vec = np.array([float(p) for p in parts], dtype=np.float64)
                        except ValueError:
                            raise ScoreFileError(
                                f"{path}: line {lineno}: unparseable vector in column {spec.name}"
                            ) from None
                        row[spec.name] = vec
                rows[key] = row
        return cls(columns, rows)

    def write(self, path) -> None:
        path = Path(path)
        lines = ["clip_id," + ",".join(c.render() for c in self.columns)]
        for key in sorted(self.rows):
            cells = [key]
            row = self.rows[key]
            for spec in self.columns:
                value = row.get(spec.name)
                if value is None:
                    cells.append("")
                elif spec.dim is None:
                    cells.append(repr(float(value)))
                else:
                    cells.append(" ".join(repr(float(v)) for v in value))
            lines.append(",".join(cells))
        path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")

    def get(self, clip_id: str, column: str):
        return self.rows.get(clip_id, {}).get(column)


def merge_score_files(files: Sequence[ScoreFile]) -> ScoreFile:
    """Merge tables column-wise; the same (clip, column) in two files is an error."""
    columns: dict = {}
    rows: dict = {}
    for sf in files:
        for spec in sf.columns:
            existing = columns.get(spec.name)
            if existing is not None and existing.dim != spec.dim:
                raise ScoreFileError(f"column {spec.name} declared with conflicting dims")
            columns[spec.name] = spec
        for key, row in sf.rows.items():
            target = rows.setdefault(key, {})
            for name, value in row.items():
                if name in target:
                    raise ScoreFileError(f"duplicate value for ({key}, {name}) across score files")
                target[name] = value
    return ScoreFile(list(columns.values()), rows)


# ---------------------------------------------------------------------------
# Wire protocol
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScoreRequest:
    task: str
    clip_id: str
    payload: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ScorerError(f"unknown task {self.task!r}")

    def to_line(self) -> str:
        return json.dumps(
            {"type": "request", "task": self.task, "clip_id": self.clip_id,
             "payload": self.payload},
            ensure_ascii=False, separators=(",", ":"),
        )


@dataclass(frozen=True)
class ScoreResponse:
    task: str
    clip_id: str
    result: object = None
    error: Optional[str] = None

    def __post_init__(self):
        if (self.result is None) == (self.error is None):
            raise ScorerError("response must carry exactly one of result/error")

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class Capabilities:
    tasks: tuple
    embed_dim: Optional[int] = None


class ScorerClient:
    """Single scorer process: pipelined requests with an in-flight window.

    One writer and one reader thread per process; responses are matched by
    (clip_id, task), so callers must key concurrent requests uniquely
    (frame requests suffix the clip id with #first/#mid/#last). Timeouts
    get one retry, then a locally synthesized error response.
    """

    def __init__(self, cmd: Sequence[str], *, timeout: float = 120.0, window: int = 32,
                 retries: int = 1):
        if not cmd:
            raise ScorerError("empty scorer command")
        self.cmd = list(cmd)
        self.timeout = timeout
        self.window = max(1, int(window))
        self.retries = retries
        self.proc: Optional[subprocess.Popen] = None
        self.capabilities: Optional[Capabilities] = None
        self._responses: "queue.Queue" = queue.Queue()
        self._reader: Optional[threading.Thread] = None

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> Capabilities:
        self.proc = subprocess.Popen(
            self.cmd,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            encoding="utf-8",
            bufsize=1,
        )
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        kind, obj = self._next_message(self.timeout)
        if kind != "line" or obj.get("type") != "capabilities":
            raise ScorerError(f"scorer handshake failed: {obj!r}")
        tasks = tuple(obj.get("tasks", ()))
        unknown = [t for t in tasks if t not in TASKS]
        if not tasks or unknown:
            raise ScorerError(f"scorer capabilities invalid: tasks={tasks}")
        dim = obj.get("embed_dim")
        if any(t.startswith("embed_") for t in tasks):
            if not isinstance(dim, int) or dim < 1:
                raise ScorerError(f"scorer must declare embed_dim, got {dim!r}")
        self.capabilities = Capabilities(tasks=tasks, embed_dim=dim)
        return self.capabilities

    def close(self) -> None:
        if self.proc is None:
            return
        try:
            if self.proc.stdin:
                self.proc.stdin.close()
            self.proc.wait(timeout=5)
        except Exception:
            self.proc.kill()
            self.proc.wait()
        self.proc = None

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, *exc):
        self.close()

    # -- request handling ----------------------------------------------------

    def supports(self, task: str) -> bool:
        return self.capabilities is not None and task in self.capabilities.tasks

    def request(self, req: ScoreRequest) -> ScoreResponse:
        return self.request_many([req])[0]

    def request_many(self, requests: Sequence[ScoreRequest]) -> list:
        """Pipeline requests up to the in-flight window; results come back
        in request order regardless of response interleaving."""
        results: list = [None] * len(requests)
        pending: dict = {}  # (clip_id, task) -> state
        next_to_send = 0
        done = 0

        def fail_outstanding(message):
            nonlocal done
            for key, state in list(pending.items()):
                results[state["index"]] = ScoreResponse(
                    task=key[1], clip_id=key[0], error=message
                )
                del pending[key]
                done += 1

        while done < len(requests):
            # locally reject what we can, then fill the window
            while next_to_send < len(requests) and len(pending) < self.window:
                req = requests[next_to_send]
                index = next_to_send
                next_to_send += 1
                if not self.supports(req.task):
                    results[index] = ScoreResponse(
                        task=req.task, clip_id=req.clip_id,
                        error=f"unsupported task {req.task}",
                    )
                    done += 1
                    continue
                key = (req.clip_id, req.task)
                if key in pending:
                    results[index] = ScoreResponse(
                        task=req.task, clip_id=req.clip_id,
                        error=f"duplicate in-flight request key {key}",
                    )
                    done += 1
                    continue
                if not self._send(req):
                    results[index] = ScoreResponse(
                        task=req.task, clip_id=req.clip_id, error="scorer process exited"
                    )
                    done += 1
                    continue
                pending[key] = {
                    "index": index,
                    "request": req,
                    "deadline": time.monotonic() + self.timeout,
                    "attempts": 1,
                }
            if not pending:
                continue

            wait = max(0.0, min(s["deadline"] for s in pending.values()) - time.monotonic())
            kind, obj = self._next_message(wait)
            if kind == "line":
                if self._dispatch(obj, pending, results):
                    done += 1
            elif kind == "eof":
                fail_outstanding("scorer process exited")
            elif kind == "timeout":
                now = time.monotonic()
                for key, state in list(pending.items()):
                    if state["deadline"] > now:
                        continue
                    if state["attempts"] <= self.retries and self._send(state["request"]):
                        state["attempts"] += 1
                        state["deadline"] = now + self.timeout
                        log.warning("retrying %s after timeout", key)
                    else:
                        results[state["index"]] = ScoreResponse(
                            task=key[1], clip_id=key[0], error="request timed out"
                        )
                        del pending[key]
                        done += 1
        return results

    # -- internals -----------------------------------------------------------

    def _send(self, req: ScoreRequest) -> bool:
        if self.proc is None or self.proc.poll() is not None or self.proc.stdin is None:
            return False
        try:
            self.proc.stdin.write(req.to_line() + "\n")
            self.proc.stdin.flush()
            return True
        except (BrokenPipeError, OSError, ValueError):
            return False

    def _read_loop(self):
        assert self.proc is not None and self.proc.stdout is not None
        for line in self.proc.stdout:
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                log.warning("scorer emitted unparseable line: %r", line[:200])
                continue
            self._responses.put(("line", obj))
        self._responses.put(("eof", None))

    def _next_message(self, wait: float):
        try:
            return self._responses.get(timeout=max(0.005, wait))
        except queue.Empty:
            return ("timeout", None)

    def _dispatch(self, obj: dict, pending: dict, results: list) -> bool:
        if obj.get("type") != "response":
            log.warning("ignoring non-response message: %r", obj)
            return False
        key = (obj.get("clip_id"), obj.get("task"))
        state = pending.pop(key, None)
        if state is None:
            log.warning("ignoring unmatched response for %r", key)
            return False
        if "error" in obj and obj["error"] is not None:
            resp = ScoreResponse(task=key[1], clip_id=key[0], error=str(obj["error"]))
        elif "result" in obj:
            resp = ScoreResponse(task=key[1], clip_id=key[0], result=obj["result"])
        else:
            resp = ScoreResponse(task=key[1], clip_id=key[0], error="response missing result")
        resp = self._validate_shape(state["request"], resp)
        results[state["index"]] = resp
        return True

    def _validate_shape(self, req: ScoreRequest, resp: ScoreResponse) -> ScoreResponse:
        if not resp.ok:
            return resp
        result = resp.result
        bad = None
        if req.task in SCALAR_TASKS and not isinstance(result, (int, float)):
            bad = "scalar"
        elif req.task.startswith("embed_"):
            dim = self.capabilities.embed_dim if self.capabilities else None
            if (
                not isinstance(result, list)
                or (dim is not None and len(result) != dim)
                or not all(isinstance(v, (int, float)) for v in result)
            ):
                bad = f"vector of dim {dim}"
        elif req.task == "caption" and not isinstance(result, str):
            bad = "string"
        elif req.task == "judge":
            if not isinstance(result, dict) or not all(
                isinstance(result.get(k), bool) for k in ("st", "flg", "redup", "eos_fail")
            ):
                bad = "judge booleans"
        if bad is not None:
            return ScoreResponse(
                task=resp.task, clip_id=resp.clip_id,
                error=f"malformed result, expected {bad}",
            )
        return resp


def embedding_from_result(result) -> "np.ndarray":
    return np.array(result, dtype=np.float64)
