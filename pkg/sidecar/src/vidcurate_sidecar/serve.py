"""Scorer-protocol server: one JSON message per line on stdin/stdout.

Handshake first, then one response per request; results are deterministic
for fixed model weights (built-ins carry none). Frame payloads reference
FSER files by path and are read on demand.
"""

from __future__ import annotations

import json
import sys

import numpy as np

from . import fserio, models
from .config import SidecarConfig


class Server:
    def __init__(self, config: SidecarConfig):
        self.config = config
        self.embedder = None
        self.aesthetic = None
        self.ocr = None
        self.captioner = None
        self.judge = None
        tasks = config.tasks
        if "embed_frame" in tasks or "embed_text" in tasks:
            self.embedder = models.build_embedder(config.embed)
        if "aesthetic" in tasks:
            self.aesthetic = models.build_scalar("aesthetic", config.aesthetic)
        if "ocr" in tasks:
            self.ocr = models.build_scalar("ocr", config.ocr)
        if "caption" in tasks:
            self.captioner = models.build_captioner(config.caption)
        if "judge" in tasks:
            self.judge = models.build_judge(config.judge)

    def capabilities(self) -> dict:
        caps = {"type": "capabilities", "protocol": 1, "tasks": list(self.config.tasks)}
        if self.embedder is not None:
            caps["embed_dim"] = int(self.embedder.dim)
        return caps

    def _clip_frames(self, payload: dict) -> np.ndarray:
        path = payload.get("fser")
        if not path:
            raise models.ModelError("payload missing fser path")
        start = int(payload.get("start", 0))
        end = payload.get("end")
        return fserio.read_frames(path, start, None if end is None else int(end))

    def handle(self, req: dict) -> dict:
        task = req.get("task")
        clip_id = req.get("clip_id", "")
        payload = req.get("payload") or {}
        out = {"type": "response", "task": task, "clip_id": clip_id}
        if task not in self.config.tasks:
            out["error"] = f"unsupported task {task!r}"
            return out
        try:
            if task == "aesthetic":
                out["result"] = self.aesthetic.score(self._clip_frames(payload))
            elif task == "ocr":
                out["result"] = self.ocr.score(self._clip_frames(payload))
            elif task == "embed_frame":
                frame = fserio.read_frame(payload["fser"], int(payload["frame"]))
                out["result"] = [float(v) for v in self.embedder.embed_frame(frame)]
            elif task == "embed_text":
                out["result"] = [float(v) for v in self.embedder.embed_text(payload.get("text", ""))]
            elif task == "caption":
                out["result"] = self.captioner.caption(self._clip_frames(payload))
            elif task == "judge":
                out["result"] = self.judge.judge(payload.get("text", ""))
            else:
                out["error"] = f"unsupported task {task!r}"
        except (models.ModelError, fserio.FserError, KeyError, ValueError, OSError) as exc:
            out["error"] = f"{type(exc).__name__}: {exc}"
        return out

    def run(self, stdin=None, stdout=None) -> int:
        stdin = stdin if stdin is not None else sys.stdin
        stdout = stdout if stdout is not None else sys.stdout
        stdout.write(json.dumps(self.capabilities()) + "\n")
        stdout.flush()
        for line in stdin:
            line = line.strip()
            if not line:
                continue
            try:
                req = json.loads(line)
            except json.JSONDecodeError:
                resp = {"type": "response", "task": "", "clip_id": "",
                        "error": "malformed request line"}
            else:
                resp = self.handle(req)
            stdout.write(json.dumps(resp, ensure_ascii=False) + "\n")
            stdout.flush()
        return 0
