"""Helpers: a minimal protocol test client and synthetic FSER corpora."""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from vidcurate_sidecar import fserio

SIDECAR_SERVE = [sys.executable, "-m", "vidcurate_sidecar.cli", "serve"]
ENGINE_CLI = [sys.executable, "-m", "vidcurate.cli"]


class ProtocolClient:
    """Blocking line-at-a-time client, enough for tests."""

    def __init__(self, cmd):
        self.proc = subprocess.Popen(
            cmd, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            text=True, encoding="utf-8", bufsize=1,
        )
        self.capabilities = json.loads(self.proc.stdout.readline())

    def request(self, task, clip_id, payload):
        line = json.dumps({"type": "request", "task": task, "clip_id": clip_id,
                           "payload": payload})
        self.proc.stdin.write(line + "\n")
        self.proc.stdin.flush()
        return json.loads(self.proc.stdout.readline())

    def close(self):
        self.proc.stdin.close()
        self.proc.wait(timeout=10)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def make_fser(path: Path, segments, width=32, height=32, fps=8.0, seed=0):
    """Segments of (kind, length): 'flat' gray levels or seeded textures."""
    rng = np.random.default_rng(seed)
    frames = []
    for kind, length in segments:
        if kind == "flat":
            level = int(rng.integers(30, 220))
            frames.extend([np.full((height, width, 3), level, np.uint8)] * length)
        else:
            tex = rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8)
            tex = np.repeat(np.repeat(tex[::8, ::8], 8, axis=0), 8, axis=1)[:height, :width]
            for k in range(length):
                frames.append(np.roll(tex, k, axis=1))
    arr = np.stack(frames)
    fserio.write_fser(arr, fps, path)
    return arr


@pytest.fixture()
def sample_fser(tmp_path):
    path = tmp_path / "sample.fser"
    make_fser(path, [("texture", 12), ("flat", 12)], seed=3)
    return path
