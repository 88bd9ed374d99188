"""Deterministic stand-in scorer speaking the wire protocol.

Every result is derived from a SHA-256 hash of the request key, so
repeated runs (and score-file re-ingestion of exported values) are
byte-identical. Run as `python -m vidcurate.echo_scorer [--dim N]`.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys

import numpy as np

TASKS = ("aesthetic", "ocr", "embed_frame", "embed_text", "caption", "judge")

_WORDS = (
    "person", "dog", "car", "tree", "house", "river", "mountain", "street",
    "walks", "runs", "stands", "turns", "moves", "jumps", "slides", "spins",
    "slowly", "quickly", "quietly", "brightly",
)


def _digest(key: str) -> bytes:
    return hashlib.sha256(key.encode("utf-8")).digest()


def _unit(key: str, lo: float = 0.0, hi: float = 1.0) -> float:
    raw = int.from_bytes(_digest(key)[:8], "big")
    return lo + (hi - lo) * (raw / 2.0**64)


def _vector(key: str, dim: int) -> np.ndarray:
    seed = int.from_bytes(_digest(key)[:8], "big")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def _embed_frame(clip_id: str, dim: int) -> np.ndarray:
    base_id, _, qualifier = clip_id.partition("#")
    base = _vector("embed-base|" + base_id, dim)
    if not qualifier:
        return base
    drift = _unit("embed-drift|" + base_id)  # clip-level temporal drift amount
    wobble = _vector("embed-qual|" + clip_id, dim)
    mixed = base + drift * wobble
    return mixed / np.linalg.norm(mixed)


def _caption(clip_id: str) -> str:
    d = _digest("caption|" + clip_id)
    rng = np.random.default_rng(int.from_bytes(d[:8], "big"))
    words = [str(_WORDS[i]) for i in rng.integers(0, len(_WORDS), size=12)]
    base = "A video where the {} {} and the {} {} near the {}.".format(*words[:5])
    extra = "Then the {} {} while the {} {}.".format(*words[5:9])
    flavor = d[8] % 20
    if flavor == 0:
        return (
            "In the first frame a {} {}. In the next frame the {} {}.".format(*words[:4])
        )
    if flavor == 1:
        loop = "the {} {} and".format(words[0], words[8])
        return base + " " + " ".join([loop] * 4) + "."
    if flavor == 2:
        return base + " The scene changes to a {} by the {}.".format(words[2], words[3])
    if flavor == 3:
        filler = " ".join(str(_WORDS[i]) for i in rng.integers(0, len(_WORDS), size=70))
        return base + " " + filler  # long tail, never terminated
    if flavor == 4:
        return base + " " + base
    return base + " " + extra


def respond(req: dict, dim: int) -> dict:
    task = req.get("task")
    clip_id = req.get("clip_id", "")
    payload = req.get("payload") or {}
    out = {"type": "response", "task": task, "clip_id": clip_id}
    if task == "aesthetic":
        out["result"] = round(2.0 + 6.0 * _unit("aesthetic|" + clip_id), 6)
    elif task == "ocr":
        out["result"] = round(0.05 * _unit("ocr|" + clip_id), 6)
    elif task == "embed_frame":
        out["result"] = [float(v) for v in _embed_frame(clip_id, dim)]
    elif task == "embed_text":
        text = payload.get("text", "")
        out["result"] = [float(v) for v in _vector("text|" + text, dim)]
    elif task == "caption":
        out["result"] = _caption(clip_id)
    elif task == "judge":
        out["result"] = {"st": False, "flg": False, "redup": False, "eos_fail": False}
    else:
        out["error"] = f"unsupported task {task!r}"
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="echo-scorer")
    parser.add_argument("--dim", type=int, default=16)
    parser.add_argument("--tasks", default=",".join(TASKS),
                        help="comma-separated subset of tasks to advertise")
    args = parser.parse_args(argv)
    tasks = [t for t in args.tasks.split(",") if t]

    out = sys.stdout
    out.write(json.dumps({
        "type": "capabilities",
        "protocol": 1,
        "tasks": tasks,
        "embed_dim": args.dim,
    }) + "\n")
    out.flush()

    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            req = json.loads(line)
        except json.JSONDecodeError:
            out.write(json.dumps({
                "type": "response", "task": "", "clip_id": "",
                "error": "malformed request line",
            }) + "\n")
            out.flush()
            continue
        if req.get("task") not in tasks:
            resp = {
                "type": "response", "task": req.get("task"),
                "clip_id": req.get("clip_id", ""),
                "error": f"unsupported task {req.get('task')!r}",
            }
        else:
            resp = respond(req, args.dim)
        out.write(json.dumps(resp, ensure_ascii=False) + "\n")
        out.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
