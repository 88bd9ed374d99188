"""Protocol server behavior over real pipes, and engine conformance."""

import json
import subprocess
import sys

import numpy as np
import yaml

from conftest import ENGINE_CLI, SIDECAR_SERVE, ProtocolClient
from vidcurate_sidecar import fserio


class TestHandshake:
    def test_capabilities_shape(self):
        with ProtocolClient(SIDECAR_SERVE) as client:
            caps = client.capabilities
        assert caps["type"] == "capabilities"
        assert caps["protocol"] == 1
        assert set(caps["tasks"]) == {
            "aesthetic", "ocr", "embed_frame", "embed_text", "caption", "judge",
        }
        assert caps["embed_dim"] == 16

    def test_task_subset_from_config(self, tmp_path):
        config = tmp_path / "cfg.yaml"
        config.write_text(yaml.safe_dump({"tasks": ["judge"],
                                          "judge": {"kind": "pattern-judge"}}))
        with ProtocolClient(SIDECAR_SERVE + ["--config", str(config)]) as client:
            caps = client.capabilities
            assert caps["tasks"] == ["judge"]
            assert "embed_dim" not in caps
            resp = client.request("aesthetic", "x:0-1", {})
            assert "error" in resp and "unsupported" in resp["error"]

    def test_bad_config_fails_handshake(self, tmp_path):
        config = tmp_path / "bad.yaml"
        config.write_text(yaml.safe_dump({"tasks": ["aesthetic"], "aesthetic": {}}))
        proc = subprocess.run(
            SIDECAR_SERVE + ["--config", str(config)],
            input="", capture_output=True, text=True,
        )
        assert proc.returncode == 1
        first = json.loads(proc.stdout.splitlines()[0])
        assert "error" in first


class TestRequests:
    def test_embed_frame_reads_fser(self, sample_fser):
        with ProtocolClient(SIDECAR_SERVE) as client:
            resp = client.request("embed_frame", "sample:0-12#first",
                                  {"fser": str(sample_fser), "frame": 0})
            assert resp["clip_id"] == "sample:0-12#first"
            assert len(resp["result"]) == 16
            # must match an in-process computation on the same pixels
            from vidcurate_sidecar.models import PixelEmbedder

            expect = PixelEmbedder(grid=4).embed_frame(fserio.read_frame(sample_fser, 0))
            assert resp["result"] == [float(v) for v in expect]

    def test_scalar_and_caption_tasks(self, sample_fser):
        with ProtocolClient(SIDECAR_SERVE) as client:
            payload = {"fser": str(sample_fser), "start": 0, "end": 12}
            aesthetic = client.request("aesthetic", "s:0-12", payload)
            ocr = client.request("ocr", "s:0-12", payload)
            caption = client.request("caption", "s:0-12", payload)
            assert 0.0 <= aesthetic["result"] <= 8.0
            assert ocr["result"] >= 0.0
            assert isinstance(caption["result"], str) and caption["result"].endswith(".")

    def test_judge_task(self):
        with ProtocolClient(SIDECAR_SERVE) as client:
            resp = client.request("judge", "s:0-12",
                                  {"text": "A dog. The scene changes to a farm."})
            assert resp["result"]["st"] is True

    def test_missing_file_is_request_error(self):
        with ProtocolClient(SIDECAR_SERVE) as client:
            resp = client.request("aesthetic", "s:0-12",
                                  {"fser": "/nonexistent.fser", "start": 0, "end": 2})
            assert "error" in resp

    def test_malformed_line_gets_error_response(self):
        with ProtocolClient(SIDECAR_SERVE) as client:
            client.proc.stdin.write("this is not json\n")
            client.proc.stdin.flush()
            resp = json.loads(client.proc.stdout.readline())
            assert "error" in resp

    def test_deterministic_across_processes(self, sample_fser):
        payload = {"fser": str(sample_fser), "start": 0, "end": 12}
        outs = []
        for _ in range(2):
            with ProtocolClient(SIDECAR_SERVE) as client:
                outs.append(json.dumps([
                    client.request("aesthetic", "s:0-12", payload)["result"],
                    client.request("embed_frame", "s:0-12#first",
                                   {"fser": str(sample_fser), "frame": 0})["result"],
                    client.request("caption", "s:0-12", payload)["result"],
                ]))
        assert outs[0] == outs[1]


class TestEngineConformance:
    def test_passes_scorer_check(self):
        proc = subprocess.run(
            ENGINE_CLI + ["scorer-check", "--cmd", " ".join(SIDECAR_SERVE)],
            capture_output=True, text=True, timeout=120,
        )
        assert proc.returncode == 0, proc.stdout + proc.stderr
        assert "[FAIL]" not in proc.stdout
        assert "[PASS] handshake" in proc.stdout
