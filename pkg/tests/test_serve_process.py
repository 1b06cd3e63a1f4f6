"""The server as a real process: startup, health, graceful SIGTERM exit."""

from __future__ import annotations

import json
import signal
import socket
import subprocess
import sys
import time

import httpx
import pytest


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@pytest.fixture()
def server(tmp_path, data_dir):
    from termmapper import ingest_vocabulary

    store_path = tmp_path / "store.jsonl"
    ingest_vocabulary(data_dir / "concepts.tsv", store_path=store_path)
    port = _free_port()
    config_path = tmp_path / "config.json"
    config_path.write_text(
        json.dumps({"store_path": str(store_path), "host": "127.0.0.1", "port": port})
    )
    proc = subprocess.Popen(
        [sys.executable, "-m", "termmapper.cli", "serve", "--config", str(config_path), "--quiet"],
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
    )
    base = f"http://127.0.0.1:{port}"
    deadline = time.monotonic() + 20.0
    last_error = None
    while time.monotonic() < deadline:
        if proc.poll() is not None:
            raise AssertionError(
                f"server exited early: {proc.stderr.read().decode(errors='replace')}"
            )
        try:
            if httpx.get(f"{base}/api/health", timeout=1.0).status_code == 200:
                break
        except httpx.HTTPError as exc:
            last_error = exc
            time.sleep(0.1)
    else:
        proc.kill()
        raise AssertionError(f"server never came up: {last_error}")
    yield proc, base
    if proc.poll() is None:
        proc.kill()
        proc.wait(timeout=10)


def test_serve_answers_health_and_pipeline(server):
    proc, base = server
    health = httpx.get(f"{base}/api/health", timeout=5.0).json()
    assert health["store_loaded"] is True
    assert health["index_loaded"] is False

    response = httpx.post(
        f"{base}/api/pipeline",
        json={"names": ["betamethasone"], "pipeline_options": {"mode": "db_search"}},
        timeout=10.0,
    )
    assert response.status_code == 200
    top = response.json()[0]["events"][0]["payload"]["CONCEPT"][0]
    assert top["concept_id"] == 920458


def test_sigterm_exits_cleanly(server):
    proc, _ = server
    proc.send_signal(signal.SIGTERM)
    assert proc.wait(timeout=15) == 0
