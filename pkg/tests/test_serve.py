"""End-to-end smoke test of the `serve` subcommand over real HTTP."""

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


@pytest.fixture
def server(tmp_path):
    port = _free_port()
    process = subprocess.Popen(
        [
            sys.executable, "-m", "adlkit.cli", "serve",
            "--store", str(tmp_path / "annotations.sqlite"),
            "--bind", "127.0.0.1", "--port", str(port),
            "--session-secret", "smoke-secret",
        ],
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
    )
    base = f"http://127.0.0.1:{port}"
    try:
        for _ in range(100):
            try:
                if httpx.get(f"{base}/healthz", timeout=1).status_code == 200:
                    break
            except httpx.TransportError:
                time.sleep(0.1)
        else:
            raise RuntimeError("server did not become ready")
        yield base
    finally:
        process.terminate()
        process.wait(timeout=10)


def test_serve_taxonomy_and_annotation_flow(server):
    health = httpx.get(f"{server}/healthz").json()
    assert health == {"status": "ready"}

    taxonomy = httpx.get(f"{server}/taxonomy").json()
    assert len(taxonomy) == 21

    token = httpx.post(
        f"{server}/sessions",
        json={"user_id": "alice"},
        headers={"X-Service-Secret": "smoke-secret"},
    ).json()["token"]
    auth = {"Authorization": f"Bearer {token}"}
    created = httpx.post(
        f"{server}/collections/alice/images",
        json=[{"image_id": "a-1", "timestamp": "2015-03-02T10:00:00+00:00"}],
        headers=auth,
    )
    assert created.status_code == 201
    labeled = httpx.put(
        f"{server}/images/a-1/label", json={"label": "Working"}, headers=auth
    )
    assert labeled.json()["label"] == "Working"


def test_serve_missing_data_dir_fails_fast(tmp_path):
    result = subprocess.run(
        [
            sys.executable, "-m", "adlkit.cli", "serve",
            "--store", str(tmp_path / "no-such-dir" / "annotations.sqlite"),
            "--session-secret", "x",
        ],
        capture_output=True,
        text=True,
        timeout=30,
    )
    assert result.returncode == 1
    assert "no-such-dir" in result.stderr
