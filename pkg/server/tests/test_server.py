"""Serving from a trained checkpoint, and the analytic backend math."""

import json
import socket
import struct
import threading

import numpy as np
import pytest
import torch

from ddugm_server.ddt import write_tensor
from ddugm_server.protocol import encode_message, read_exact
from ddugm_server.server import AnalyticBackend, CheckpointBackend, ScoreServer
from ddugm_server.train import TrainConfig, train


def test_analytic_backend_matches_closed_form():
    backend = AnalyticBackend(0.25, 0.5)
    rng = np.random.default_rng(0)
    planes = rng.standard_normal((2, 6, 6)).astype(np.float32)
    out = backend.score(planes, sigma=0.8)
    x = planes[0].astype(np.float64) + 1j * planes[1].astype(np.float64)
    expected = (0.25 - x) / (0.5**2 + 0.8**2)
    np.testing.assert_allclose(out[0] + 1j * out[1], expected, atol=1e-6)
    assert out.dtype == np.dtype("<f4")


@pytest.fixture
def checkpoint_path(tmp_path):
    rng = np.random.default_rng(3)
    frames = 0.5 + 0.2 * (rng.standard_normal((8, 16, 16)) + 1j * rng.standard_normal((8, 16, 16)))
    data = tmp_path / "frames.ddt"
    write_tensor(data, frames.astype(np.complex64))
    cfg = TrainConfig(
        domain="image",
        sigma_min=0.05,
        sigma_max=2.0,
        recon_sigma_max=1.0,
        epochs=1,
        batch_size=4,
        dataset=[str(data)],
        seed=0,
        model_width=8,
    )
    path = tmp_path / "model.pt"
    train(cfg, path)
    return path


def test_checkpoint_backend_serves_finite_scores(checkpoint_path):
    backend = CheckpointBackend(checkpoint_path)
    assert backend.domain == "image"
    server = ScoreServer(("127.0.0.1", 0), backend, backend.domain)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    try:
        payload = np.random.default_rng(1).standard_normal(2 * 16 * 16).astype("<f4").tobytes()
        header = {"op": "score", "domain": "image", "sigma": 0.5, "shape": [2, 16, 16], "dtype": "f32"}
        with socket.create_connection(server.server_address) as sock:
            sock.sendall(encode_message(header, payload))
            (hlen,) = struct.unpack("<Q", read_exact(sock, 8))
            reply = json.loads(read_exact(sock, hlen).decode("utf-8"))
            (plen,) = struct.unpack("<Q", read_exact(sock, 8))
            body = read_exact(sock, plen)
        assert reply == {"status": "ok", "shape": [2, 16, 16]}
        planes = np.frombuffer(body, dtype="<f4").reshape(2, 16, 16)
        assert np.isfinite(planes).all()
        assert np.abs(planes).max() > 0
    finally:
        server.shutdown()
        server.server_close()


def test_checkpoint_backend_agrees_with_direct_model_call(checkpoint_path):
    backend = CheckpointBackend(checkpoint_path)
    rng = np.random.default_rng(5)
    planes = rng.standard_normal((2, 16, 16)).astype(np.float32)
    served = backend.score(planes, 0.7)
    with torch.no_grad():
        direct = backend.model(torch.from_numpy(planes)[None], torch.tensor([0.7]))[0].numpy()
    np.testing.assert_allclose(served, direct.astype("<f4"), atol=0)
