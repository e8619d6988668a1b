"""Socket server answering score requests over the wire protocol.

Two backends: ``analytic`` computes the exact Gaussian-prior score
(mean - x) / (tau^2 + sigma^2) and exists for protocol conformance checks;
``checkpoint`` runs a trained score network. Connections are handled
concurrently; requests within one connection are answered strictly in
order. Malformed content gets an error reply on the same connection;
unrecoverable framing corruption closes it.
"""

from __future__ import annotations

import socketserver
import threading

import numpy as np
import torch

from .protocol import MAX_PAYLOAD_BYTES, MAX_SIDE, FramingError, encode_message, read_message


class AnalyticBackend:
    """Exact score of N(mean, tau^2 I) seen through Gaussian perturbation."""

    def __init__(self, mean: float, tau: float):
        self.mean = float(mean)
        self.tau = float(tau)

    def score(self, planes: np.ndarray, sigma: float) -> np.ndarray:
        x = planes[0].astype(np.float64) + 1j * planes[1].astype(np.float64)
        s = (self.mean - x) / (self.tau**2 + sigma**2)
        return np.stack([s.real, s.imag]).astype("<f4")


class CheckpointBackend:
    """Score network restored from a training checkpoint."""

    def __init__(self, checkpoint_path):
        from .train import load_model

        self.model, self.checkpoint = load_model(checkpoint_path)
        self.domain = self.checkpoint["config"]["domain"]
        self._lock = threading.Lock()

    def score(self, planes: np.ndarray, sigma: float) -> np.ndarray:
        x = torch.from_numpy(planes.astype(np.float32))[None]
        sig = torch.tensor([float(sigma)], dtype=torch.float32)
        with self._lock, torch.no_grad():
            out = self.model(x, sig)[0]
        return out.numpy().astype("<f4")


class ScoreServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address, backend, domain: str):
        self.backend = backend
        self.domain = domain
        super().__init__(address, _Handler)

    @property
    def endpoint(self) -> str:
        host, port = self.server_address[:2]
        return f"{host}:{port}"


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        while True:
            try:
                message = read_message(self.request)
            except FramingError as exc:
                # framing is unrecoverable: reply once, then drop the stream
                self._send({"status": "error", "message": str(exc)})
                return
            except ConnectionError:
                return
            if message is None:
                return
            header, payload = message
            try:
                reply, out_payload = self._dispatch(header, payload)
            except Exception as exc:  # defensive: a bad request must not kill the server
                reply, out_payload = {"status": "error", "message": f"internal error: {exc}"}, b""
            try:
                self._send(reply, out_payload)
            except ConnectionError:
                return

    def _send(self, header: dict, payload: bytes = b"") -> None:
        self.request.sendall(encode_message(header, payload))

    def _dispatch(self, header: dict, payload: bytes) -> tuple[dict, bytes]:
        op = header.get("op")
        if op == "ping":
            return {"status": "ok"}, b""
        if op != "score":
            return {"status": "error", "message": f"unknown op {op!r}"}, b""

        domain = header.get("domain")
        if domain != self.server.domain:
            return {"status": "error", "message": f"server scores {self.server.domain!r}, not {domain!r}"}, b""
        if header.get("dtype") != "f32":
            return {"status": "error", "message": f"unsupported dtype {header.get('dtype')!r}"}, b""
        shape = header.get("shape")
        if not (isinstance(shape, list) and len(shape) == 3 and shape[0] == 2):
            return {"status": "error", "message": f"shape must be [2, H, W], got {shape!r}"}, b""
        two, h, w = shape
        if not (isinstance(h, int) and isinstance(w, int) and 1 <= h <= MAX_SIDE and 1 <= w <= MAX_SIDE):
            return {"status": "error", "message": f"shape {shape!r} out of bounds (max side {MAX_SIDE})"}, b""
        expected_bytes = 2 * h * w * 4
        if expected_bytes > MAX_PAYLOAD_BYTES or len(payload) != expected_bytes:
            return {"status": "error", "message": f"payload is {len(payload)} bytes, expected {expected_bytes}"}, b""
        sigma = header.get("sigma")
        if not isinstance(sigma, (int, float)) or sigma <= 0:
            return {"status": "error", "message": f"sigma must be a positive number, got {sigma!r}"}, b""

        planes = np.frombuffer(payload, dtype="<f4").reshape(2, h, w)
        out = self.server.backend.score(planes, float(sigma))
        if not np.isfinite(out).all():
            return {"status": "error", "message": "backend produced non-finite scores"}, b""
        return {"status": "ok", "shape": [2, h, w]}, out.tobytes(order="C")


def serve_forever(backend, domain: str, host: str = "127.0.0.1", port: int = 7761) -> None:
    with ScoreServer((host, port), backend, domain) as server:
        print(f"score server ({domain}) listening on {server.endpoint}")
        server.serve_forever()
