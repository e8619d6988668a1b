"""Score providers: the pluggable oracles for grad-log-density estimates.

A score provider is a callable ``provider(x, sigma) -> ndarray`` taking one
complex (H, W) frame perturbed at noise level ``sigma`` and returning the
estimated score of the perturbed distribution, same shape, finite.

Three backings are provided:

* :class:`ZeroScore` - the trivial all-zeros oracle.
* :class:`GaussianScore` - the exact score of a Gaussian prior N(mean,
  tau^2 I) convolved with N(0, sigma^2 I): ``(mean - x) / (tau^2 + sigma^2)``.
* :class:`RemoteScore` - a served network reached over the score wire
  protocol below.

Score wire protocol (TCP or any stream socket)
----------------------------------------------
Both requests and responses are framed as::

    u64-LE header-length || UTF-8 JSON header || u64-LE payload-bytes || payload

A score request header is ``{"op": "score", "domain": "image"|"kspace",
"sigma": <float>, "shape": [2, H, W], "dtype": "f32"}`` and its payload is
the frame as row-major little-endian float32, channel first: the full real
plane followed by the full imaginary plane. The response header is
``{"status": "ok", "shape": [2, H, W]}`` with a payload in the same layout,
or ``{"status": "error", "message": ...}`` with an empty payload.
``{"op": "ping"}`` answers ``{"status": "ok"}`` with no payload.

One request may be in flight per connection; the engine is sequential so a
single provider holds a single connection.
"""

from __future__ import annotations

import json
import socket
import struct

import numpy as np

from .tensors import require_finite


class ScoreTransportError(RuntimeError):
    """The remote provider was unreachable or the connection broke."""


class ScoreProtocolError(RuntimeError):
    """The remote provider replied, but with a malformed or mismatched message."""


class ZeroScore:
    """Score oracle that always returns zeros (pure-noise prior)."""

    def __call__(self, x: np.ndarray, sigma: float) -> np.ndarray:
        return np.zeros_like(np.asarray(x, dtype=np.complex128))


class GaussianScore:
    """Analytic score of a Gaussian prior under Gaussian perturbation.

    ``mean`` may be a scalar or an (H, W) frame; ``tau`` is the per-component
    prior standard deviation. The perturbed density stays Gaussian, so the
    score is exactly ``(mean - x) / (tau^2 + sigma^2)`` elementwise.
    """

    def __init__(self, mean, tau: float):
        if tau < 0:
            raise ValueError(f"tau must be >= 0, got {tau}")
        self.mean = np.asarray(mean, dtype=np.complex128) if np.ndim(mean) else complex(mean)
        self.tau = float(tau)

    def __call__(self, x: np.ndarray, sigma: float) -> np.ndarray:
        if sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {sigma}")
        x = np.asarray(x, dtype=np.complex128)
        return (self.mean - x) / (self.tau**2 + sigma**2)


def fit_gaussian_score(frames: np.ndarray) -> GaussianScore:
    """Fit a :class:`GaussianScore` to an ensemble of complex frames.

    ``frames`` is (N, H, W); the fitted mean is the per-pixel ensemble mean
    and tau^2 is the pooled per-component residual variance (real and
    imaginary parts counted as separate components).
    """
    frames = np.asarray(frames, dtype=np.complex128)
    if frames.ndim != 3:
        raise ValueError(f"expected (N, H, W) frames, got shape {frames.shape}")
    mean = frames.mean(axis=0)
    residual = frames - mean
    tau_sq = 0.5 * float(np.mean(np.abs(residual) ** 2))
    return GaussianScore(mean, np.sqrt(tau_sq))


def pack_message(header: dict, payload: bytes = b"") -> bytes:
    """Frame one protocol message: length-prefixed header and payload."""
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return struct.pack("<Q", len(head)) + head + struct.pack("<Q", len(payload)) + payload


def frame_to_payload(x: np.ndarray) -> bytes:
    """Complex frame -> little-endian float32 bytes, real plane then imaginary."""
    x = np.asarray(x, dtype=np.complex128)
    planes = np.stack([x.real, x.imag]).astype("<f4")
    return planes.tobytes(order="C")


def payload_to_frame(payload: bytes, shape: tuple[int, int]) -> np.ndarray:
    """Inverse of :func:`frame_to_payload` for an (H, W) frame."""
    h, w = shape
    expected = 2 * h * w * 4
    if len(payload) != expected:
        raise ScoreProtocolError(f"payload is {len(payload)} bytes, expected {expected} for shape (2, {h}, {w})")
    planes = np.frombuffer(payload, dtype="<f4").reshape(2, h, w)
    return planes[0].astype(np.float64) + 1j * planes[1].astype(np.float64)


def _read_exact(sock: socket.socket, n: int) -> bytes:
    chunks = []
    remaining = n
    while remaining > 0:
        chunk = sock.recv(min(remaining, 1 << 20))
        if not chunk:
            raise ScoreTransportError(f"connection closed mid-message ({remaining} of {n} bytes missing)")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def read_message(sock: socket.socket, max_bytes: int = 1 << 30) -> tuple[dict, bytes]:
    """Read one framed message; raises on transport failure or bad framing."""
    (header_len,) = struct.unpack("<Q", _read_exact(sock, 8))
    if header_len > max_bytes:
        raise ScoreProtocolError(f"header length {header_len} exceeds limit")
    try:
        header = json.loads(_read_exact(sock, header_len).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ScoreProtocolError(f"undecodable message header: {exc}") from exc
    (payload_len,) = struct.unpack("<Q", _read_exact(sock, 8))
    if payload_len > max_bytes:
        raise ScoreProtocolError(f"payload length {payload_len} exceeds limit")
    payload = _read_exact(sock, payload_len)
    return header, payload


class RemoteScore:
    """Score provider backed by a server speaking the wire protocol.

    ``endpoint`` is ``host:port`` or ``tcp://host:port``. The connection is
    opened lazily, reused across calls, and closed by :meth:`close` (the
    class also works as a context manager). Not thread-safe: one in-flight
    request per connection is the protocol contract.
    """

    def __init__(self, endpoint: str, domain: str, timeout: float = 30.0):
        if domain not in ("image", "kspace"):
            raise ValueError(f"domain must be 'image' or 'kspace', got {domain!r}")
        self.host, self.port = _parse_endpoint(endpoint)
        self.domain = domain
        self.timeout = timeout
        self._sock: socket.socket | None = None

    def _connect(self) -> socket.socket:
        if self._sock is None:
            try:
                self._sock = socket.create_connection((self.host, self.port), timeout=self.timeout)
            except OSError as exc:
                raise ScoreTransportError(f"cannot reach score server at {self.host}:{self.port}: {exc}") from exc
        return self._sock

    def _roundtrip(self, header: dict, payload: bytes = b"") -> tuple[dict, bytes]:
        sock = self._connect()
        try:
            sock.sendall(pack_message(header, payload))
            return read_message(sock)
        except OSError as exc:
            self.close()
            raise ScoreTransportError(f"score server connection failed: {exc}") from exc

    def ping(self) -> None:
        reply, _ = self._roundtrip({"op": "ping"})
        if reply.get("status") != "ok":
            raise ScoreProtocolError(f"ping rejected: {reply}")

    def __call__(self, x: np.ndarray, sigma: float) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128)
        if x.ndim != 2:
            raise ValueError(f"remote provider scores one (H, W) frame at a time, got shape {x.shape}")
        h, w = x.shape
        header = {
            "op": "score",
            "domain": self.domain,
            "sigma": float(sigma),
            "shape": [2, h, w],
            "dtype": "f32",
        }
        reply, payload = self._roundtrip(header, frame_to_payload(x))
        if reply.get("status") != "ok":
            raise ScoreProtocolError(f"score request failed: {reply.get('message', reply)}")
        if reply.get("shape") != [2, h, w]:
            raise ScoreProtocolError(f"server returned shape {reply.get('shape')}, expected [2, {h}, {w}]")
        out = payload_to_frame(payload, (h, w))
        require_finite(out, "remote score output")
        return out

    def close(self) -> None:
        if self._sock is not None:
            try:
                self._sock.close()
            finally:
                self._sock = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _parse_endpoint(endpoint: str) -> tuple[str, int]:
    text = endpoint.removeprefix("tcp://")
    host, sep, port = text.rpartition(":")
    if not sep or not host:
        raise ValueError(f"endpoint {endpoint!r} is not host:port")
    return host, int(port)
