"""Server-side framing for the score wire protocol.

Messages are ``u64-LE header-length || UTF-8 JSON header || u64-LE
payload-bytes || payload``. Headers written by this module are canonical
JSON (sorted keys, no whitespace) so byte-level transcripts are stable.

This is an independent implementation of the protocol; it deliberately
shares no code with the reconstruction engine's client.
"""

from __future__ import annotations

import json
import struct

MAX_HEADER_BYTES = 1 << 20
MAX_PAYLOAD_BYTES = 1 << 28
MAX_SIDE = 4096


class FramingError(Exception):
    """The byte stream cannot be parsed as a protocol message."""


def encode_message(header: dict, payload: bytes = b"") -> bytes:
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return struct.pack("<Q", len(head)) + head + struct.pack("<Q", len(payload)) + payload


def read_exact(conn, n: int) -> bytes | None:
    """Read exactly n bytes; None on clean EOF at a message boundary."""
    chunks = []
    remaining = n
    while remaining > 0:
        chunk = conn.recv(min(remaining, 1 << 20))
        if not chunk:
            if remaining == n:
                return None
            raise FramingError(f"stream ended {remaining} bytes short of a full message")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def read_message(conn) -> tuple[dict, bytes] | None:
    """Read one framed message; None on clean EOF before a new message."""
    raw = read_exact(conn, 8)
    if raw is None:
        return None
    (header_len,) = struct.unpack("<Q", raw)
    if header_len > MAX_HEADER_BYTES:
        raise FramingError(f"declared header length {header_len} exceeds limit")
    header_bytes = read_exact(conn, header_len)
    if header_bytes is None:
        raise FramingError("stream ended before the message header")
    try:
        header = json.loads(header_bytes.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FramingError(f"header is not valid JSON: {exc}") from exc
    if not isinstance(header, dict):
        raise FramingError("header must be a JSON object")
    raw = read_exact(conn, 8)
    if raw is None:
        raise FramingError("stream ended before the payload length")
    (payload_len,) = struct.unpack("<Q", raw)
    if payload_len > MAX_PAYLOAD_BYTES:
        raise FramingError(f"declared payload length {payload_len} exceeds limit")
    payload = read_exact(conn, payload_len) if payload_len else b""
    if payload is None:
        raise FramingError("stream ended before the payload")
    return header, payload
