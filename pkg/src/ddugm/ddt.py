"""Binary tensor file format (DDT1).

Layout, all little-endian::

    magic  "DDT1"            4 bytes
    ndim   u32
    dims   ndim x u64
    dtype  u32               0 = complex64 (interleaved re, im)
                             1 = float32
                             2 = u8 boolean mask
    payload                  row-major, product(dims) elements

Round trips are bit-exact for the three storage dtypes. Wider inputs are
narrowed on write (complex128 -> complex64, float64 -> float32), so the
on-disk representation is always one of the three codes above.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"DDT1"

_DTYPE_CODES = {0: np.dtype("<c8"), 1: np.dtype("<f4"), 2: np.dtype("u1")}
_MAX_DIMS = 8


class DdtError(Exception):
    """Base class for tensor file format failures."""


class BadMagicError(DdtError):
    """The file does not start with the DDT1 magic."""


class TruncatedError(DdtError):
    """The file ended before the declared header or payload was complete."""


class UnknownDtypeError(DdtError):
    """The dtype code is not one of the three defined codes."""


def write_tensor(path, x: np.ndarray) -> None:
    """Write ``x`` to ``path`` in the DDT1 format.

    Complex arrays are stored as code 0, floats as code 1, booleans as
    code 2.
    """
    arr = np.asarray(x)
    if np.iscomplexobj(arr):
        code, arr = 0, arr.astype("<c8")
    elif arr.dtype == np.bool_:
        code, arr = 2, arr.astype("u1")
    elif np.issubdtype(arr.dtype, np.floating) or np.issubdtype(arr.dtype, np.integer):
        code, arr = 1, arr.astype("<f4")
    else:
        raise ValueError(f"unsupported array dtype {arr.dtype}")
    arr = np.ascontiguousarray(arr)
    header = MAGIC + struct.pack("<I", arr.ndim)
    header += struct.pack(f"<{arr.ndim}Q", *arr.shape)
    header += struct.pack("<I", code)
    Path(path).write_bytes(header + arr.tobytes(order="C"))


def read_tensor(path) -> np.ndarray:
    """Read a DDT1 file; returns complex64, float32, or bool ndarray.

    Raises :class:`BadMagicError`, :class:`TruncatedError`, or
    :class:`UnknownDtypeError` for the corresponding malformed inputs.
    """
    blob = Path(path).read_bytes()
    if len(blob) < 4 or blob[:4] != MAGIC:
        raise BadMagicError(f"{path}: not a DDT1 file")
    offset = 4
    ndim, offset = _unpack(blob, "<I", offset, path)
    if not 1 <= ndim <= _MAX_DIMS:
        raise DdtError(f"{path}: implausible ndim {ndim}")
    dims = []
    for _ in range(ndim):
        d, offset = _unpack(blob, "<Q", offset, path)
        dims.append(d)
    code, offset = _unpack(blob, "<I", offset, path)
    if code not in _DTYPE_CODES:
        raise UnknownDtypeError(f"{path}: unknown dtype code {code}")
    dtype = _DTYPE_CODES[code]
    count = 1
    for d in dims:
        count *= d
    payload_bytes = count * dtype.itemsize
    if len(blob) - offset < payload_bytes:
        raise TruncatedError(f"{path}: payload has {len(blob) - offset} bytes, header declares {payload_bytes}")
    if len(blob) - offset > payload_bytes:
        raise DdtError(f"{path}: {len(blob) - offset - payload_bytes} trailing bytes after payload")
    arr = np.frombuffer(blob, dtype=dtype, count=count, offset=offset).reshape(dims)
    if code == 2:
        return arr.astype(bool)
    return arr.copy()


def _unpack(blob: bytes, fmt: str, offset: int, path) -> tuple[int, int]:
    size = struct.calcsize(fmt)
    if len(blob) - offset < size:
        raise TruncatedError(f"{path}: header truncated at byte {offset}")
    (value,) = struct.unpack_from(fmt, blob, offset)
    return value, offset + size
