"""Minimal DDT1 tensor file reader/writer.

The on-disk format (all little-endian): magic ``DDT1``, u32 ndim, ndim u64
dims, u32 dtype code (0 complex64, 1 float32, 2 u8 bool), then the
row-major payload. Independent implementation of the shared file format.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"DDT1"
_CODES = {0: np.dtype("<c8"), 1: np.dtype("<f4"), 2: np.dtype("u1")}


class DdtFileError(Exception):
    pass


def read_tensor(path) -> np.ndarray:
    blob = Path(path).read_bytes()
    if blob[:4] != MAGIC:
        raise DdtFileError(f"{path}: missing DDT1 magic")
    offset = 4
    (ndim,) = struct.unpack_from("<I", blob, offset)
    offset += 4
    if not 1 <= ndim <= 8:
        raise DdtFileError(f"{path}: implausible ndim {ndim}")
    dims = struct.unpack_from(f"<{ndim}Q", blob, offset)
    offset += 8 * ndim
    (code,) = struct.unpack_from("<I", blob, offset)
    offset += 4
    if code not in _CODES:
        raise DdtFileError(f"{path}: unknown dtype code {code}")
    dtype = _CODES[code]
    count = int(np.prod(dims, dtype=np.uint64))
    if len(blob) - offset != count * dtype.itemsize:
        raise DdtFileError(f"{path}: payload size mismatch")
    arr = np.frombuffer(blob, dtype=dtype, count=count, offset=offset).reshape(dims)
    return arr.astype(bool) if code == 2 else arr.copy()


def write_tensor(path, x: np.ndarray) -> None:
    arr = np.asarray(x)
    if np.iscomplexobj(arr):
        code, arr = 0, arr.astype("<c8")
    elif arr.dtype == np.bool_:
        code, arr = 2, arr.astype("u1")
    else:
        code, arr = 1, arr.astype("<f4")
    arr = np.ascontiguousarray(arr)
    header = MAGIC + struct.pack("<I", arr.ndim) + struct.pack(f"<{arr.ndim}Q", *arr.shape) + struct.pack("<I", code)
    Path(path).write_bytes(header + arr.tobytes(order="C"))
