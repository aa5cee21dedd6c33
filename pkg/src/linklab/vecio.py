"""Binary complex-vector files used for golden fixtures.

Layout (little-endian)::

    bytes 0..7   magic  b"LLCVEC01"
    bytes 8..15  uint64 element count
    then         count pairs of float64 (re, im)
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"LLCVEC01"
_HEADER = struct.Struct("<8sQ")


def write_vector(path, values) -> None:
    arr = np.asarray(values, dtype=np.complex128).reshape(-1)
    payload = arr.astype("<c16").tobytes()
    Path(path).write_bytes(_HEADER.pack(MAGIC, arr.size) + payload)


def read_vector(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: file shorter than header")
    magic, n = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    body = raw[_HEADER.size:]
    if len(body) != 16 * n:
        raise ValueError(f"{path}: header says {n} elements, body holds {len(body) / 16:g}")
    return np.frombuffer(body, dtype="<c16").astype(np.complex128)
