"""Secure arrays on the wire: a shape header followed by the backend payload.

Layout: b"HSAR", u16 version, u8 kind (1 vector, 2 matrix), u8 backend
(1 exact, 2 encrypted), u32 nrows, u32 ncols, u32 capacity, u16 level, then
either ``capacity`` little-endian float64 values or a serialized ciphertext.
Vectors store ncols = 1.
"""

from __future__ import annotations

import struct

import numpy as np

from hesim import ckks
from hesim.ckks import FormatError
from hesim.secure.arrays import SecureMatrix, SecureVector
from hesim.secure.backend import Backend, EncryptedBackend, ExactBackend

MAGIC = b"HSAR"
VERSION = 1
_HEAD = "<4sHBBIIIH"


def dumps_array(x) -> bytes:
    if isinstance(x, SecureMatrix):
        kind, rows, cols = 2, x.nrows, x.ncols
    elif isinstance(x, SecureVector):
        kind, rows, cols = 1, x.length, 1
    else:
        raise TypeError(f"cannot serialize {type(x).__name__}")
    enc = isinstance(x.backend, EncryptedBackend)
    head = struct.pack(_HEAD, MAGIC, VERSION, kind, 2 if enc else 1, rows, cols, x.capacity, x.level)
    if enc:
        return head + ckks.dumps(x.payload)
    return head + np.asarray(x.payload, dtype="<f8").tobytes()


def loads_array(data: bytes, backend: Backend):
    """Rebuild an array onto ``backend``, which must be of the kind that wrote it."""
    size = struct.calcsize(_HEAD)
    if len(data) < size:
        raise FormatError("truncated input")
    magic, version, kind, bk, rows, cols, cap, level = struct.unpack(_HEAD, data[:size])
    if magic != MAGIC or version != VERSION or kind not in (1, 2) or bk not in (1, 2):
        raise FormatError("not a serialized secure array")
    body = data[size:]
    if bk == 2:
        if not isinstance(backend, EncryptedBackend):
            raise ValueError("encrypted array needs an encrypted backend")
        payload = ckks.loads(body)
        if not isinstance(payload, ckks.CkksCiphertext):
            raise FormatError("payload is not a ciphertext")
        if payload.context != backend.context_for(cap) or payload.level != level:
            raise ValueError("ciphertext parameters do not match the backend")
    else:
        if not isinstance(backend, ExactBackend):
            raise ValueError("plain array needs an exact backend")
        if len(body) != 8 * cap:
            raise FormatError("payload length does not match capacity")
        payload = np.frombuffer(body, dtype="<f8").astype(np.float64)
    if kind == 1:
        return SecureVector(payload, rows, cap, level, backend)
    return SecureMatrix(payload, rows, cols, cap, level, backend)
