"""Canonical-embedding encoder for real vectors with sparse slot packing.

With ``n`` slots in a ring of dimension N the message lives in the subring
generated by Y = X^(N/2n). Slot j is the value of the Y-polynomial at
omega^(5^j), omega a primitive 4n-th root of unity, so the Galois map
X -> X^(5^k) rotates the slots left by k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from hesim.ckks.context import CkksContext
from hesim.polyring import RingPoly, from_signed, ntt_forward, to_coeff

_INT_LIMIT = 2.0**62


@dataclass(frozen=True, eq=False)
class CkksPlaintext:
    poly: RingPoly
    scale: float
    level: int
    logical_len: int
    context: CkksContext | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("plaintext scale must be positive")


@lru_cache(maxsize=64)
def slot_exponents(slots: int) -> np.ndarray:
    """5^j mod 4n for j < n."""
    m = 4 * slots
    out = np.empty(slots, dtype=np.int64)
    e = 1
    for j in range(slots):
        out[j] = e
        e = e * 5 % m
    return out


def embed_inverse(values: np.ndarray, slots: int) -> np.ndarray:
    """Real coefficients (length 2n) of the Y-polynomial taking ``values`` at the slots."""
    w = np.zeros(4 * slots, dtype=np.complex128)
    w[slot_exponents(slots)] = values
    return np.fft.fft(w)[: 2 * slots].real / slots


def embed(coeffs: np.ndarray, slots: int) -> np.ndarray:
    """Evaluate a length-2n real coefficient vector at the slot roots."""
    pad = np.zeros(4 * slots, dtype=np.complex128)
    pad[: 2 * slots] = coeffs
    return (np.fft.ifft(pad) * (4 * slots))[slot_exponents(slots)].real


def encode(values, context: CkksContext, level: int | None = None,
           scale: float | None = None) -> CkksPlaintext:
    """Scale, round and reduce a real vector into an evaluation-domain plaintext."""
    v = np.asarray(values, dtype=np.float64).ravel()
    n = context.batch_size
    if v.size > n:
        raise ValueError(f"{v.size} values exceed the batch size {n}")
    if not np.all(np.isfinite(v)):
        raise ValueError("cannot encode non-finite values")
    level = context.l_max if level is None else level
    scale = context.scale_at(level) if scale is None else float(scale)
    slots = np.zeros(n)
    slots[: v.size] = v
    y = embed_inverse(slots, n) * scale
    if np.abs(y).max(initial=0.0) >= _INT_LIMIT:
        raise OverflowError("encoded coefficients exceed the 62-bit range; lower the scale")
    coeffs = np.zeros(context.ring_dim, dtype=np.int64)
    coeffs[:: context.ring_dim // (2 * n)] = np.rint(y).astype(np.int64)
    poly = ntt_forward(from_signed(coeffs, context.basis(level)))
    return CkksPlaintext(poly, scale, level, v.size, context)


def decode(pt: CkksPlaintext, context: CkksContext, full: bool = False) -> np.ndarray:
    """Recover the real slot values. Reads the decryption modulus q_0 only, so the
    scaled message must stay below q_0/2 in magnitude."""
    n = context.batch_size
    p = to_coeff(pt.poly)
    signed = p.centered(0)[:: context.ring_dim // (2 * n)].astype(np.float64)
    vals = embed(signed, n) / pt.scale
    return vals if full else vals[: pt.logical_len]
