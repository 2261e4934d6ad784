"""Versioned little-endian binary format for contexts, keys, plaintexts and ciphertexts.

Layout: b"HSIM", u16 version, u8 kind, then the kind's payload. Every object
carries its context so it can be read back on its own. Polynomials are written
as u8 domain, u16 limb count, then per limb its u64 modulus followed by the n
u64 residues, limbs in level order.
"""

from __future__ import annotations

import io
import math
import struct

import numpy as np

from hesim.ckks.ciphertext import CkksCiphertext
from hesim.ckks.context import CkksContext
from hesim.ckks.encoding import CkksPlaintext
from hesim.ckks.keys import PublicKey, RelinKey, RotKeySet, SecretKey, SwitchKey
from hesim.polyring import COEFF, EVAL, RingPoly, basis_of

MAGIC = b"HSIM"
VERSION = 1

_KINDS = {CkksContext: 1, SecretKey: 2, PublicKey: 3, RelinKey: 4, RotKeySet: 5,
          CkksPlaintext: 6, CkksCiphertext: 7}
_DOMAINS = {COEFF: 0, EVAL: 1}


class FormatError(ValueError):
    """Input bytes are not a valid serialized object."""


class _W:
    def __init__(self):
        self.buf = io.BytesIO()

    def pack(self, fmt, *vals):
        self.buf.write(struct.pack("<" + fmt, *vals))


class _R:
    def __init__(self, data: bytes):
        self.buf = io.BytesIO(data)

    def unpack(self, fmt):
        fmt = "<" + fmt
        raw = self.buf.read(struct.calcsize(fmt))
        if len(raw) != struct.calcsize(fmt):
            raise FormatError("truncated input")
        return struct.unpack(fmt, raw)

    def array(self, count: int) -> np.ndarray:
        raw = self.buf.read(8 * count)
        if len(raw) != 8 * count:
            raise FormatError("truncated input")
        return np.frombuffer(raw, dtype="<u8").astype(np.uint64)


def _put_context(w: _W, c: CkksContext):
    hw = -1 if c.hamming_weight is None else c.hamming_weight
    w.pack("IHHIHHdiHH?", c.ring_dim, c.l_max, c.l_refresh, c.batch_size, c.scale_bits,
           c.first_bits, c.sigma, hw, c.key_digit_primes, c.special_bits,
           c.insecure_simulated_bootstrap)


def _get_context(r: _R) -> CkksContext:
    n, l_max, l_ref, batch, sb, fb, sigma, hw, kdp, spb, boot = r.unpack("IHHIHHdiHH?")
    return CkksContext(ring_dim=n, l_max=l_max, l_refresh=l_ref, batch_size=batch, scale_bits=sb,
                       first_bits=fb, sigma=sigma, hamming_weight=None if hw < 0 else hw,
                       key_digit_primes=kdp, special_bits=spb, insecure_simulated_bootstrap=boot)


def _put_poly(w: _W, p: RingPoly):
    w.pack("BH", _DOMAINS[p.domain], len(p.basis))
    for q, row in zip(p.basis.moduli, p.data):
        w.pack("Q", q)
        w.buf.write(row.astype("<u8").tobytes())


def _get_poly(r: _R, ctx: CkksContext) -> RingPoly:
    dom, limbs = r.unpack("BH")
    by_q = {p.q: p for p in ctx.ext_basis.primes}
    primes, rows = [], []
    for _ in range(limbs):
        (q,) = r.unpack("Q")
        if q not in by_q:
            raise FormatError(f"modulus {q} is not part of the context chain")
        primes.append(by_q[q])
        rows.append(r.array(ctx.ring_dim))
    domain = {v: k for k, v in _DOMAINS.items()}[dom]
    return RingPoly(np.stack(rows), basis_of(tuple(primes)), domain)


def _put_switch(w: _W, k: SwitchKey):
    w.pack("H", len(k.b))
    for b, a in zip(k.b, k.a):
        _put_poly(w, b)
        _put_poly(w, a)


def _get_switch(r: _R, ctx) -> SwitchKey:
    (m,) = r.unpack("H")
    pairs = [(_get_poly(r, ctx), _get_poly(r, ctx)) for _ in range(m)]
    return SwitchKey(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))


def dumps(obj) -> bytes:
    kind = _KINDS.get(type(obj))
    if kind is None:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    w = _W()
    w.buf.write(MAGIC)
    w.pack("HB", VERSION, kind)
    if isinstance(obj, CkksContext):
        _put_context(w, obj)
        return w.buf.getvalue()
    ctx = obj.context
    if ctx is None:
        raise ValueError(f"{type(obj).__name__} carries no context to serialize")
    _put_context(w, ctx)
    if isinstance(obj, SecretKey):
        _put_poly(w, obj.s)
    elif isinstance(obj, PublicKey):
        _put_poly(w, obj.pk0)
        _put_poly(w, obj.pk1)
    elif isinstance(obj, RelinKey):
        _put_switch(w, obj.key)
    elif isinstance(obj, RotKeySet):
        w.pack("H", len(obj.keys))
        for g in sorted(obj.keys):
            w.pack("I", g)
            _put_switch(w, obj.keys[g])
    elif isinstance(obj, CkksPlaintext):
        w.pack("dHI", obj.scale, obj.level, obj.logical_len)
        _put_poly(w, obj.poly)
    else:
        hint = math.nan if obj.noise_budget_hint is None else obj.noise_budget_hint
        w.pack("dHId", obj.scale, obj.level, obj.logical_len, hint)
        _put_poly(w, obj.c0)
        _put_poly(w, obj.c1)
    return w.buf.getvalue()


def loads(data: bytes):
    r = _R(bytes(data))
    if r.buf.read(4) != MAGIC:
        raise FormatError("missing HSIM magic")
    version, kind = r.unpack("HB")
    if version != VERSION:
        raise FormatError(f"unsupported format version {version}")
    ctx = _get_context(r)
    if kind == 1:
        return ctx
    if kind == 2:
        return SecretKey(_get_poly(r, ctx), ctx)
    if kind == 3:
        return PublicKey(_get_poly(r, ctx), _get_poly(r, ctx), ctx)
    if kind == 4:
        return RelinKey(_get_switch(r, ctx), ctx)
    if kind == 5:
        (count,) = r.unpack("H")
        keys = {}
        for _ in range(count):
            (g,) = r.unpack("I")
            keys[g] = _get_switch(r, ctx)
        return RotKeySet(keys, ctx)
    if kind == 6:
        scale, level, n = r.unpack("dHI")
        return CkksPlaintext(_get_poly(r, ctx), scale, level, n, ctx)
    if kind == 7:
        scale, level, n, hint = r.unpack("dHId")
        c0, c1 = _get_poly(r, ctx), _get_poly(r, ctx)
        return CkksCiphertext(c0, c1, scale, level, n, ctx, None if math.isnan(hint) else hint)
    raise FormatError(f"unknown object kind {kind}")
