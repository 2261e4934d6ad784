"""Key generation and hybrid RNS key switching.

Chain primes are grouped into digits of ``key_digit_primes`` consecutive primes;
the special primes (product P) extend the basis during the switch. A switching
key for a target secret s' holds, per digit j, an RLWE sample over Q_lmax * P

    b_j = -a_j s + e_j + P * g_j * s',   g_j = 1 mod primes of digit j, 0 otherwise.

Switching d from s' to s lifts each digit of d to the extended basis, takes the
inner product with the key, and divides by P.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from hesim.ckks.context import CkksContext
from hesim.polyring import (
    EVAL, Basis, RingPoly, automorphism, basis_of, mul_int, ntt_forward, ntt_inverse,
    poly_mul, poly_sub, sample_error, sample_ternary, sample_uniform, zeros,
)
from hesim.polyring import _kernels as K
from hesim.polyring.poly import poly_add


class MissingKeyError(KeyError):
    """A rotation was requested without a matching switching key."""


@dataclass(frozen=True, eq=False)
class SecretKey:
    s: RingPoly  # evaluation domain over the extended basis
    context: CkksContext | None = field(default=None, repr=False)


@dataclass(frozen=True, eq=False)
class PublicKey:
    pk0: RingPoly  # evaluation domain over Q_lmax
    pk1: RingPoly
    context: CkksContext | None = field(default=None, repr=False)


@dataclass(frozen=True, eq=False)
class SwitchKey:
    b: tuple[RingPoly, ...]
    a: tuple[RingPoly, ...]


@dataclass(frozen=True, eq=False)
class RelinKey:
    key: SwitchKey
    context: CkksContext | None = field(default=None, repr=False)


@dataclass(frozen=True, eq=False)
class RotKeySet:
    """Switching keys indexed by Galois element.

    A key serves every batch size whose rotation maps to its Galois element, so
    one set can be shared by ciphertexts of different capacities.
    """

    keys: dict[int, SwitchKey] = field(default_factory=dict)
    context: CkksContext | None = field(default=None, repr=False)

    def __contains__(self, g: int) -> bool:
        return g in self.keys

    def __len__(self) -> int:
        return len(self.keys)

    def merged(self, other: "RotKeySet") -> "RotKeySet":
        return RotKeySet({**self.keys, **other.keys}, self.context or other.context)


def galois_element(ring_dim: int, k: int, batch_size: int) -> int:
    """Galois element realising a left rotation by k slots (k reduced mod batch)."""
    return pow(5, k % batch_size, 2 * ring_dim)


def _gadget_consts(ctx: CkksContext, digit: tuple[int, ...]) -> list[int]:
    P = ctx.chain.special_basis.product
    out = []
    for i, p in enumerate(ctx.ext_basis.primes):
        out.append(P % p.q if i in digit else 0)
    return out


def _switch_key(ctx: CkksContext, s_ext: RingPoly, target: RingPoly, rng) -> SwitchKey:
    ext = ctx.ext_basis
    bs, As = [], []
    for digit in ctx.digits:
        a = sample_uniform(ext, rng, EVAL)
        e = ntt_forward(sample_error(ext, ctx.sigma, rng))
        b = poly_add(poly_sub(e, poly_mul(a, s_ext)), mul_int(target, _gadget_consts(ctx, digit)))
        bs.append(b)
        As.append(a)
    return SwitchKey(tuple(bs), tuple(As))


def keygen(context: CkksContext, rng: np.random.Generator):
    """Return (SecretKey, PublicKey, RelinKey)."""
    ext = context.ext_basis
    s = ntt_forward(sample_ternary(ext, rng, context.hamming_weight))
    top = context.l_max + 1
    a = sample_uniform(context.basis(context.l_max), rng, EVAL)
    e = ntt_forward(sample_error(context.basis(context.l_max), context.sigma, rng))
    pk0 = poly_sub(e, poly_mul(a, s.keep(top)))
    sk = SecretKey(s, context)
    relin = RelinKey(_switch_key(context, s, poly_mul(s, s), rng), context)
    return sk, PublicKey(pk0, a, context), relin


def rotation_keygen(context: CkksContext, sk: SecretKey, indices, rng: np.random.Generator) -> RotKeySet:
    """One switching key per distinct Galois element among the requested slot shifts."""
    indices = list(indices)
    if not indices:
        raise ValueError("no rotation indices requested")
    keys: dict[int, SwitchKey] = {}
    for k in indices:
        g = galois_element(context.ring_dim, int(k), context.batch_size)
        if g == 1 or g in keys:
            continue
        keys[g] = _switch_key(context, sk.s, automorphism(sk.s, g), rng)
    return RotKeySet(keys, context)


@lru_cache(maxsize=1024)
def _conv_tables(src: Basis, dst: Basis):
    B = src.product
    hat_inv = [src.primes[i].to_mont(pow(B // q, -1, q)) for i, q in enumerate(src.moduli)]
    hat = [[p.to_mont((B // q) % p.q) for q in src.moduli] for p in dst.primes]
    return np.array(hat_inv, dtype=np.uint64), np.array(hat, dtype=np.uint64).reshape(len(dst), len(src))


def base_convert(x: np.ndarray, src: Basis, dst: Basis) -> np.ndarray:
    hat_inv, hat = _conv_tables(src, dst)
    return K.base_convert(np.ascontiguousarray(x), src.q, src.qinv, hat_inv, dst.q, dst.qinv, hat)


def _ntt_rows(data: np.ndarray, basis: Basis) -> np.ndarray:
    K.ntt_forward(data, basis.q, basis.qinv, basis.tw)
    return data


def mod_up(context: CkksContext, d: RingPoly) -> list[RingPoly]:
    """Split ``d`` into key-switching digits, each lifted to Q_level * P (evaluation domain).

    Digit j is exact on its own primes and a fast base conversion elsewhere.
    """
    level = d.level
    Bq = d.basis
    ext = Bq + context.chain.special_basis
    d_eval = d if d.domain == EVAL else ntt_forward(d)
    d_coeff = ntt_inverse(d_eval) if d.domain == EVAL else d
    out = []
    for digit in context.digits:
        digit = [i for i in digit if i <= level]
        if not digit:
            break
        lo, hi = digit[0], digit[-1] + 1
        others = [i for i in range(len(ext)) if not lo <= i < hi]
        dst = basis_of(tuple(ext.primes[i] for i in others))
        conv = base_convert(d_coeff.data[lo:hi], Bq[lo:hi], dst)
        _ntt_rows(conv, dst)
        lifted = np.empty((len(ext), ext.n), dtype=np.uint64)
        lifted[lo:hi] = d_eval.data[lo:hi]
        lifted[others] = conv
        out.append(RingPoly(lifted, ext, EVAL))
    return out


def switch_lifted(context: CkksContext, digits: list[RingPoly], key: SwitchKey,
                  Bq: Basis) -> tuple[RingPoly, RingPoly]:
    """Inner product of lifted digits with the key, then division by P back onto ``Bq``."""
    Bp = context.chain.special_basis
    ext = Bq + Bp
    lq, top = len(Bq), context.l_max + 1
    acc0 = zeros(ext, EVAL)
    acc1 = zeros(ext, EVAL)
    # key rows are [0, lq) and the special block at [top, top + len(Bp)): two views, no copy
    for j, lifted in enumerate(digits):
        for acc, k in ((acc0, key.b[j].data), (acc1, key.a[j].data)):
            K.mul_acc(acc.data[:lq], lifted.data[:lq], k[:lq], Bq.q, Bq.qinv, Bq.r2)
            K.mul_acc(acc.data[lq:], lifted.data[lq:], k[top:], Bp.q, Bp.qinv, Bp.r2)
    return mod_down(acc0, Bq, Bp), mod_down(acc1, Bq, Bp)


def key_switch(context: CkksContext, d: RingPoly, key: SwitchKey) -> tuple[RingPoly, RingPoly]:
    """Return (k0, k1) with k0 + k1*s ~ d*s' over the basis of ``d`` (evaluation domain)."""
    return switch_lifted(context, mod_up(context, d), key, d.basis)


def mod_down(x: RingPoly, Bq: Basis, Bp: Basis) -> RingPoly:
    """Divide an evaluation-domain element of Q*P by P (rounding), landing on Q."""
    lq = len(Bq)
    xp = x.data[lq:].copy()
    K.ntt_inverse(xp, Bp.q, Bp.qinv, Bp.itw, Bp.ninv)
    conv = base_convert(xp, Bp, Bq)
    _ntt_rows(conv, Bq)
    diff = poly_sub(RingPoly(np.ascontiguousarray(x.data[:lq]), Bq, EVAL), RingPoly(conv, Bq, EVAL))
    P = Bp.product
    return mul_int(diff, [pow(P, -1, q) for q in Bq.moduli])


def secret_at(sk: SecretKey, level: int) -> RingPoly:
    return sk.s.keep(level + 1)


__all__ = [
    "MissingKeyError", "PublicKey", "RelinKey", "RotKeySet", "SecretKey", "SwitchKey",
    "galois_element", "key_switch", "keygen", "mod_down", "mod_up", "rotation_keygen", "secret_at",
    "switch_lifted",
]
