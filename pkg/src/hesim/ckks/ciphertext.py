"""Ciphertexts and homomorphic operations.

Every ciphertext at level l normally carries the scale ``context.scale_at(l)``.
Multiplications rescale immediately, and plaintext factors are encoded at the
scale that makes the product land back on the schedule, so additions rarely
need alignment. When they do, the higher operand is lowered with an exact
integer correction before the rescale.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from hesim.ckks.context import CkksContext, LevelExhaustedError
from hesim.ckks.encoding import CkksPlaintext, decode, encode
from hesim.ckks.keys import (
    MissingKeyError, PublicKey, RelinKey, RotKeySet, SecretKey, galois_element, key_switch, mod_up,
    switch_lifted,
)
from hesim.polyring import (
    RingPoly, add_int, automorphism, drop_last_limb, mul_int, ntt_forward, poly_add,
    poly_mul, poly_neg, poly_sub, sample_error, sample_ternary,
)

_SNAP = 1e-12


class ContextMismatchError(ValueError):
    """Operands were produced under different parameter sets."""


@dataclass(frozen=True, eq=False)
class CkksCiphertext:
    c0: RingPoly
    c1: RingPoly
    scale: float
    level: int
    logical_len: int
    context: CkksContext = field(repr=False)
    noise_budget_hint: float | None = None

    def __post_init__(self):
        if self.c0.level != self.level or self.c1.level != self.level:
            raise ValueError("ciphertext polynomials must sit at the ciphertext level")


def level_of(ct: CkksCiphertext) -> int:
    return ct.level


def _snap(scale: float, target: float) -> float:
    return target if abs(scale - target) <= _SNAP * target else scale


def _budget_bits(ctx: CkksContext, level: int, scale: float) -> float:
    # bits of headroom between the scaled message and q_0 / 2
    return float(np.log2(ctx.chain.moduli[0] / 2.0) - np.log2(scale))


def _make(ctx, c0, c1, scale, level, logical_len) -> CkksCiphertext:
    return CkksCiphertext(c0, c1, scale, level, logical_len, ctx, _budget_bits(ctx, level, scale))


# -- encryption -------------------------------------------------------------

def encrypt(pt: CkksPlaintext, pk: PublicKey, context: CkksContext,
            rng: np.random.Generator) -> CkksCiphertext:
    if pt.level > context.l_max:
        raise ValueError("plaintext level exceeds l_max")
    limbs = pt.level + 1
    basis = context.basis(pt.level)
    u = ntt_forward(sample_ternary(basis, rng))
    e1 = ntt_forward(sample_error(basis, context.sigma, rng))
    e2 = ntt_forward(sample_error(basis, context.sigma, rng))
    c0 = poly_add(poly_add(poly_mul(pk.pk0.keep(limbs), u), e1), pt.poly)
    c1 = poly_add(poly_mul(pk.pk1.keep(limbs), u), e2)
    return _make(context, c0, c1, pt.scale, pt.level, pt.logical_len)


def decrypt(ct: CkksCiphertext, sk: SecretKey) -> CkksPlaintext:
    s = sk.s.keep(ct.level + 1)
    m = poly_add(ct.c0, poly_mul(ct.c1, s))
    return CkksPlaintext(m, ct.scale, ct.level, ct.logical_len, ct.context)


def encrypt_values(values, pk: PublicKey, context: CkksContext, rng: np.random.Generator,
                   level: int | None = None) -> CkksCiphertext:
    return encrypt(encode(values, context, level), pk, context, rng)


def decrypt_values(ct: CkksCiphertext, sk: SecretKey, full: bool = False) -> np.ndarray:
    return decode(decrypt(ct, sk), ct.context, full=full)


# -- level management -------------------------------------------------------

def _rescale(ct: CkksCiphertext, c0: RingPoly, c1: RingPoly, scale: float) -> CkksCiphertext:
    ctx = ct.context
    q_last = ctx.chain.moduli[c0.level]
    new_level = c0.level - 1
    new_scale = _snap(scale / q_last, ctx.scale_at(new_level))
    return _make(ctx, drop_last_limb(c0), drop_last_limb(c1), new_scale, new_level, ct.logical_len)


def lower_to(ct: CkksCiphertext, level: int, scale: float | None = None) -> CkksCiphertext:
    """Bring ``ct`` down to ``level`` at ``scale`` (default: the schedule scale there)."""
    ctx = ct.context
    target = ctx.scale_at(level) if scale is None else scale
    if level > ct.level:
        raise ValueError(f"cannot raise a ciphertext from level {ct.level} to {level}")
    if level == ct.level:
        if abs(ct.scale - target) <= _SNAP * target:
            return ct
        raise LevelExhaustedError("scale correction needs one level below the current one")
    limbs = level + 2
    c0, c1 = ct.c0.keep(limbs), ct.c1.keep(limbs)
    q_next = ctx.chain.moduli[level + 1]
    factor = round(target * q_next / ct.scale)
    if factor < 1:
        raise ValueError("scale correction factor rounds to zero")
    c0, c1 = mul_int(c0, factor), mul_int(c1, factor)
    out = _rescale(ct, c0, c1, ct.scale * factor)
    return replace(out, scale=_snap(out.scale, target))


def align_levels(a: CkksCiphertext, b: CkksCiphertext) -> tuple[CkksCiphertext, CkksCiphertext]:
    """Bring two ciphertexts to a common level and scale. Consumes no counted operation."""
    if a.context != b.context:
        raise ContextMismatchError("ciphertexts come from different contexts")
    same_scale = abs(a.scale - b.scale) <= _SNAP * max(a.scale, b.scale)
    if a.level == b.level and same_scale:
        return a, b
    t = min(a.level, b.level)
    ctx = a.context
    if a.level == b.level or not (_on_schedule(a, t) or _on_schedule(b, t)):
        if t == 0:
            raise LevelExhaustedError("cannot align scales at level 0")
        t -= 1
    target = ctx.scale_at(t)
    return _lower_or_keep(a, t, target), _lower_or_keep(b, t, target)


def _on_schedule(ct: CkksCiphertext, level: int) -> bool:
    s = ct.context.scale_at(level)
    return ct.level == level and abs(ct.scale - s) <= _SNAP * s


def _lower_or_keep(ct: CkksCiphertext, level: int, target: float) -> CkksCiphertext:
    if ct.level == level and abs(ct.scale - target) <= _SNAP * target:
        return ct
    return lower_to(ct, level, target)


# -- arithmetic -------------------------------------------------------------

def _as_plain(ct: CkksCiphertext, other, scale: float) -> CkksPlaintext:
    if isinstance(other, CkksPlaintext):
        return other
    return encode(other, ct.context, ct.level, scale)


def _fit_plain(ct: CkksCiphertext, pt: CkksPlaintext) -> RingPoly:
    if pt.level < ct.level:
        raise ValueError("plaintext sits below the ciphertext level")
    return pt.poly.keep(ct.level + 1)


def add(a: CkksCiphertext, b) -> CkksCiphertext:
    """a + b for a ciphertext, plaintext, real vector or real scalar."""
    if isinstance(b, CkksCiphertext):
        a, b = align_levels(a, b)
        return _make(a.context, poly_add(a.c0, b.c0), poly_add(a.c1, b.c1), a.scale, a.level,
                     max(a.logical_len, b.logical_len))
    if np.isscalar(b):
        return replace(a, c0=add_int(a.c0, round(float(b) * a.scale)))
    pt = _as_plain(a, b, a.scale)
    if abs(pt.scale - a.scale) > _SNAP * a.scale:
        raise ValueError("plaintext scale does not match the ciphertext scale")
    return replace(a, c0=poly_add(a.c0, _fit_plain(a, pt)))


def neg(a: CkksCiphertext) -> CkksCiphertext:
    return replace(a, c0=poly_neg(a.c0), c1=poly_neg(a.c1))


def sub(a: CkksCiphertext, b) -> CkksCiphertext:
    if isinstance(b, CkksCiphertext):
        return add(a, neg(b))
    if np.isscalar(b):
        return add(a, -float(b))
    if isinstance(b, CkksPlaintext):
        return replace(a, c0=poly_sub(a.c0, _fit_plain(a, b)))
    return add(a, -np.asarray(b, dtype=np.float64))


def _need_level(ct: CkksCiphertext):
    if ct.level < 1:
        raise LevelExhaustedError("no multiplicative level left; refresh the ciphertext first")


def mul(a: CkksCiphertext, b: CkksCiphertext, relin_key: RelinKey) -> CkksCiphertext:
    """Tensor product, relinearisation and rescale. Consumes one level."""
    a, b = align_levels(a, b)
    _need_level(a)
    d0 = poly_mul(a.c0, b.c0)
    d1 = poly_add(poly_mul(a.c0, b.c1), poly_mul(a.c1, b.c0))
    d2 = poly_mul(a.c1, b.c1)
    k0, k1 = key_switch(a.context, d2, relin_key.key)
    out = _rescale(a, poly_add(d0, k0), poly_add(d1, k1), a.scale * b.scale)
    return replace(out, logical_len=max(a.logical_len, b.logical_len))


def square(a: CkksCiphertext, relin_key: RelinKey) -> CkksCiphertext:
    return mul(a, a, relin_key)


def plain_scale(ct: CkksCiphertext) -> float:
    """Encoding scale for a plaintext factor that lands the product on the schedule."""
    ctx = ct.context
    return ctx.scale_at(ct.level - 1) * ctx.chain.moduli[ct.level] / ct.scale


def mul_plain(a: CkksCiphertext, b) -> CkksCiphertext:
    """a * b for a plaintext, real vector or real scalar; rescales, consumes one level."""
    _need_level(a)
    if np.isscalar(b):
        sp = plain_scale(a)
        c = round(float(b) * sp)
        return _rescale(a, mul_int(a.c0, c), mul_int(a.c1, c), a.scale * sp)
    pt = _as_plain(a, b, plain_scale(a))
    m = _fit_plain(a, pt)
    return _rescale(a, poly_mul(a.c0, m), poly_mul(a.c1, m), a.scale * pt.scale)


def _rotation_key(ct: CkksCiphertext, k: int, rot_keys: RotKeySet):
    ctx = ct.context
    g = galois_element(ctx.ring_dim, int(k), ctx.batch_size)
    if g == 1:
        return g, None
    if rot_keys is None or g not in rot_keys:
        raise MissingKeyError(f"no rotation key for shift {k}")
    return g, rot_keys.keys[g]


def rotate(ct: CkksCiphertext, k: int, rot_keys: RotKeySet) -> CkksCiphertext:
    """Cyclic left rotation of the whole batch by k slots: out[j] = in[j + k]."""
    g, key = _rotation_key(ct, k, rot_keys)
    if key is None:
        return ct
    c0 = automorphism(ct.c0, g)
    c1 = automorphism(ct.c1, g)
    k0, k1 = key_switch(ct.context, c1, key)
    return replace(ct, c0=poly_add(c0, k0), c1=k1)


@dataclass(frozen=True)
class HoistedCiphertext:
    """A ciphertext with its key-switching digits precomputed, for several rotations."""

    ct: CkksCiphertext
    digits: tuple


def hoist(ct: CkksCiphertext) -> HoistedCiphertext:
    return HoistedCiphertext(ct, tuple(mod_up(ct.context, ct.c1)))


def rotate_hoisted(h: HoistedCiphertext, k: int, rot_keys: RotKeySet) -> CkksCiphertext:
    """Same rotation as ``rotate``, reusing the shared digit decomposition.

    The automorphism is a slot permutation in the evaluation domain, so it is
    applied to the lifted digits directly; the result differs from ``rotate``
    only by key-switching noise of the same size.
    """
    ct = h.ct
    g, key = _rotation_key(ct, k, rot_keys)
    if key is None:
        return ct
    digits = [automorphism(d, g) for d in h.digits]
    k0, k1 = switch_lifted(ct.context, digits, key, ct.c1.basis)
    return replace(ct, c0=poly_add(automorphism(ct.c0, g), k0), c1=k1)


# -- simulated bootstrap ----------------------------------------------------

STANDARD = "standard"
ITERATIVE = "iterative"


class RefreshPolicy:
    """Insecure stand-in for bootstrapping: decrypt, perturb, re-encrypt at l_refresh.

    Holds the secret key, so it exists only when the context explicitly allows
    the simulation. ``count`` records how many refreshes were performed.
    """

    def __init__(self, context: CkksContext, sk: SecretKey, pk: PublicKey,
                 rng: np.random.Generator, eps_boot: float | None = None, mode: str = STANDARD):
        if not context.insecure_simulated_bootstrap:
            raise PermissionError("simulated bootstrap is disabled for this context")
        if mode not in (STANDARD, ITERATIVE):
            raise ValueError(f"unknown refresh mode {mode!r}")
        if eps_boot is None:
            eps_boot = 1e-6 if mode == STANDARD else 1e-9
        if eps_boot < 0:
            raise ValueError("eps_boot must be non-negative")
        self.context = context
        self.sk = sk
        self.pk = pk
        self.rng = rng
        self.eps_boot = float(eps_boot)
        self.mode = mode
        self.count = 0

    @property
    def min_level(self) -> int:
        """Levels a ciphertext must still hold for the refresh to start."""
        return 1 if self.mode == STANDARD else 2


def refresh(ct: CkksCiphertext, policy: RefreshPolicy) -> CkksCiphertext:
    ctx = ct.context
    if ct.level < policy.min_level:
        raise LevelExhaustedError(
            f"refresh needs level >= {policy.min_level}, ciphertext is at {ct.level}")
    vals = decrypt_values(ct, policy.sk, full=True)
    if policy.eps_boot > 0:
        vals = vals + policy.rng.uniform(-policy.eps_boot, policy.eps_boot, size=vals.size)
    pt = encode(vals, ctx, ctx.l_refresh)
    out = encrypt(pt, policy.pk, ctx, policy.rng)
    policy.count += 1
    return replace(out, logical_len=ct.logical_len)
