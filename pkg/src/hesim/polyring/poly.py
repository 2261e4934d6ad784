"""Elements of Z_Q[X]/(X^n + 1) in RNS form."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from hesim.polyring import _kernels as K
from hesim.polyring.primes import Basis, _bitrev_order

COEFF = "coeff"
EVAL = "eval"


class DomainError(ValueError):
    """Operation applied to a polynomial in the wrong representation."""


class LevelError(ValueError):
    """Operands live on different RNS bases, or no limb is left to drop."""


@dataclass(frozen=True, eq=False)
class RingPoly:
    """Limb-major residues of one ring element.

    ``data[i]`` holds the n coefficients (or NTT values) modulo ``basis.primes[i]``.
    Values are treated as immutable; every operation returns a new polynomial.
    """

    data: np.ndarray
    basis: Basis
    domain: str = COEFF

    def __post_init__(self):
        if self.data.dtype != np.uint64 or self.data.shape != (len(self.basis), self.basis.n):
            raise ValueError(f"bad limb array {self.data.dtype} {self.data.shape} for {self.basis}")
        if self.domain not in (COEFF, EVAL):
            raise ValueError(f"unknown domain {self.domain!r}")

    @property
    def n(self) -> int:
        return self.basis.n

    @property
    def level(self) -> int:
        """Index of the highest retained limb."""
        return len(self.basis) - 1

    def copy(self) -> "RingPoly":
        return RingPoly(self.data.copy(), self.basis, self.domain)

    def __eq__(self, other):
        return (isinstance(other, RingPoly) and self.basis == other.basis
                and self.domain == other.domain and np.array_equal(self.data, other.data))

    def __add__(self, other):
        return poly_add(self, other)

    def __sub__(self, other):
        return poly_sub(self, other)

    def __mul__(self, other):
        return poly_mul(self, other)

    def __neg__(self):
        return poly_neg(self)

    def keep(self, limbs: int) -> "RingPoly":
        """Restrict to the first ``limbs`` primes (exact in either domain)."""
        return RingPoly(np.ascontiguousarray(self.data[:limbs]), self.basis[:limbs], self.domain)

    def centered(self, limb: int = 0) -> np.ndarray:
        """Signed coefficients of one limb, in (-q/2, q/2]. Coefficient domain only."""
        if self.domain != COEFF:
            raise DomainError("centered() needs coefficient domain")
        q = int(self.basis.q[limb])
        row = self.data[limb]
        out = row.astype(np.int64)
        out[row > q // 2] -= q
        return out


def zeros(basis: Basis, domain: str = COEFF) -> RingPoly:
    return RingPoly(np.zeros((len(basis), basis.n), dtype=np.uint64), basis, domain)


def from_signed(coeffs, basis: Basis) -> RingPoly:
    """Reduce small signed integer coefficients (|c| < 2**63) into every limb."""
    c = np.asarray(coeffs, dtype=np.int64)
    if c.shape != (basis.n,):
        raise ValueError(f"expected {basis.n} coefficients, got {c.shape}")
    data = np.mod(c[None, :], basis.q_signed[:, None]).astype(np.uint64)
    return RingPoly(data, basis, COEFF)


def from_bigints(coeffs, basis: Basis) -> RingPoly:
    """Reduce arbitrary Python integers into every limb (slow; for tests and refresh)."""
    coeffs = [int(c) for c in coeffs]
    data = np.array([[c % q for c in coeffs] for q in basis.moduli], dtype=np.uint64)
    return RingPoly(data, basis, COEFF)


def to_bigints(p: RingPoly) -> list[int]:
    """CRT-reconstruct centered coefficients modulo the full basis product."""
    if p.domain != COEFF:
        raise DomainError("to_bigints() needs coefficient domain")
    Q = p.basis.product
    acc = [0] * p.n
    for i, q in enumerate(p.basis.moduli):
        qi_hat = Q // q
        w = qi_hat * pow(qi_hat, -1, q)
        row = p.data[i].tolist()
        for j in range(p.n):
            acc[j] += row[j] * w
    half = Q // 2
    return [c % Q - Q if c % Q > half else c % Q for c in acc]


def ntt_forward(p: RingPoly) -> RingPoly:
    if p.domain != COEFF:
        raise DomainError("forward NTT expects coefficient domain")
    b = p.basis
    out = p.data.copy()
    K.ntt_forward(out, b.q, b.qinv, b.tw)
    return RingPoly(out, b, EVAL)


def ntt_inverse(p: RingPoly) -> RingPoly:
    if p.domain != EVAL:
        raise DomainError("inverse NTT expects evaluation domain")
    b = p.basis
    out = p.data.copy()
    K.ntt_inverse(out, b.q, b.qinv, b.itw, b.ninv)
    return RingPoly(out, b, COEFF)


def to_eval(p: RingPoly) -> RingPoly:
    return p if p.domain == EVAL else ntt_forward(p)


def to_coeff(p: RingPoly) -> RingPoly:
    return p if p.domain == COEFF else ntt_inverse(p)


def _check(a: RingPoly, b: RingPoly):
    if a.basis != b.basis:
        raise LevelError(f"operands on different bases: level {a.level} vs {b.level}")


def poly_add(a: RingPoly, b: RingPoly) -> RingPoly:
    _check(a, b)
    if a.domain != b.domain:
        raise DomainError("add operands in different domains")
    return RingPoly(K.add_mod(a.data, b.data, a.basis.q), a.basis, a.domain)


def poly_sub(a: RingPoly, b: RingPoly) -> RingPoly:
    _check(a, b)
    if a.domain != b.domain:
        raise DomainError("sub operands in different domains")
    return RingPoly(K.sub_mod(a.data, b.data, a.basis.q), a.basis, a.domain)


def poly_neg(a: RingPoly) -> RingPoly:
    return RingPoly(K.neg_mod(a.data, a.basis.q), a.basis, a.domain)


def poly_mul(a: RingPoly, b: RingPoly) -> RingPoly:
    """Negacyclic product; coefficient-domain inputs are transformed internally
    and the result is returned in the evaluation domain."""
    _check(a, b)
    a, b = to_eval(a), to_eval(b)
    bs = a.basis
    return RingPoly(K.mul_mod(a.data, b.data, bs.q, bs.qinv, bs.r2), bs, EVAL)


def poly_mul_acc(acc: RingPoly, a: RingPoly, b: RingPoly) -> None:
    """acc += a*b, in place on ``acc.data``; all three in evaluation domain."""
    bs = acc.basis
    K.mul_acc(acc.data, a.data, b.data, bs.q, bs.qinv, bs.r2)


def mul_int(p: RingPoly, c) -> RingPoly:
    """Multiply by an integer constant (a Python int, possibly huge or negative),
    or by one integer per limb."""
    consts = p.basis.mont_consts(c if not isinstance(c, (int, np.integer)) else int(c))
    return RingPoly(K.mul_const_mont(p.data, consts, p.basis.q, p.basis.qinv), p.basis, p.domain)


def add_int(p: RingPoly, c: int) -> RingPoly:
    """Add an integer to the constant coefficient."""
    b = p.basis
    row = np.array([int(c) % q for q in b.moduli], dtype=np.uint64)
    if p.domain == COEFF:
        data = p.data.copy()
        data[:, 0] = K.add_mod(data[:, :1], row[:, None], b.q)[:, 0]
        return RingPoly(data, b, p.domain)
    # the constant polynomial evaluates to itself at every root
    return RingPoly(K.add_row_const(p.data, row, b.q), b, p.domain)


@lru_cache(maxsize=256)
def _coeff_perm(n: int, g: int):
    idx = np.arange(n, dtype=np.int64) * g % (2 * n)
    dst = idx % n
    neg = idx >= n
    return dst, neg


@lru_cache(maxsize=256)
def _eval_perm(n: int, g: int) -> np.ndarray:
    # eval slot k holds p(psi^(2*brv(k)+1)); sigma_g(p) there equals p at psi^((2*brv(k)+1)*g)
    brv = _bitrev_order(n)
    pos_of_exp = np.empty(2 * n, dtype=np.int64)
    pos_of_exp[2 * brv + 1] = np.arange(n)
    return pos_of_exp[(2 * brv + 1) * g % (2 * n)]


def automorphism(p: RingPoly, galois_elt: int) -> RingPoly:
    """Apply X -> X^galois_elt, in whichever domain ``p`` is held."""
    n = p.n
    if galois_elt % 2 == 0 or not 0 < galois_elt < 2 * n:
        raise ValueError(f"galois element must be odd and in (0, {2 * n}), got {galois_elt}")
    if p.domain == EVAL:
        return RingPoly(np.ascontiguousarray(p.data[:, _eval_perm(n, galois_elt)]), p.basis, EVAL)
    dst, neg = _coeff_perm(n, galois_elt)
    src = p.data
    vals = src.copy()
    flip = neg[None, :] & (src != 0)
    vals[flip] = (p.basis.q[:, None] - src)[flip]
    out = np.empty_like(src)
    out[:, dst] = vals
    return RingPoly(out, p.basis, COEFF)


def lift_centered(row: np.ndarray, q: int, basis: Basis) -> np.ndarray:
    """Centered residues mod q (one limb) re-reduced into every prime of ``basis``."""
    signed = row.astype(np.int64)
    signed[row > q // 2] -= q
    return np.mod(signed[None, :], basis.q_signed[:, None]).astype(np.uint64)


def drop_last_limb(p: RingPoly) -> RingPoly:
    """Exact RNS division by the last prime with rounding: round(p / q_last).

    Works in either domain; the result keeps the input's domain.
    """
    if p.level < 1:
        raise LevelError("cannot drop a limb at level 0")
    b = p.basis
    q_last = int(b.q[-1])
    rest = b[:-1]
    last = RingPoly(np.ascontiguousarray(p.data[-1:]), b[-1:], p.domain)
    last = to_coeff(last)
    corr = RingPoly(lift_centered(last.data[0], q_last, rest), rest, COEFF)
    if p.domain == EVAL:
        corr = ntt_forward(corr)
    head = RingPoly(np.ascontiguousarray(p.data[:-1]), rest, p.domain)
    diff = poly_sub(head, corr)
    inv = [pow(q_last, -1, q) for q in rest.moduli]
    return mul_int(diff, inv)
