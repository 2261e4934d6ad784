"""NTT-friendly primes, per-prime precomputation, and RNS bases."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
import itertools

import numpy as np
from sympy import isprime

_R = 1 << 64
# kernels need q < 2**62 so that sums of two residues never overflow
_QMAX = 1 << 62


@lru_cache(maxsize=16)
def _bitrev_order(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n, dtype=np.int64)
    out = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        out |= ((idx >> b) & 1) << (bits - 1 - b)
    return out


def find_psi(q: int, n: int) -> int:
    """Smallest-generator primitive 2n-th root of unity modulo q."""
    if (q - 1) % (2 * n):
        raise ValueError(f"{q} is not 1 mod {2 * n}")
    e = (q - 1) // (2 * n)
    for g in range(2, 10_000):
        psi = pow(g, e, q)
        if pow(psi, n, q) == q - 1:
            return psi
    raise ValueError(f"no primitive {2 * n}-th root found modulo {q}")


def ntt_primes(bits: int, count: int, n: int, exclude=()) -> list[int]:
    """Primes q = 1 (mod 2n) closest to 2**bits, alternating above and below.

    Alternating keeps the running product of scaling primes close to a power of
    two, which bounds the drift of the per-level scale schedule.
    """
    if not 2 * n < (1 << bits) <= _QMAX // 2:
        raise ValueError(f"unsupported prime size {bits} bits for n={n}")
    step = 2 * n
    center = (1 << bits) + 1
    taken = set(exclude)
    sides = [
        (c for c in itertools.count(center, step) if c < _QMAX),
        (c for c in itertools.count(center - step, -step) if c > 2),
    ]
    out: list[int] = []
    side = 0
    while len(out) < count:
        for cand in sides[side]:
            if cand not in taken and isprime(cand):
                out.append(cand)
                taken.add(cand)
                break
        side ^= 1
    return out


@dataclass(frozen=True)
class PrimeModulus:
    """One RNS prime with its negacyclic NTT tables (Montgomery form)."""

    q: int
    n: int
    psi: int = field(default=0)

    def __post_init__(self):
        if self.n & (self.n - 1):
            raise ValueError("ring dimension must be a power of two")
        if (self.q - 1) % (2 * self.n):
            raise ValueError(f"q={self.q} is not 1 mod 2n")
        if self.psi == 0:
            object.__setattr__(self, "psi", find_psi(self.q, self.n))
        if pow(self.psi, self.n, self.q) != self.q - 1:
            raise ValueError("psi is not a primitive 2n-th root of unity")

    def to_mont(self, x: int) -> int:
        return (x % self.q) * _R % self.q

    @cached_property
    def qinv_neg(self) -> int:
        return (-pow(self.q, -1, _R)) % _R

    @cached_property
    def r2(self) -> int:
        return _R * _R % self.q

    def _bitrev_powers(self, root: int) -> np.ndarray:
        q = self.q
        pw = [1] * self.n
        for i in range(1, self.n):
            pw[i] = pw[i - 1] * root % q
        order = _bitrev_order(self.n)
        return np.array([pw[i] * _R % q for i in order.tolist()], dtype=np.uint64)

    @cached_property
    def twiddles(self) -> np.ndarray:
        return self._bitrev_powers(self.psi)

    @cached_property
    def inv_twiddles(self) -> np.ndarray:
        return self._bitrev_powers(pow(self.psi, -1, self.q))

    @cached_property
    def n_inv_mont(self) -> int:
        return self.to_mont(pow(self.n, -1, self.q))


class Basis:
    """An ordered tuple of primes with stacked tables for the kernels."""

    def __init__(self, primes: tuple[PrimeModulus, ...]):
        if not primes:
            raise ValueError("empty basis")
        n = primes[0].n
        if any(p.n != n for p in primes):
            raise ValueError("mixed ring dimensions in basis")
        if len({p.q for p in primes}) != len(primes):
            raise ValueError("basis primes must be distinct")
        self.primes = primes
        self.n = n
        self.q = np.array([p.q for p in primes], dtype=np.uint64)
        self.qinv = np.array([p.qinv_neg for p in primes], dtype=np.uint64)
        self.r2 = np.array([p.r2 for p in primes], dtype=np.uint64)
        self.q_signed = np.array([p.q for p in primes], dtype=np.int64)

    @cached_property
    def tw(self) -> np.ndarray:
        return np.stack([p.twiddles for p in self.primes])

    @cached_property
    def itw(self) -> np.ndarray:
        return np.stack([p.inv_twiddles for p in self.primes])

    @cached_property
    def ninv(self) -> np.ndarray:
        return np.array([p.n_inv_mont for p in self.primes], dtype=np.uint64)

    def mont_consts(self, values) -> np.ndarray:
        """Montgomery forms of per-limb integer constants (one value or one per limb)."""
        if isinstance(values, int):
            values = [values] * len(self.primes)
        return np.array([p.to_mont(int(v)) for p, v in zip(self.primes, values)], dtype=np.uint64)

    @property
    def moduli(self) -> list[int]:
        return [p.q for p in self.primes]

    @cached_property
    def product(self) -> int:
        out = 1
        for p in self.primes:
            out *= p.q
        return out

    def __len__(self):
        return len(self.primes)

    def __getitem__(self, idx) -> "Basis":
        sel = self.primes[idx]
        if isinstance(sel, PrimeModulus):
            sel = (sel,)
        return basis_of(sel)

    def __add__(self, other: "Basis") -> "Basis":
        return basis_of(self.primes + other.primes)

    def __eq__(self, other):
        return isinstance(other, Basis) and self.primes == other.primes

    def __hash__(self):
        return hash(self.primes)

    def __repr__(self):
        return f"Basis({[p.q.bit_length() for p in self.primes]} bits, n={self.n})"


@lru_cache(maxsize=512)
def basis_of(primes: tuple[PrimeModulus, ...]) -> Basis:
    return Basis(primes)


@dataclass(frozen=True)
class ModulusChain:
    """q_0 (decryption modulus), q_1..q_lmax (scaling moduli), and special primes.

    The special primes never carry ciphertext data; they form the auxiliary
    modulus P used during key switching.
    """

    primes: tuple[PrimeModulus, ...]
    special: tuple[PrimeModulus, ...]
    first_bits: int
    scale_bits: int

    def __post_init__(self):
        qs = [p.q for p in self.primes + self.special]
        if len(set(qs)) != len(qs):
            raise ValueError("modulus chain primes must be pairwise distinct")

    @classmethod
    def generate(cls, n: int, l_max: int, first_bits: int = 60, scale_bits: int = 40,
                 special_count: int = 4, special_bits: int = 61) -> "ModulusChain":
        first = ntt_primes(first_bits, 1, n)
        scaling = ntt_primes(scale_bits, l_max, n, exclude=first)
        special = ntt_primes(special_bits, special_count, n, exclude=first + scaling)
        return cls(
            primes=tuple(PrimeModulus(q, n) for q in first + scaling),
            special=tuple(PrimeModulus(q, n) for q in special),
            first_bits=first_bits,
            scale_bits=scale_bits,
        )

    @property
    def l_max(self) -> int:
        return len(self.primes) - 1

    @property
    def n(self) -> int:
        return self.primes[0].n

    @property
    def moduli(self) -> list[int]:
        return [p.q for p in self.primes]

    def basis(self, level: int) -> Basis:
        """Basis of Q_level = q_0 * ... * q_level."""
        if not 0 <= level <= self.l_max:
            raise ValueError(f"level {level} outside [0, {self.l_max}]")
        return basis_of(self.primes[: level + 1])

    @property
    def special_basis(self) -> Basis:
        return basis_of(self.special)

    def q_product(self, level: int) -> int:
        return self.basis(level).product
