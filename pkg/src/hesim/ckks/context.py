"""CKKS parameter set: ring, modulus chain, scale schedule, depth budget."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

from hesim.polyring import Basis, ModulusChain
from hesim.polyring.sampling import DEFAULT_SIGMA


class LevelExhaustedError(ArithmeticError):
    """A multiplication was requested on a ciphertext with no level left."""


@lru_cache(maxsize=8)
def _chain(n, l_max, first_bits, scale_bits, key_digit_primes, special_bits):
    return ModulusChain.generate(n, l_max, first_bits=first_bits, scale_bits=scale_bits,
                                 special_count=key_digit_primes, special_bits=special_bits)


@dataclass(frozen=True)
class CkksContext:
    """Immutable CKKS parameters. Toy-sized and explicitly insecure.

    ``scale_at(l)`` is the canonical scale of a ciphertext at level ``l``. It is
    built bottom-up so that squaring the scale at level l and dividing by q_l lands
    exactly on the scale at level l-1; every ciphertext produced by this package
    sits on that schedule, so additions never meet mismatched scales.
    """

    ring_dim: int = 2**13
    l_max: int = 33
    l_refresh: int = 25
    batch_size: int = 64
    scale_bits: int = 40
    first_bits: int = 60
    sigma: float = DEFAULT_SIGMA
    hamming_weight: int | None = None
    key_digit_primes: int = 4
    special_bits: int = 61
    # simulated bootstrap decrypts internally; it is refused unless this is set
    insecure_simulated_bootstrap: bool = True
    insecure_toy_flag: bool = field(default=True, init=False)

    def __post_init__(self):
        n = self.ring_dim
        if n < 4 or n & (n - 1):
            raise ValueError("ring_dim must be a power of two >= 4")
        b = self.batch_size
        if b < 1 or b & (b - 1) or b > n // 2:
            raise ValueError(f"batch_size must be a power of two <= ring_dim/2 = {n // 2}")
        if not 0 < self.l_refresh <= self.l_max:
            raise ValueError("need 0 < l_refresh <= l_max")
        if self.scale_bits >= self.first_bits:
            raise ValueError("first modulus must be larger than the scale")
        if self.key_digit_primes < 1:
            raise ValueError("key_digit_primes must be positive")

    @cached_property
    def chain(self) -> ModulusChain:
        return _chain(self.ring_dim, self.l_max, self.first_bits, self.scale_bits,
                      self.key_digit_primes, self.special_bits)

    @property
    def scale(self) -> float:
        return float(2**self.scale_bits)

    @property
    def slots(self) -> int:
        return self.batch_size

    @cached_property
    def _scales(self) -> tuple[float, ...]:
        out = [self.scale]
        for q in self.chain.moduli[1:]:
            out.append(math.sqrt(out[-1] * q))
        return tuple(out)

    def scale_at(self, level: int) -> float:
        return self._scales[level]

    def basis(self, level: int) -> Basis:
        return self.chain.basis(level)

    @cached_property
    def ext_basis(self) -> Basis:
        """Q_lmax followed by the key-switching special primes."""
        return self.chain.basis(self.l_max) + self.chain.special_basis

    @cached_property
    def digits(self) -> tuple[tuple[int, ...], ...]:
        """Chain prime indices grouped into key-switching digits."""
        a = self.key_digit_primes
        idx = range(self.l_max + 1)
        return tuple(tuple(idx[i:i + a]) for i in range(0, self.l_max + 1, a))

    def with_batch(self, batch_size: int) -> "CkksContext":
        from dataclasses import replace
        return replace(self, batch_size=batch_size)

    def describe(self) -> dict:
        return {
            "ring_dim": self.ring_dim,
            "l_max": self.l_max,
            "l_refresh": self.l_refresh,
            "batch_size": self.batch_size,
            "scale_bits": self.scale_bits,
            "first_bits": self.first_bits,
            "sigma": self.sigma,
            "hamming_weight": self.hamming_weight,
            "key_digit_primes": self.key_digit_primes,
            "insecure_toy": True,
        }
