"""Random ring elements. Every sampler takes an explicit numpy Generator."""

from __future__ import annotations

import numpy as np

from hesim.polyring.poly import EVAL, RingPoly, from_signed
from hesim.polyring.primes import Basis

DEFAULT_SIGMA = 3.2


def sample_uniform(basis: Basis, rng: np.random.Generator, domain: str = EVAL) -> RingPoly:
    """Each limb uniform in [0, q). Uniform in one domain is uniform in the other."""
    data = np.stack([rng.integers(0, q, size=basis.n, dtype=np.uint64) for q in basis.moduli])
    return RingPoly(data, basis, domain)


def ternary_coeffs(n: int, rng: np.random.Generator, hamming_weight: int | None = None) -> np.ndarray:
    """Uniform ternary, or sparse ternary with exactly ``hamming_weight`` nonzeros."""
    if hamming_weight is None:
        return rng.integers(-1, 2, size=n).astype(np.int64)
    if not 0 < hamming_weight <= n:
        raise ValueError(f"hamming weight must be in (0, {n}]")
    out = np.zeros(n, dtype=np.int64)
    pos = rng.choice(n, size=hamming_weight, replace=False)
    out[pos] = rng.choice(np.array([-1, 1]), size=hamming_weight)
    return out


def error_coeffs(n: int, sigma: float, rng: np.random.Generator, tail: float = 6.0) -> np.ndarray:
    """Rounded Gaussian with standard deviation ``sigma``, cut at ``tail * sigma``."""
    out = np.rint(rng.normal(0.0, sigma, size=n))
    bound = tail * sigma
    bad = np.abs(out) > bound
    while bad.any():
        out[bad] = np.rint(rng.normal(0.0, sigma, size=int(bad.sum())))
        bad = np.abs(out) > bound
    return out.astype(np.int64)


def sample_ternary(basis: Basis, rng: np.random.Generator, hamming_weight: int | None = None) -> RingPoly:
    return from_signed(ternary_coeffs(basis.n, rng, hamming_weight), basis)


def sample_error(basis: Basis, sigma: float, rng: np.random.Generator) -> RingPoly:
    return from_signed(error_coeffs(basis.n, sigma, rng), basis)
