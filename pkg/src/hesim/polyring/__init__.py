"""Negacyclic polynomial ring arithmetic over an RNS modulus chain."""

from hesim.polyring.poly import (
    COEFF,
    EVAL,
    DomainError,
    LevelError,
    RingPoly,
    add_int,
    automorphism,
    drop_last_limb,
    from_bigints,
    from_signed,
    lift_centered,
    mul_int,
    ntt_forward,
    ntt_inverse,
    poly_add,
    poly_mul,
    poly_mul_acc,
    poly_neg,
    poly_sub,
    to_bigints,
    to_coeff,
    to_eval,
    zeros,
)
from hesim.polyring.primes import Basis, ModulusChain, PrimeModulus, basis_of, ntt_primes
from hesim.polyring.sampling import (
    DEFAULT_SIGMA,
    error_coeffs,
    sample_error,
    sample_ternary,
    sample_uniform,
    ternary_coeffs,
)

__all__ = [
    "COEFF", "EVAL", "DEFAULT_SIGMA", "Basis", "DomainError", "LevelError", "ModulusChain",
    "PrimeModulus", "RingPoly", "add_int", "automorphism", "basis_of", "drop_last_limb",
    "error_coeffs", "from_bigints", "from_signed", "lift_centered", "mul_int", "ntt_forward",
    "ntt_inverse", "ntt_primes", "poly_add", "poly_mul", "poly_mul_acc", "poly_neg", "poly_sub",
    "sample_error", "sample_ternary", "sample_uniform", "ternary_coeffs", "to_bigints", "to_coeff",
    "to_eval", "zeros",
]
