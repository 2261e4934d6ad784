"""Backend-agnostic secure vectors and matrices."""

from hesim.secure.arrays import (
    MASKS,
    MaskCache,
    SecureMatrix,
    SecureVector,
    add_const,
    circshift_mat,
    circshift_vec,
    dec_matrix,
    dec_vector,
    enc_matrix,
    enc_vector,
    ew_add,
    ew_mul,
    ew_sub,
    levels_remaining,
    mask_mul,
    maybe_refresh,
    needs_refresh,
    next_pow2,
    refresh,
    rotate,
    scale_by,
)
from hesim.secure.backend import ITERATIVE, STANDARD, Backend, EncryptedBackend, ExactBackend, OpCounts
from hesim.secure.serialize import dumps_array, loads_array

__all__ = [
    "ITERATIVE", "MASKS", "STANDARD", "Backend", "EncryptedBackend", "ExactBackend", "MaskCache",
    "OpCounts", "SecureMatrix", "SecureVector", "add_const", "circshift_mat", "circshift_vec",
    "dec_matrix", "dec_vector", "dumps_array", "loads_array", "enc_matrix", "enc_vector", "ew_add", "ew_mul", "ew_sub",
    "levels_remaining", "mask_mul", "maybe_refresh", "needs_refresh", "next_pow2", "refresh",
    "rotate", "scale_by",
]
