"""Leveled CKKS over real vectors, with a simulated (insecure) bootstrap."""

from hesim.ckks.ciphertext import (
    ITERATIVE,
    STANDARD,
    CkksCiphertext,
    ContextMismatchError,
    HoistedCiphertext,
    RefreshPolicy,
    add,
    align_levels,
    decrypt,
    decrypt_values,
    encrypt,
    encrypt_values,
    hoist,
    level_of,
    lower_to,
    mul,
    mul_plain,
    neg,
    refresh,
    rotate,
    rotate_hoisted,
    square,
    sub,
)
from hesim.ckks.context import CkksContext, LevelExhaustedError
from hesim.ckks.encoding import CkksPlaintext, decode, encode
from hesim.ckks.keys import (
    MissingKeyError,
    PublicKey,
    RelinKey,
    RotKeySet,
    SecretKey,
    galois_element,
    keygen,
    rotation_keygen,
)
from hesim.ckks.serialize import FormatError, dumps, loads

__all__ = [
    "ITERATIVE", "STANDARD", "CkksCiphertext", "CkksContext", "CkksPlaintext",
    "ContextMismatchError", "FormatError", "HoistedCiphertext", "LevelExhaustedError",
    "MissingKeyError", "PublicKey", "RefreshPolicy", "RelinKey", "RotKeySet", "SecretKey", "add",
    "align_levels", "decode", "decrypt", "decrypt_values", "dumps", "encode", "encrypt",
    "encrypt_values", "galois_element", "hoist", "keygen", "level_of", "loads", "lower_to", "mul",
    "mul_plain", "neg", "refresh", "rotate", "rotate_hoisted", "rotation_keygen", "square", "sub",
]
