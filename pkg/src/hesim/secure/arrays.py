"""Secure vectors and matrices with masked circular shifts.

A matrix is packed column by column, so element (i, j) of an n x m matrix
sits in slot j*n + i. Slots past the packed data are indeterminate after any
operation and are never read back.

``circshift`` uses the array-library convention: a positive shift moves data
towards higher indices, ``circshift([a, b, c], 1) == [c, a, b]``. The ciphertext
rotation moves data the other way, hence the negated rotation indices below.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace

import numpy as np

from hesim.secure.backend import Backend


def next_pow2(n: int) -> int:
    return 1 << max(0, int(n) - 1).bit_length()


@dataclass(frozen=True, eq=False)
class SecureVector:
    payload: object
    length: int
    capacity: int
    level: int
    backend: Backend

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.length,)


@dataclass(frozen=True, eq=False)
class SecureMatrix:
    payload: object
    nrows: int
    ncols: int
    capacity: int
    level: int
    backend: Backend

    @property
    def length(self) -> int:
        return self.nrows * self.ncols

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.nrows, self.ncols)


SecureArray = SecureVector | SecureMatrix


class MaskCache:
    """Memoised 0/1 mask vectors, keyed by their one-slot runs and capacity."""

    def __init__(self):
        self._masks: dict[tuple, np.ndarray] = {}
        self._lock = threading.Lock()

    def get(self, runs: tuple[tuple[int, int], ...], capacity: int) -> np.ndarray:
        """Mask with ones on each half-open [start, stop) run."""
        key = (runs, capacity)
        with self._lock:
            m = self._masks.get(key)
            if m is None:
                m = np.zeros(capacity)
                for a, b in runs:
                    m[a:b] = 1.0
                m.flags.writeable = False
                self._masks[key] = m
        return m

    def __len__(self):
        return len(self._masks)


MASKS = MaskCache()


# -- packing ------------------------------------------------------------------

def _pack(flat: np.ndarray, backend: Backend, capacity: int | None):
    if flat.size == 0:
        raise ValueError("cannot encrypt empty data")
    cap = next_pow2(flat.size) if capacity is None else int(capacity)
    if cap & (cap - 1) or cap < 1:
        raise ValueError("capacity must be a power of two")
    if flat.size > cap:
        raise ValueError(f"{flat.size} values exceed capacity {cap}")
    limit = backend.max_capacity()
    if limit is not None and cap > limit:
        raise ValueError(f"capacity {cap} exceeds the backend limit {limit}")
    slots = np.zeros(cap)
    slots[: flat.size] = flat
    payload, level = backend.encrypt(slots, cap)
    return payload, cap, level


def enc_vector(data, backend: Backend, capacity: int | None = None) -> SecureVector:
    flat = np.asarray(data, dtype=np.float64).ravel()
    payload, cap, level = _pack(flat, backend, capacity)
    return SecureVector(payload, flat.size, cap, level, backend)


def enc_matrix(data, backend: Backend, capacity: int | None = None) -> SecureMatrix:
    mat = np.asarray(data, dtype=np.float64)
    if mat.ndim != 2:
        raise ValueError("enc_matrix expects a 2-D array")
    payload, cap, level = _pack(mat.ravel(order="F"), backend, capacity)
    return SecureMatrix(payload, mat.shape[0], mat.shape[1], cap, level, backend)


def dec_vector(x: SecureVector, sk=None) -> np.ndarray:
    return _slots(x, sk)[: x.length]


def dec_matrix(x: SecureMatrix, sk=None) -> np.ndarray:
    return _slots(x, sk)[: x.length].reshape(x.nrows, x.ncols, order="F")


def _slots(x, sk) -> np.ndarray:
    if sk is not None and hasattr(x.backend, "sk"):
        from hesim.ckks import decrypt_values
        return decrypt_values(x.payload, sk, full=True)
    return x.backend.decrypt(x.payload)


def levels_remaining(x) -> int:
    return x.level


# -- element-wise arithmetic --------------------------------------------------

def _check_pair(a, b):
    if type(a) is not type(b) or a.shape != b.shape or a.capacity != b.capacity:
        raise ValueError(f"shape mismatch: {a.shape}/{a.capacity} vs {b.shape}/{b.capacity}")
    if a.backend is not b.backend:
        raise ValueError("operands live on different backends")


def _with(x, payload, level):
    return replace(x, payload=payload, level=level)


def ew_add(a, b):
    _check_pair(a, b)
    p, lv = a.backend.add(a.payload, a.level, b.payload, b.level)
    a.backend.note("add", lv)
    return _with(a, p, lv)


def ew_sub(a, b):
    _check_pair(a, b)
    p, lv = a.backend.sub(a.payload, a.level, b.payload, b.level)
    a.backend.note("add", lv)
    return _with(a, p, lv)


def ew_mul(a, b):
    _check_pair(a, b)
    p, lv = a.backend.mul(a.payload, a.level, b.payload, b.level)
    a.backend.note("mul", lv)
    return _with(a, p, lv)


def scale_by(a, c: float):
    p, lv = a.backend.mul_plain(a.payload, a.level, float(c))
    a.backend.note("mul", lv)
    return _with(a, p, lv)


def add_const(a, c: float):
    p, lv = a.backend.add_const(a.payload, a.level, float(c))
    a.backend.note("add", lv)
    return _with(a, p, lv)


def mask_mul(a, mask: np.ndarray):
    """Multiply by a plaintext vector of full capacity."""
    if mask.shape != (a.capacity,):
        raise ValueError("mask must cover the full capacity")
    p, lv = a.backend.mul_plain(a.payload, a.level, mask)
    a.backend.note("mul", lv)
    return _with(a, p, lv)


def rotate(a, k: int):
    """Rotate the whole batch left by k slots."""
    a.backend.log_rotation(a.capacity, k)
    if k % a.capacity == 0:
        return a
    p, lv = a.backend.rotate(a.payload, a.level, int(k))
    a.backend.note("rot", lv)
    return _with(a, p, lv)


def refresh(a):
    p, lv = a.backend.refresh(a.payload, a.level)
    a.backend.note("refresh", lv)
    return _with(a, p, lv)


def needs_refresh(level: int, l_step: int, backend: Backend) -> bool:
    return level - l_step < backend.min_refresh_level


def maybe_refresh(x, l_step: int):
    """Refresh ``x`` iff the next step (needing ``l_step`` levels) would leave too few."""
    return refresh(x) if needs_refresh(x.level, l_step, x.backend) else x


# -- circular shifts ----------------------------------------------------------

def _sign_rem(k: int, n: int) -> int:
    """Remainder of k by n carrying the sign of k, so |result| < n."""
    r = abs(int(k)) % n
    return r if k >= 0 else -r


def _vec_masks(length: int, k: int, capacity: int):
    if k > 0:
        runs1, runs2 = ((k, length),), ((0, k),)
    else:
        runs1, runs2 = ((0, length + k),), ((length + k, length),)
    return MASKS.get(runs1, capacity), MASKS.get(runs2, capacity)


def _circshift_flat(x, k: int):
    """Circular shift of the first ``x.length`` slots by k (sign kept, |k| < length)."""
    length, cap = x.length, x.capacity
    if k == 0:
        return x
    if length == cap:
        return rotate(x, -k)
    u = rotate(x, -k)
    v = rotate(x, (length if k > 0 else -length) - k)
    m1, m2 = _vec_masks(length, k, cap)
    return ew_add(mask_mul(u, m1), mask_mul(v, m2))


def circshift_vec(x, k: int):
    """Circular shift of a secure vector: result[i] = x[(i - k) mod length]."""
    return _circshift_flat(x, _sign_rem(k, x.length))


def _row_masks(n: int, m: int, k: int, capacity: int):
    if k > 0:
        r1, r2 = (0, n - k), (n - k, n)
    else:
        r1, r2 = (-k, n), (0, -k)
    runs1 = tuple((j * n + r1[0], j * n + r1[1]) for j in range(m))
    runs2 = tuple((j * n + r2[0], j * n + r2[1]) for j in range(m))
    return MASKS.get(runs1, capacity), MASKS.get(runs2, capacity)


def circshift_mat(x: SecureMatrix, k: int, l: int) -> SecureMatrix:
    """Shift rows by k and columns by l: result[i, j] = x[(i - k) mod n, (j - l) mod m]."""
    n, m = x.nrows, x.ncols
    k, l = _sign_rem(k, n), _sign_rem(l, m)
    if k == 0:
        return _circshift_flat(x, l * n)
    m1, m2 = _row_masks(n, m, k, x.capacity)
    s1 = l * n + k
    s2 = l * n + k + (n if k < 0 else -n)
    if x.length == x.capacity:
        # a full-batch shift is one rotation, so masking commutes with it; rotating
        # x itself lets every rotation of a step share one key-switching split
        return ew_add(mask_mul(rotate(x, -s1), np.roll(m1, s1)),
                      mask_mul(rotate(x, -s2), np.roll(m2, s2)))
    u = mask_mul(x, m1)
    v = mask_mul(x, m2)
    if l == 0:
        return ew_add(rotate(u, -s1), rotate(v, -s2))
    return ew_add(_circshift_flat(u, _sign_rem(s1, x.length)),
                  _circshift_flat(v, _sign_rem(s2, x.length)))
