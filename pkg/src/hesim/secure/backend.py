"""Execution backends for secure arrays.

Both backends expose the same primitive operations on opaque payloads and
keep the same level bookkeeping, so a computation traverses an identical
level schedule whether it runs on plain numbers or on ciphertexts.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, fields

import numpy as np

from hesim import ckks
from hesim.ckks import CkksContext, LevelExhaustedError
from hesim.ckks.ciphertext import plain_scale

STANDARD = ckks.STANDARD
ITERATIVE = ckks.ITERATIVE


@dataclass
class OpCounts:
    add: int = 0
    mul: int = 0
    rot: int = 0
    refresh: int = 0

    def copy(self) -> "OpCounts":
        return OpCounts(self.add, self.mul, self.rot, self.refresh)

    def __sub__(self, other: "OpCounts") -> "OpCounts":
        return OpCounts(*(getattr(self, f.name) - getattr(other, f.name) for f in fields(self)))

    def as_tuple(self) -> tuple[int, int, int]:
        return self.add, self.mul, self.rot


class Backend:
    """Common bookkeeping: operation counters, optional level trace, rotation log."""

    name = "backend"

    def __init__(self, l_max: int, l_refresh: int, mode: str = STANDARD, record_trace: bool = False):
        if not 0 < l_refresh <= l_max:
            raise ValueError("need 0 < l_refresh <= l_max")
        if mode not in (STANDARD, ITERATIVE):
            raise ValueError(f"unknown refresh mode {mode!r}")
        self.l_max = l_max
        self.l_refresh = l_refresh
        self.mode = mode
        self.counts = OpCounts()
        self.trace: list[tuple[str, int]] | None = [] if record_trace else None
        self.rotations: set[tuple[int, int]] = set()

    @property
    def min_refresh_level(self) -> int:
        return 1 if self.mode == STANDARD else 2

    def note(self, op: str, level: int):
        if op in ("add", "mul", "rot", "refresh"):
            setattr(self.counts, op, getattr(self.counts, op) + 1)
        if self.trace is not None:
            self.trace.append((op, level))

    def log_rotation(self, capacity: int, k: int):
        self.rotations.add((capacity, k % capacity))

    def max_capacity(self) -> int | None:
        return None

    def check_mul_level(self, level: int):
        if level < 1:
            raise LevelExhaustedError("no multiplicative level left; refresh first")


class ExactBackend(Backend):
    """Plain float64 arithmetic with a virtual level counter."""

    name = "exact"

    def __init__(self, l_max: int = 33, l_refresh: int = 25, mode: str = STANDARD,
                 eps_boot: float = 0.0, rng: np.random.Generator | None = None,
                 record_trace: bool = False):
        super().__init__(l_max, l_refresh, mode, record_trace)
        self.eps_boot = float(eps_boot)
        self.rng = rng if rng is not None else np.random.default_rng(0)

    def encrypt(self, values: np.ndarray, capacity: int):
        return np.array(values, dtype=np.float64), self.l_max

    def decrypt(self, payload) -> np.ndarray:
        return np.array(payload, dtype=np.float64)

    def add(self, a, la, b, lb):
        return a + b, min(la, lb)

    def sub(self, a, la, b, lb):
        return a - b, min(la, lb)

    def add_const(self, a, la, c):
        return a + c, la

    def mul(self, a, la, b, lb):
        level = min(la, lb)
        self.check_mul_level(level)
        return a * b, level - 1

    def mul_plain(self, a, la, m):
        self.check_mul_level(la)
        return a * m, la - 1

    def rotate(self, a, la, k: int):
        return np.roll(a, -k), la

    def refresh(self, a, la):
        if la < self.min_refresh_level:
            raise LevelExhaustedError(f"refresh needs level >= {self.min_refresh_level}")
        if self.eps_boot > 0:
            a = a + self.rng.uniform(-self.eps_boot, self.eps_boot, size=a.size)
        return np.array(a, dtype=np.float64), self.l_refresh


class EncryptedBackend(Backend):
    """CKKS ciphertexts. Holds every key, including the secret key used for
    decryption and for the simulated refresh."""

    name = "encrypted"

    def __init__(self, context: CkksContext, seed: int = 0, mode: str = STANDARD,
                 eps_boot: float | None = None, auto_rotation_keys: bool = False,
                 record_trace: bool = False, mask_cache_size: int = 64, hoist_rotations: bool = True):
        super().__init__(context.l_max, context.l_refresh, mode, record_trace)
        self.context = context
        self.rng = np.random.default_rng(seed)
        self.sk, self.pk, self.relin = ckks.keygen(context, self.rng)
        self.rot_keys = ckks.RotKeySet({}, context)
        self.auto_rotation_keys = auto_rotation_keys
        self.policy = ckks.RefreshPolicy(context, self.sk, self.pk, self.rng, eps_boot, mode)
        self._plain_cache: OrderedDict = OrderedDict()
        self._plain_cache_size = mask_cache_size
        self._contexts: dict[int, CkksContext] = {}
        # ciphertexts rotated more than once keep their key-switching digits
        self.hoist_rotations = hoist_rotations
        self._hoisted: OrderedDict = OrderedDict()

    def max_capacity(self) -> int:
        return self.context.ring_dim // 2

    def context_for(self, capacity: int) -> CkksContext:
        if capacity not in self._contexts:
            if capacity > self.max_capacity():
                raise ValueError(f"capacity {capacity} exceeds ring_dim/2 = {self.max_capacity()}")
            self._contexts[capacity] = self.context.with_batch(capacity)
        return self._contexts[capacity]

    def ensure_rotation_keys(self, capacity: int, shifts) -> int:
        """Generate any missing keys for left rotations by ``shifts``; returns how many were made."""
        ctx = self.context_for(capacity)
        missing = sorted({int(k) % capacity for k in shifts} - {0})
        missing = [k for k in missing
                   if ckks.galois_element(ctx.ring_dim, k, capacity) not in self.rot_keys]
        if missing:
            new = ckks.rotation_keygen(ctx, self.sk, missing, self.rng)
            self.rot_keys = self.rot_keys.merged(new)
        return len(missing)

    def encrypt(self, values: np.ndarray, capacity: int):
        ct = ckks.encrypt_values(values, self.pk, self.context_for(capacity), self.rng)
        return ct, ct.level

    def decrypt(self, payload) -> np.ndarray:
        return ckks.decrypt_values(payload, self.sk, full=True)

    def add(self, a, la, b, lb):
        out = ckks.add(a, b)
        return out, out.level

    def sub(self, a, la, b, lb):
        out = ckks.sub(a, b)
        return out, out.level

    def add_const(self, a, la, c):
        return ckks.add(a, float(c)), la

    def mul(self, a, la, b, lb):
        out = ckks.mul(a, b, self.relin)
        return out, out.level

    def _plain(self, ct, m: np.ndarray):
        key = (m.tobytes(), ct.context.batch_size, ct.level, ct.scale)
        pt = self._plain_cache.get(key)
        if pt is None:
            pt = ckks.encode(m, ct.context, ct.level, plain_scale(ct))
            self._plain_cache[key] = pt
            if len(self._plain_cache) > self._plain_cache_size:
                self._plain_cache.popitem(last=False)
        else:
            self._plain_cache.move_to_end(key)
        return pt

    def mul_plain(self, a, la, m):
        self.check_mul_level(la)
        if np.isscalar(m):
            out = ckks.mul_plain(a, float(m))
        else:
            out = ckks.mul_plain(a, self._plain(a, np.asarray(m, dtype=np.float64)))
        return out, out.level

    def rotate(self, a, la, k: int):
        cap = a.context.batch_size
        if self.auto_rotation_keys:
            self.ensure_rotation_keys(cap, [k])
        if not self.hoist_rotations:
            return ckks.rotate(a, k, self.rot_keys), la
        entry = self._hoisted.get(id(a))
        if entry is None or entry.ct is not a:
            entry = ckks.hoist(a)
            self._hoisted[id(a)] = entry
            if len(self._hoisted) > 2:
                self._hoisted.popitem(last=False)
        return ckks.rotate_hoisted(entry, k, self.rot_keys), la

    def refresh(self, a, la):
        out = ckks.refresh(a, self.policy)
        return out, out.level
