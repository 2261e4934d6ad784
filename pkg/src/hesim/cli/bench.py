"""Primitive-operation benchmarks and noise-growth measurements.

Every measurement compares the decrypted result against the same operation on
plain numbers and reports the maximum absolute difference.
"""

from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass

import numpy as np

from hesim import ckks
from hesim.ckks import CkksContext
from hesim.ckks.ciphertext import plain_scale

ROTATIONS = (-1, 5, -25)
BENCH_OPS = ("encode", "encrypt_decrypt", "add_cc", "add_cp", "add_cs", "mul_cc", "mul_cp",
             "mul_cs") + tuple(f"rotate_{k}" for k in ROTATIONS) + ("refresh",)
CORRELATED = "correlated"
UNCORRELATED = "uncorrelated"
BENCH_LENGTH = 64
SCALAR = 1 + math.pi / 30


def bench_vector(length: int = BENCH_LENGTH) -> np.ndarray:
    """sin(2 pi i / L) for i = 1..L."""
    return np.sin(2 * np.pi * np.arange(1, length + 1) / length)


@dataclass(frozen=True)
class BenchSpec:
    ops: tuple[str, ...] = BENCH_OPS
    depths: tuple[int, ...] = (33,)
    repetitions: int = 5
    correlation: str = UNCORRELATED

    def __post_init__(self):
        bad = [op for op in self.ops if op not in BENCH_OPS]
        if bad:
            raise ValueError(f"unknown ops {bad}; choose from {', '.join(BENCH_OPS)}")
        if not self.ops:
            raise ValueError("no ops selected")
        if self.repetitions < 5:
            raise ValueError("repetitions must be at least 5")
        if not self.depths or min(self.depths) < 1:
            raise ValueError("depths must be positive")
        if self.correlation not in (CORRELATED, UNCORRELATED):
            raise ValueError(f"correlation must be {CORRELATED!r} or {UNCORRELATED!r}")


@dataclass(frozen=True)
class ReportRow:
    op: str
    l_max: int
    rep: int
    error: float
    seconds: float
    levels: int

    def as_tuple(self):
        return self.op, self.l_max, self.rep, self.error, self.seconds, self.levels


class _Keys:
    def __init__(self, ctx: CkksContext, seed: int, eps_boot, rotations):
        self.ctx = ctx
        self.rng = np.random.default_rng(seed)
        self.sk, self.pk, self.relin = ckks.keygen(ctx, self.rng)
        self.rot = ckks.rotation_keygen(ctx, self.sk, list(rotations), self.rng) if rotations else None
        self.policy = ckks.RefreshPolicy(ctx, self.sk, self.pk, self.rng, eps_boot)

    def enc(self, values):
        return ckks.encrypt_values(values, self.pk, self.ctx, self.rng)

    def dec(self, ct):
        return ckks.decrypt_values(ct, self.sk)


def _measure(op: str, k: _Keys, v: np.ndarray, w: np.ndarray, ct, ct2):
    """Run one op; returns (result values, reference values, seconds, levels consumed)."""
    ctx, s = k.ctx, SCALAR
    t = time.perf_counter
    if op == "encode":
        t0 = t()
        pt = ckks.encode(v, ctx)
        dt = t() - t0
        return ckks.decode(pt, ctx), v, dt, 0
    if op == "encrypt_decrypt":
        t0 = t()
        out = k.dec(k.enc(v))
        return out, v, t() - t0, 0
    if op.startswith("rotate_"):
        r = int(op.split("_", 1)[1])
        t0 = t()
        out = ckks.rotate(ct, r, k.rot)
        dt = t() - t0
        return k.dec(out), np.roll(v, -r), dt, ct.level - out.level
    if op == "refresh":
        t0 = t()
        out = ckks.refresh(ct, k.policy)
        dt = t() - t0
        return k.dec(out), v, dt, ct.level - out.level
    plain = np.full(v.size, s)
    kind, arg = op.split("_")
    if arg == "cp":
        scale = ct.scale if kind == "add" else plain_scale(ct)
        operand = ckks.encode(plain, ctx, ct.level, scale)
    t0 = t()
    if kind == "add":
        out = ckks.add(ct, ct2 if arg == "cc" else operand if arg == "cp" else s)
    elif arg == "cc":
        out = ckks.mul(ct, ct2, k.relin)
    else:
        out = ckks.mul_plain(ct, operand if arg == "cp" else s)
    dt = t() - t0
    rhs = w if arg == "cc" else plain
    ref = v + rhs if kind == "add" else v * rhs
    return k.dec(out), ref, dt, ct.level - out.level


def run_bench(spec: BenchSpec, ring_dim: int = 2**13, scale_bits: int = 40, l_refresh: int = 25,
              seed: int = 0, eps_boot: float | None = None, timing: bool = True) -> list[ReportRow]:
    """One row per (op, depth, repetition). Keys for each depth come from ``(seed, depth)``,
    so a cell does not depend on which other depths are in the sweep."""
    rows = []
    v = bench_vector()
    plain = np.full(BENCH_LENGTH, SCALAR)
    rotations = [int(op.split("_", 1)[1]) for op in spec.ops if op.startswith("rotate_")]
    for depth in spec.depths:
        ctx = CkksContext(ring_dim=ring_dim, l_max=depth, l_refresh=min(l_refresh, depth),
                          batch_size=BENCH_LENGTH, scale_bits=scale_bits)
        keys = _Keys(ctx, np.random.SeedSequence([seed, depth]), eps_boot, rotations)
        ct = keys.enc(v)
        if spec.correlation == CORRELATED:
            ct2, w = ct, v
        else:
            ct2, w = keys.enc(plain), plain
        for op in spec.ops:
            _measure(op, keys, v, w, ct, ct2)  # warm-up, also compiles kernels
            for rep in range(spec.repetitions):
                got, ref, dt, levels = _measure(op, keys, v, w, ct, ct2)
                err = float(np.abs(got - ref).max())
                rows.append(ReportRow(op, depth, rep, err, dt if timing else 0.0, levels))
    return rows


def summarize(rows: list[ReportRow]) -> dict:
    """Median error and time per (op, depth) cell."""
    cells: dict = {}
    for r in rows:
        cells.setdefault((r.op, r.l_max), []).append(r)
    out = {}
    for (op, depth), rs in cells.items():
        out.setdefault(op, {})[str(depth)] = {
            "median_error": statistics.median(r.error for r in rs),
            "median_seconds": statistics.median(r.seconds for r in rs),
            "mean_seconds": statistics.fmean(r.seconds for r in rs),
            "levels": rs[0].levels,
            "repetitions": len(rs),
        }
    return out


# -- noise growth -----------------------------------------------------------

def loglog_slope(ns, errors) -> float:
    """Least-squares slope of log(error) against log(n)."""
    return float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(errors, float)), 1)[0])


def addition_growth(ctx: CkksContext, ns, correlated: bool, seed: int = 0) -> list[float]:
    """Error of summing n encryptions of the bench vector, for each n in ``ns``.

    Correlated: the same ciphertext added to itself n times. Uncorrelated: n
    independent encryptions.
    """
    rng = np.random.default_rng(seed)
    sk, pk, _ = ckks.keygen(ctx, rng)
    v = bench_vector(ctx.batch_size)
    base = ckks.encrypt_values(v, pk, ctx, rng)
    acc, want, out = base, set(ns), []
    for n in range(2, max(ns) + 1):
        term = base if correlated else ckks.encrypt_values(v, pk, ctx, rng)
        acc = ckks.add(acc, term)
        if n in want:
            out.append(float(np.abs(ckks.decrypt_values(acc, sk) - n * v).max()))
    return out


def multiplication_growth(ctx: CkksContext, ns, correlated: bool, seed: int = 0) -> list[float]:
    """Error after n successive multiplications of an encrypted all-ones vector.

    Correlated: always by the same ciphertext. Uncorrelated: by a fresh
    encryption each time. Needs ``max(ns) <= l_max``.
    """
    if max(ns) > ctx.l_max:
        raise ValueError("not enough levels for that many multiplications")
    rng = np.random.default_rng(seed)
    sk, pk, relin = ckks.keygen(ctx, rng)
    ones = np.ones(ctx.batch_size)
    fixed = ckks.encrypt_values(ones, pk, ctx, rng)
    acc = ckks.encrypt_values(ones, pk, ctx, rng)
    want, out = set(ns), []
    for n in range(1, max(ns) + 1):
        other = fixed if correlated else ckks.encrypt_values(ones, pk, ctx, rng)
        acc = ckks.mul(acc, other, relin)
        if n in want:
            out.append(float(np.abs(ckks.decrypt_values(acc, sk) - 1).max()))
    return out
