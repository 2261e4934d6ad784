"""Convergence sweeps, full simulations and refresh-depth sweeps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hesim.ckks import CkksContext
from hesim.secure import EncryptedBackend, ExactBackend, STANDARD
from hesim.solvers import (
    AdvectionConfig, GridSpec, RunResult, dry_run, eoc, exact_solution, l2_error, run_simulation,
)

EXACT = "exact"
ENCRYPTED = "encrypted"
BACKENDS = (EXACT, ENCRYPTED)


@dataclass(frozen=True)
class BackendSpec:
    kind: str = EXACT
    l_max: int = 33
    l_refresh: int = 25
    ring_dim: int = 2**13
    scale_bits: int = 40
    eps_boot: float | None = None
    mode: str = STANDARD
    seed: int = 0

    def __post_init__(self):
        if self.kind not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}")
        if not 0 < self.l_refresh <= self.l_max:
            raise ValueError("need 0 < l_refresh <= l_max")

    def build(self, capacity: int, salt: int = 0):
        """Fresh backend; ``salt`` separates random streams of independent cells."""
        seq = np.random.SeedSequence([self.seed, salt])
        if self.kind == EXACT:
            eps = 0.0 if self.eps_boot is None else self.eps_boot
            return ExactBackend(self.l_max, self.l_refresh, self.mode, eps, np.random.default_rng(seq),
                                record_trace=True)
        ctx = CkksContext(ring_dim=self.ring_dim, l_max=self.l_max, l_refresh=self.l_refresh,
                          batch_size=capacity, scale_bits=self.scale_bits)
        if capacity > ctx.ring_dim // 2:
            raise ValueError(f"{capacity} slots exceed ring_dim/2 = {ctx.ring_dim // 2}")
        seed = int(seq.generate_state(1)[0])
        return EncryptedBackend(ctx, seed=seed, mode=self.mode, eps_boot=self.eps_boot,
                                record_trace=True)


def make_grid(dim: int, n: int) -> GridSpec:
    return GridSpec(dim, n)


def convergence(config: AdvectionConfig, dim: int, sizes, backend: BackendSpec) -> list[dict]:
    """Rows of (N, e_N, EOC against the previous N)."""
    if list(sizes) != sorted(set(sizes)) or any(n & (n - 1) for n in sizes):
        raise ValueError("grid sizes must be ascending distinct powers of two")
    rows, prev = [], None
    for n in sizes:
        grid = make_grid(dim, n)
        be = backend.build(grid.size, salt=n)
        r = run_simulation(config, grid, be)
        err = l2_error(r.final, exact_solution(grid, config, r.t_final))
        rows.append({"N": n, "error": err, "eoc": float("nan") if prev is None else eoc(prev, err),
                     "steps": r.steps, "refreshes": len(r.bootstrap_steps)})
        prev = err
    return rows


def solve(config: AdvectionConfig, grid: GridSpec, backend: BackendSpec) -> tuple[RunResult, object]:
    be = backend.build(grid.size)
    return run_simulation(config, grid, be), be


# Linear per-level cost model: an operation whose result sits at level l costs
# weight * (l + 1), i.e. proportional to the number of residue limbs it touches.
COST_WEIGHTS = {"add": 0.01, "mul": 1.0, "rot": 1.0}
REFRESH_WEIGHT = 20.0


def level_cost(trace, l_max: int, weights=None, refresh_weight: float = REFRESH_WEIGHT) -> float:
    """Total cost of a recorded (op, level) trace; a refresh costs refresh_weight * (l_max + 1)."""
    w = COST_WEIGHTS if weights is None else weights
    total = 0.0
    for op, level in trace:
        if op == "refresh":
            total += refresh_weight * (l_max + 1)
        elif op in w:
            total += w[op] * (level + 1)
    return total


def sweep_refresh(config: AdvectionConfig, grid: GridSpec, l_refresh_list, backend: BackendSpec,
                  reserve: int = 4, refresh_weight: float = REFRESH_WEIGHT) -> list[dict]:
    """Error, refresh count and level-weighted cost for each l_refresh.

    The twin error is measured against a noise-free Exact run with the same
    schedule, so it isolates what the refreshes injected.
    """
    if not l_refresh_list:
        raise ValueError("empty l_refresh list")
    cap = 1 << (grid.size - 1).bit_length()
    l_step = dry_run(config, grid, cap, backend.l_max)[0]
    floor = l_step + (1 if backend.mode == STANDARD else 2)
    for lr in l_refresh_list:
        if not floor <= lr <= backend.l_max - reserve:
            raise ValueError(f"l_refresh {lr} outside [{floor}, {backend.l_max - reserve}]")
    rows = []
    for lr in l_refresh_list:
        spec = BackendSpec(**{**backend.__dict__, "l_refresh": lr})
        be = spec.build(cap, salt=lr)
        r = run_simulation(config, grid, be, cap, twin=True)
        rows.append({
            "l_refresh": lr,
            "refreshes": len(r.bootstrap_steps),
            "add": r.counters.total.add, "mul": r.counters.total.mul, "rot": r.counters.total.rot,
            "cost": level_cost(be.trace, spec.l_max, refresh_weight=refresh_weight),
            "error": l2_error(r.final, exact_solution(grid, config, r.t_final)),
            "twin_error": r.twin_error[-1] if r.twin_error else 0.0,
        })
    return rows
