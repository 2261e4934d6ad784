"""Time loop with level-driven refresh scheduling, plus error metrics."""

from __future__ import annotations

import math
import time

import numpy as np

from hesim.secure import (
    Backend, EncryptedBackend, ExactBackend, dec_matrix, dec_vector, enc_matrix, enc_vector,
    needs_refresh, next_pow2, refresh,
)
from hesim.solvers.schemes import LEVELS_PER_STEP, step_function
from hesim.solvers.types import AdvectionConfig, GridSpec, RunResult, StepCoefficients, StepCounters


def exact_solution(grid: GridSpec, config: AdvectionConfig, t: float) -> np.ndarray:
    """Initial profile transported by (a_x, a_y) t, wrapped onto the unit period."""
    u0 = config.initial()
    if grid.dim == 1:
        return u0(np.mod(grid.nodes() - config.a_x * t, 1.0))
    x, y = grid.nodes()
    return u0(np.mod(x - config.a_x * t, 1.0), np.mod(y - config.a_y * t, 1.0))


def l2_error(u, u_exact) -> float:
    """Root mean square of the nodal difference."""
    u, v = np.asarray(u, dtype=float), np.asarray(u_exact, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch {u.shape} vs {v.shape}")
    return float(np.sqrt(np.mean((u - v) ** 2)))


def eoc(e_coarse: float, e_fine: float) -> float:
    """log2(e_N / e_2N); NaN when either error is not positive."""
    if not (e_coarse > 0 and e_fine > 0):
        return math.nan
    return math.log2(e_coarse / e_fine)


def step_plan(config: AdvectionConfig, grid: GridSpec) -> tuple[float, int, float]:
    """(dt, number of steps, length of the last step)."""
    dt = config.time_step(grid)
    ratio = config.t_end / dt
    steps = max(1, math.ceil(ratio - 1e-9))
    last = config.t_end - (steps - 1) * dt
    if abs(last - dt) <= 1e-9 * dt:
        last = dt
    return dt, steps, last


def _encrypt(grid: GridSpec, values: np.ndarray, backend: Backend, capacity: int | None):
    if grid.dim == 1:
        return enc_vector(values, backend, capacity)
    return enc_matrix(values, backend, capacity)


def _decrypt(grid: GridSpec, x) -> np.ndarray:
    return dec_vector(x) if grid.dim == 1 else dec_matrix(x)


def dry_run(config: AdvectionConfig, grid: GridSpec, capacity: int | None = None,
            l_max: int = 33) -> tuple[int, set[int], tuple[int, int, int]]:
    """Run one step on a fresh Exact backend: (levels used, rotation shifts, op counts)."""
    be = ExactBackend(l_max=l_max, l_refresh=l_max)
    u = _encrypt(grid, np.zeros(grid.shape), be, capacity)
    out = step_function(grid.dim, config.scheme)(u, StepCoefficients.build(config, grid, 1e-3))
    return u.level - out.level, {k for _, k in be.rotations}, be.counts.as_tuple()


def run_simulation(config: AdvectionConfig, grid: GridSpec, backend: Backend,
                   capacity: int | None = None, twin: bool | None = None) -> RunResult:
    """Advance the initial profile to ``t_end``, refreshing whenever the next step would
    leave fewer levels than the refresh needs to start.

    With ``twin`` (default: on for encrypted runs) an Exact backend follows the same
    schedule and the per-step max-norm gap to it is recorded.
    """
    t0 = time.perf_counter()
    cap = next_pow2(grid.size) if capacity is None else capacity
    l_step, shifts, _ = dry_run(config, grid, cap, backend.l_max)
    expected = LEVELS_PER_STEP[(grid.dim, config.scheme, grid.size == cap)]
    if l_step != expected:
        raise AssertionError(f"dry run used {l_step} levels per step, expected {expected}")
    if isinstance(backend, EncryptedBackend):
        backend.ensure_rotation_keys(cap, shifts)
    if twin is None:
        twin = not isinstance(backend, ExactBackend)

    dt, steps, last = step_plan(config, grid)
    coeffs = StepCoefficients.build(config, grid, dt)
    last_coeffs = coeffs if last == dt else StepCoefficients.build(config, grid, last)
    step = step_function(grid.dim, config.scheme)

    u0 = exact_solution(grid, config, 0.0)
    u = _encrypt(grid, u0, backend, cap)
    shadow = None
    if twin:
        shadow_be = ExactBackend(l_max=backend.l_max, l_refresh=backend.l_refresh, mode=backend.mode)
        shadow = _encrypt(grid, u0, shadow_be, cap)
    setup = time.perf_counter() - t0

    counters = StepCounters()
    boots, seconds, gaps, levels = [], [], [], []
    t = 0.0
    for n in range(1, steps + 1):
        before = backend.counts.copy()
        t1 = time.perf_counter()
        if needs_refresh(u.level, l_step, backend):
            u = refresh(u)
            boots.append(n)
            if shadow is not None:
                shadow = refresh(shadow)
        c = last_coeffs if n == steps else coeffs
        u = step(u, c)
        seconds.append(time.perf_counter() - t1)
        counters.record(backend.counts - before)
        levels.append(u.level)
        t += c.dt
        if shadow is not None:
            shadow = step(shadow, c)
            gaps.append(float(np.abs(_decrypt(grid, u) - _decrypt(grid, shadow)).max()))
    return RunResult(final=_decrypt(grid, u), steps=steps, dt=dt, t_final=t, l_step=l_step,
                     bootstrap_steps=boots, counters=counters, step_seconds=seconds,
                     twin_error=gaps, levels=levels, setup_seconds=setup)


def refresh_schedule(l_max: int, l_refresh: int, l_step: int, steps: int,
                     min_level: int = 1) -> list[int]:
    """Step indices (1-based) preceded by a refresh, from level arithmetic alone."""
    level, out = l_max, []
    for n in range(1, steps + 1):
        if level - l_step < min_level:
            level = l_refresh
            out.append(n)
        level -= l_step
    return out
