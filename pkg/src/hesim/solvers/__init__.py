"""Finite-difference advection solvers built on secure arrays."""

from hesim.solvers.run import (
    dry_run,
    eoc,
    exact_solution,
    l2_error,
    refresh_schedule,
    run_simulation,
    step_plan,
)
from hesim.solvers.schemes import (
    LEVELS_PER_STEP,
    OPS_PER_STEP,
    step_function,
    step_lw_1d,
    step_lw_2d,
    step_upwind_1d,
    step_upwind_2d,
)
from hesim.solvers.types import (
    DT_MIN,
    DT_SUM,
    LAX_WENDROFF,
    SCHEMES,
    UPWIND,
    AdvectionConfig,
    GridSpec,
    RunResult,
    StepCoefficients,
    StepCounters,
)

__all__ = [
    "DT_MIN", "DT_SUM", "LAX_WENDROFF", "LEVELS_PER_STEP", "OPS_PER_STEP", "SCHEMES", "UPWIND",
    "AdvectionConfig", "GridSpec", "RunResult", "StepCoefficients", "StepCounters", "dry_run",
    "eoc", "exact_solution", "l2_error", "refresh_schedule", "run_simulation", "step_function",
    "step_lw_1d", "step_lw_2d", "step_plan", "step_upwind_1d", "step_upwind_2d",
]
