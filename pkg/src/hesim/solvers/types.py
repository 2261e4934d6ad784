"""Grid, configuration and result containers for the advection solvers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from hesim.secure.backend import OpCounts

UPWIND = "upwind"
LAX_WENDROFF = "lax_wendroff"
SCHEMES = (UPWIND, LAX_WENDROFF)

# Time step rules. "sum": dt = cfl / (a_x/dx + a_y/dy); "min": dt = cfl * min(dx/a_x, dy/a_y).
# They coincide in 1D.
DT_SUM = "sum"
DT_MIN = "min"


@dataclass(frozen=True)
class GridSpec:
    """Equidistant periodic grid on the unit interval or square; node i sits at i*dx."""

    dim: int
    nx: int
    ny: int | None = None

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if self.nx < 4:
            raise ValueError("need at least 4 nodes per direction")
        if self.dim == 2:
            if self.ny is None:
                object.__setattr__(self, "ny", self.nx)
            if self.ny < 4:
                raise ValueError("need at least 4 nodes per direction")
        elif self.ny is not None:
            raise ValueError("ny is only meaningful in 2D")

    @property
    def dx(self) -> float:
        return 1.0 / self.nx

    @property
    def dy(self) -> float:
        return 1.0 / self.ny if self.dim == 2 else math.nan

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.nx,) if self.dim == 1 else (self.nx, self.ny)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def nodes(self):
        x = np.arange(self.nx) * self.dx
        if self.dim == 1:
            return x
        y = np.arange(self.ny) * self.dy
        return np.meshgrid(x, y, indexing="ij")


def sine_profile(*coords):
    out = np.sin(2 * np.pi * coords[0])
    for c in coords[1:]:
        out = out * np.sin(2 * np.pi * c)
    return out


INITIAL_CONDITIONS: dict[str, Callable] = {"sine": sine_profile}


@dataclass(frozen=True)
class AdvectionConfig:
    a_x: float = 1.0
    a_y: float = 1.0
    cfl: float = 0.5
    t_end: float = 1.0
    scheme: str = LAX_WENDROFF
    u0: str | Callable = "sine"
    dt_rule: str = DT_SUM

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; pick one of {SCHEMES}")
        if self.a_x <= 0 or self.a_y <= 0:
            raise ValueError("advection speeds must be positive")
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if self.dt_rule not in (DT_SUM, DT_MIN):
            raise ValueError(f"unknown dt rule {self.dt_rule!r}")
        if isinstance(self.u0, str) and self.u0 not in INITIAL_CONDITIONS:
            raise ValueError(f"unknown initial condition {self.u0!r}")

    def initial(self) -> Callable:
        return INITIAL_CONDITIONS[self.u0] if isinstance(self.u0, str) else self.u0

    def time_step(self, grid: GridSpec) -> float:
        if grid.dim == 1:
            return self.cfl * grid.dx / self.a_x
        if self.dt_rule == DT_MIN:
            return self.cfl * min(grid.dx / self.a_x, grid.dy / self.a_y)
        return self.cfl / (self.a_x / grid.dx + self.a_y / grid.dy)


@dataclass(frozen=True)
class StepCoefficients:
    """Plaintext scalars of one time step. ``cx = a_x dt/dx``, ``cy = a_y dt/dy``."""

    dt: float
    cx: float
    cy: float = 0.0

    @classmethod
    def build(cls, config: AdvectionConfig, grid: GridSpec, dt: float) -> "StepCoefficients":
        cy = config.a_y * dt / grid.dy if grid.dim == 2 else 0.0
        return cls(dt, config.a_x * dt / grid.dx, cy)

    @property
    def cross(self) -> float:
        """Corner weight of the two-dimensional Lax-Wendroff stencil."""
        return self.cx * self.cy / 4


@dataclass
class StepCounters:
    per_step: list[OpCounts] = field(default_factory=list)
    total: OpCounts = field(default_factory=OpCounts)

    def record(self, delta: OpCounts):
        self.per_step.append(delta)
        self.total = OpCounts(self.total.add + delta.add, self.total.mul + delta.mul,
                              self.total.rot + delta.rot, self.total.refresh + delta.refresh)


@dataclass
class RunResult:
    final: np.ndarray
    steps: int
    dt: float
    t_final: float
    l_step: int
    bootstrap_steps: list[int]
    counters: StepCounters
    step_seconds: list[float]
    twin_error: list[float]
    levels: list[int]
    setup_seconds: float = 0.0
