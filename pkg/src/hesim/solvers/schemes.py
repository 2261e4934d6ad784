"""One time step of each scheme, written with secure-array operations only.

All stencils are arranged as weighted sums of shifted copies so that the
scalar weights are applied once per term; this fixes the operation counts.
"""

from __future__ import annotations

from hesim.secure import circshift_mat, circshift_vec, ew_add, ew_sub, scale_by
from hesim.solvers.types import LAX_WENDROFF, UPWIND, StepCoefficients


def step_upwind_1d(u, c: StepCoefficients):
    """u - cx (u - u shifted by one node)."""
    diff = ew_sub(u, circshift_vec(u, 1))
    return ew_sub(u, scale_by(diff, c.cx))


def step_lw_1d(u, c: StepCoefficients):
    half, sq = c.cx / 2, c.cx**2 / 2
    centre = scale_by(u, 1 - 2 * sq)
    from_right = scale_by(circshift_vec(u, -1), sq - half)
    from_left = scale_by(circshift_vec(u, 1), sq + half)
    return ew_add(ew_add(centre, from_right), from_left)


def step_upwind_2d(u, c: StepCoefficients):
    dx_term = scale_by(ew_sub(u, circshift_mat(u, 1, 0)), c.cx)
    dy_term = scale_by(ew_sub(u, circshift_mat(u, 0, 1)), c.cy)
    return ew_sub(ew_sub(u, dx_term), dy_term)


def step_lw_2d(u, c: StepCoefficients):
    hx, sx = c.cx / 2, c.cx**2 / 2
    hy, sy = c.cy / 2, c.cy**2 / 2
    out = scale_by(u, 1 - 2 * sx - 2 * sy)
    for (k, l), w in (((-1, 0), sx - hx), ((1, 0), sx + hx), ((0, -1), sy - hy), ((0, 1), sy + hy)):
        out = ew_add(out, scale_by(circshift_mat(u, k, l), w))
    corners = ew_sub(circshift_mat(u, -1, -1), circshift_mat(u, -1, 1))
    corners = ew_sub(corners, circshift_mat(u, 1, -1))
    corners = ew_add(corners, circshift_mat(u, 1, 1))
    return ew_add(out, scale_by(corners, c.cross))


STEPS = {
    (1, UPWIND): step_upwind_1d,
    (1, LAX_WENDROFF): step_lw_1d,
    (2, UPWIND): step_upwind_2d,
    (2, LAX_WENDROFF): step_lw_2d,
}

# Levels one step consumes: (dim, scheme, at_capacity) -> l_step.
LEVELS_PER_STEP = {
    (1, UPWIND, True): 1, (1, UPWIND, False): 2,
    (1, LAX_WENDROFF, True): 1, (1, LAX_WENDROFF, False): 2,
    (2, UPWIND, True): 2, (2, UPWIND, False): 2,
    (2, LAX_WENDROFF, True): 2, (2, LAX_WENDROFF, False): 3,
}

# Operations per step: (dim, scheme, at_capacity) -> (add, mul, rot).
OPS_PER_STEP = {
    (1, UPWIND, True): (2, 1, 1), (1, UPWIND, False): (3, 3, 2),
    (1, LAX_WENDROFF, True): (2, 3, 2), (1, LAX_WENDROFF, False): (4, 7, 4),
    (2, UPWIND, True): (5, 4, 3), (2, UPWIND, False): (6, 6, 4),
    (2, LAX_WENDROFF, True): (14, 18, 14), (2, LAX_WENDROFF, False): (24, 38, 24),
}


def step_function(dim: int, scheme: str):
    return STEPS[(dim, scheme)]
