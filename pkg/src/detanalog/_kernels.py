"""Compiled inner loops of the 2D solver."""

import numpy as np
from numba import njit


@njit(cache=True)
def _minmod(a, b):
    if a * b <= 0.0:
        return 0.0
    return a if abs(a) < abs(b) else b


@njit(cache=True)
def _flux(uL, uR, speed):
    a = max(uL, speed) - speed
    b = min(uR, speed) - speed
    return 0.5 * max(a * a, b * b)


@njit(cache=True)
def burgers_rhs(u, dx, speed):
    """MUSCL-minmod/Godunov divergence. Ghosts: zero gradient left, zero right."""
    nx, ny = u.shape
    out = np.empty_like(u)
    for j in range(ny):
        # g(k) is the padded row with two ghosts on each side
        def g(k):
            if k < 2:
                return u[0, j]
            if k >= nx + 2:
                return 0.0
            return u[k - 2, j]
        # face between padded cells k and k+1, k = 1 .. nx+1
        prev_F = 0.0
        for k in range(1, nx + 2):
            gl, gc, gr = g(k - 1), g(k), g(k + 1)
            sl = _minmod(gc - gl, gr - gc)
            gr2 = g(k + 2)
            sr = _minmod(gr - gc, gr2 - gr)
            F = _flux(gc + 0.5 * sl, gr - 0.5 * sr, speed)
            if k >= 2:
                out[k - 2, j] = -(F - prev_F) / dx
            prev_F = F
    return out


@njit(cache=True)
def transverse_sweep(uh, a, dx):
    """Solve ``(I + a_m S) w = uh`` mode by mode, sweeping from the right edge."""
    nx, ny = uh.shape
    out = np.empty_like(uh)
    G = np.zeros(ny)
    denom = 1.0 + 0.5 * dx * a
    for i in range(nx - 1, -1, -1):
        for j in range(ny):
            w = (uh[i, j] - a[j] * G[j]) / denom[j]
            out[i, j] = w
            G[j] += dx * w
    return out
