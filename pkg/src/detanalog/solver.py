"""Nonlinear 2D solver in a frame moving with the wave.

The model ``u_t + ((u - V)^2/2)_x + v_y = f``, ``v_x = u_y`` is advanced
with Strang splitting. The nonlocal transverse term ``u_t = -v_y`` is
treated implicitly in cosine space along ``y`` (rigid walls), and the
Burgers part uses a MUSCL/Godunov finite-volume update with the forcing
frozen at the front detected at the start of the step.

Fields are cell centred with shape ``(nx, ny)``: index ``i`` runs along
``x`` and ``j`` along ``y``.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy import fft as sfft

from . import _kernels
from .model import D, U0S, DomainError, ModelParams, forcing_adhoc, support_cutoff
from .steady import SteadyProfile


class ConfigurationError(ValueError):
    """Domain or initial data inconsistent with the requested run."""


class StepError(RuntimeError):
    """A step produced non-finite values; ``state`` holds the last good state."""

    def __init__(self, message: str, state: "SimState | None" = None):
        super().__init__(message)
        self.state = state


class CFLError(RuntimeError):
    """The requested step violates the hard CFL limit."""


@dataclass(frozen=True, eq=False)
class Field2D:
    """Cell-centred scalar field; ``x0`` is the left face of the first column."""

    nx: int
    ny: int
    dx: float
    dy: float
    x0: float
    frame_speed: float
    data: np.ndarray

    def __post_init__(self):
        if not (self.dx > 0 and self.dy > 0):
            raise ValueError("grid spacings must be positive")
        if self.data.shape != (self.nx, self.ny):
            raise ValueError(f"data shape {self.data.shape} != ({self.nx}, {self.ny})")

    @property
    def x(self) -> np.ndarray:
        return self.x0 + (np.arange(self.nx) + 0.5) * self.dx

    @property
    def y(self) -> np.ndarray:
        return (np.arange(self.ny) + 0.5) * self.dy

    @property
    def x_right(self) -> float:
        return self.x0 + self.nx * self.dx

    def with_data(self, data: np.ndarray) -> "Field2D":
        return replace(self, data=data)


@dataclass(frozen=True, eq=False)
class ShockFront:
    """Per-row shock position and post-shock state; NaN where no front was found."""

    xs: np.ndarray
    us: np.ndarray

    @property
    def present(self) -> np.ndarray:
        return np.isfinite(self.xs)


@dataclass(frozen=True)
class SolverOptions:
    cfl: float = 0.8
    cfl_max: float = 1.0
    dt_min: float = 1e-5
    threshold_frac: float = 0.5
    window: int = 4
    forcing: bool = True
    workers: int | None = None


@dataclass(frozen=True, eq=False)
class SimState:
    t: float
    u: Field2D
    v: Field2D
    front: ShockFront
    params: ModelParams
    step_count: int = 0
    options: SolverOptions = field(default_factory=SolverOptions)

    def copy(self) -> "SimState":
        return copy.deepcopy(self)


@dataclass(frozen=True)
class Domain:
    """Extents in the moving frame; the ZND shock starts at ``x_shock``."""

    x_left: float = -25.0
    x_right: float = 5.0
    width: float = 20.0
    dx: float = 0.05
    dy: float = 0.05
    x_shock: float = 0.0

    def shape(self):
        nx = int(round((self.x_right - self.x_left) / self.dx))
        ny = int(round(self.width / self.dy))
        return nx, ny


@dataclass(frozen=True)
class Perturbation:
    """``u -> u (1 + eps * shape(y) * window(x))`` near the shock.

    ``kind='cosine'`` uses ``cos(pi m y / L_y)``; ``kind='noise'`` uses
    standard normal samples per cell from ``seed``. The window is a
    Gaussian of half-width ``width`` centred just behind the shock.
    """

    amplitude: float = 0.0
    kind: str = "cosine"
    mode: int = 1
    width: float = 2.0
    seed: int = 0


# -- transverse operator -------------------------------------------------------

def modified_wavenumbers(ny: int, dy: float) -> np.ndarray:
    """Eigenvalues of minus the wall-Neumann second difference, in DCT-II order."""
    m = np.arange(ny)
    return (2.0 / dy * np.sin(np.pi * m / (2 * ny))) ** 2


def antiderivative(w: np.ndarray, dx: float) -> np.ndarray:
    """``int_x^{X_R} w`` at cell centres for piecewise-constant cells, along axis 0."""
    out = np.empty_like(w)
    tail = np.cumsum(w[::-1], axis=0)[::-1] * dx
    out[:-1] = tail[1:] + 0.5 * dx * w[:-1]
    out[-1] = 0.5 * dx * w[-1]
    return out


def transverse_substep(u: np.ndarray, dx: float, dy: float, dt: float,
                       workers: int | None = None) -> np.ndarray:
    """Backward-Euler step of ``u_t = int_x^{X_R} u_yy`` in cosine space.

    With ``S`` the antiderivative above, each mode solves
    ``(I + dt k_m^2 S) u_new = u_old`` by a right-to-left sweep. ``S + S^T``
    is positive semidefinite, so the update never increases the L2 norm.
    """
    uh = sfft.dct(u, type=2, norm="ortho", axis=1, workers=workers)
    a = dt * modified_wavenumbers(u.shape[1], dy)
    out = _kernels.transverse_sweep(np.ascontiguousarray(uh), a, dx)
    return sfft.idct(out, type=2, norm="ortho", axis=1, workers=workers)


def reconstruct_v_faces(u: np.ndarray, dx: float, dy: float) -> np.ndarray:
    """``v`` on interior y-faces from ``v_x = u_y`` with ``v = 0`` at the right edge."""
    return -antiderivative(np.diff(u, axis=1) / dy, dx)


def reconstruct_v(u: np.ndarray, dx: float, dy: float) -> np.ndarray:
    """Cell-centred ``v``: mean of the adjacent faces, wall faces zero."""
    faces = reconstruct_v_faces(u, dx, dy)
    padded = np.zeros((u.shape[0], u.shape[1] + 1))
    padded[:, 1:-1] = faces
    return 0.5 * (padded[:, 1:] + padded[:, :-1])


# -- Burgers part -------------------------------------------------------------

def _minmod(a, b):
    return np.where(a * b > 0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def godunov_flux(uL, uR, speed):
    """Exact Riemann flux for the convex flux ``(u - speed)^2 / 2``."""
    fl = 0.5 * (np.maximum(uL, speed) - speed) ** 2
    fr = 0.5 * (np.minimum(uR, speed) - speed) ** 2
    return np.maximum(fl, fr)


def burgers_rhs(u: np.ndarray, dx: float, speed: float) -> np.ndarray:
    """``-(F_{i+1/2} - F_{i-1/2})/dx``. Ghosts: zero gradient left, ``u = 0`` right."""
    return _kernels.burgers_rhs(np.ascontiguousarray(u, dtype=float), float(dx), float(speed))


def burgers_rhs_reference(u: np.ndarray, dx: float, speed: float) -> np.ndarray:
    """Array implementation of :func:`burgers_rhs`, kept as a test oracle."""
    g = np.empty((u.shape[0] + 4, u.shape[1]))
    g[2:-2] = u
    g[:2] = u[0]
    g[-2:] = 0.0
    slope = _minmod(g[1:-1] - g[:-2], g[2:] - g[1:-1])
    cells = g[1:-1]
    uL = cells[:-1] + 0.5 * slope[:-1]
    uR = cells[1:] - 0.5 * slope[1:]
    F = godunov_flux(uL, uR, speed)
    return -(F[1:] - F[:-1]) / dx


def forcing_field(u: Field2D, front: ShockFront, params: ModelParams) -> np.ndarray:
    """Forcing ``f(x - x_s(y), u_s(y))``; zero in rows without a front."""
    f = np.zeros((u.nx, u.ny))
    rows = np.flatnonzero(front.present)
    if rows.size == 0:
        return f
    us = front.us[rows]
    # columns outside [min x_s + cutoff, max x_s] carry no forcing
    lo = float(np.min(front.xs[rows] + np.array([support_cutoff(params, s) for s in us])))
    i0 = max(int(math.floor((lo - u.x0) / u.dx)) - 1, 0)
    i1 = min(int(math.ceil((float(np.max(front.xs[rows])) - u.x0) / u.dx)) + 1, u.nx)
    if i1 <= i0:
        return f
    xi = u.x[i0:i1, None] - front.xs[None, rows]
    f[i0:i1, rows] = forcing_adhoc(xi, us[None, :], params).value
    return f


def detect_front(u: Field2D, threshold_frac: float = 0.5, window: int = 4,
                 u0s: float = U0S) -> ShockFront:
    """Rightmost crossing of ``threshold_frac * u0s`` in each row.

    ``x_s`` is linearly interpolated between the straddling cells; ``u_s`` is
    the maximum over the ``window`` cells at and left of the crossing.
    """
    if not np.all(np.isfinite(u.data)):
        raise StepError("non-finite values in u")
    thr = threshold_frac * u0s
    above = u.data > thr
    nx, ny = above.shape
    has = above.any(axis=0)
    # rightmost index above threshold
    i = nx - 1 - np.argmax(above[::-1], axis=0)
    xs = np.full(ny, np.nan)
    us = np.full(ny, np.nan)
    cols = np.flatnonzero(has)
    if cols.size == 0:
        return ShockFront(xs=xs, us=us)
    ic = i[cols]
    x = u.x
    ui = u.data[ic, cols]
    nxt = np.minimum(ic + 1, nx - 1)
    un = np.where(ic + 1 < nx, u.data[nxt, cols], 0.0)
    frac = np.clip((ui - thr) / np.where(ui > un, ui - un, 1.0), 0.0, 1.0)
    xs[cols] = x[ic] + frac * u.dx
    lo = np.maximum(ic - window + 1, 0)
    idx = lo[None, :] + np.arange(window)[:, None]
    idx = np.minimum(idx, ic[None, :])
    us[cols] = u.data[idx, cols[None, :]].max(axis=0)
    return ShockFront(xs=xs, us=us)


# -- state construction and stepping ------------------------------------------

def init_from_znd(profile: SteadyProfile, domain: Domain = Domain(),
                  perturbation: Perturbation = Perturbation(),
                  options: SolverOptions = SolverOptions(),
                  frame_speed: float = D) -> SimState:
    """Sample the steady wave onto the grid and apply an optional perturbation."""
    nx, ny = domain.shape()
    if nx < 8 or ny < 1:
        raise ConfigurationError("grid too small")
    if not (domain.x_left < domain.x_shock < domain.x_right):
        raise ConfigurationError("shock must lie inside the domain")
    if domain.x_shock - domain.x_left < -profile.xi_min:
        raise ConfigurationError(
            f"domain behind the shock ({domain.x_shock - domain.x_left}) shorter than "
            f"the reaction zone ({-profile.xi_min:.3f})")
    if domain.x_right - domain.x_shock < 4 * domain.dx:
        raise ConfigurationError("no run-up room ahead of the shock")
    x = domain.x_left + (np.arange(nx) + 0.5) * domain.dx
    y = (np.arange(ny) + 0.5) * domain.dy
    xi = x - domain.x_shock
    u1 = np.where(xi > 0, 0.0,
                  np.interp(np.maximum(xi, profile.xi_min), profile.xi, profile.u0))
    u = np.repeat(u1[:, None], ny, axis=1)
    eps = perturbation.amplitude
    if eps != 0.0:
        win = np.exp(-((xi + perturbation.width) / perturbation.width) ** 2)[:, None]
        if perturbation.kind == "cosine":
            shape = np.cos(np.pi * perturbation.mode * y / domain.width)[None, :]
        elif perturbation.kind == "noise":
            rng = np.random.default_rng(perturbation.seed)
            shape = rng.standard_normal((nx, ny))
        else:
            raise ConfigurationError(f"unknown perturbation kind {perturbation.kind!r}")
        u = u * (1.0 + eps * shape * win)
    mk = lambda d: Field2D(nx, ny, domain.dx, domain.dy, domain.x_left, frame_speed, d)
    uf = mk(u)
    vf = mk(reconstruct_v(u, domain.dx, domain.dy) if eps != 0.0 else np.zeros_like(u))
    front = detect_front(uf, options.threshold_frac, options.window)
    return SimState(t=0.0, u=uf, v=vf, front=front, params=profile.params, options=options)


def stable_dt(state: SimState) -> float:
    """``cfl * dx / max|u - V|`` clamped to ``[dt_min, dx/2]``."""
    u = state.u
    smax = float(np.max(np.abs(u.data - u.frame_speed)))
    dt = state.options.cfl * u.dx / smax if smax > 0 else 0.5 * u.dx
    return float(min(max(dt, state.options.dt_min), 0.5 * u.dx))


def step(state: SimState, dt: float) -> SimState:
    """One Strang-split step: transverse half, Burgers+forcing, transverse half."""
    u = state.u
    opt = state.options
    smax = float(np.max(np.abs(u.data - u.frame_speed)))
    if smax * dt / u.dx > opt.cfl_max:
        raise CFLError(f"CFL {smax * dt / u.dx:.3f} exceeds {opt.cfl_max}")
    f = forcing_field(u, state.front, state.params) if opt.forcing else 0.0
    w = transverse_substep(u.data, u.dx, u.dy, 0.5 * dt, opt.workers)
    # SSP-RK2 for the Burgers part
    w1 = w + dt * (burgers_rhs(w, u.dx, u.frame_speed) + f)
    w = 0.5 * w + 0.5 * (w1 + dt * (burgers_rhs(w1, u.dx, u.frame_speed) + f))
    w = transverse_substep(w, u.dx, u.dy, 0.5 * dt, opt.workers)
    if not np.all(np.isfinite(w)):
        raise StepError(f"non-finite values at t={state.t + dt}", state)
    uf = u.with_data(w)
    vf = state.v.with_data(reconstruct_v(w, u.dx, u.dy))
    front = detect_front(uf, opt.threshold_frac, opt.window)
    return SimState(t=state.t + dt, u=uf, v=vf, front=front, params=state.params,
                    step_count=state.step_count + 1, options=opt)


@dataclass
class RunResult:
    state: SimState
    snapshots: list
    completed: bool
    error: str | None = None
    dt_history: list = field(default_factory=list)


def run(state: SimState, t_end: float,
        callbacks: Sequence[Callable[[SimState, float], None]] = (),
        snapshot_every: float | None = None) -> RunResult:
    """Advance to ``t_end`` with adaptive ``dt``.

    Every callback is called after each accepted step with ``(state, dt)``.
    Deep-copied snapshots are taken every ``snapshot_every`` time units.
    Step failures stop the run and return the partial result.
    """
    if not t_end > state.t:
        raise DomainError("t_end must exceed the current time")
    snaps = []
    next_snap = state.t if snapshot_every else math.inf
    dts = []
    while state.t < t_end - 1e-12:
        if state.t >= next_snap - 1e-12:
            snaps.append(state.copy())
            next_snap += snapshot_every
        dt = min(stable_dt(state), t_end - state.t)
        while True:
            try:
                new = step(state, dt)
                break
            except CFLError:
                dt *= 0.5
                if dt < state.options.dt_min:
                    return RunResult(state, snaps, False, "dt underflow", dts)
            except StepError as exc:
                return RunResult(state, snaps, False, str(exc), dts)
        state = new
        dts.append(dt)
        for cb in callbacks:
            cb(state, dt)
    if snapshot_every and state.t >= next_snap - 1e-9:
        snaps.append(state.copy())
    return RunResult(state, snaps, True, None, dts)
