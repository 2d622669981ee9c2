"""Steady traveling-wave profiles.

``compute_znd_profile`` builds the analog ZND wave for the Gaussian forcing
together with the coefficient functions used by the stability analysis.
``compute_asymptotic_profile`` builds the 1D waves of the Arrhenius model
with the local, uniform and nonuniform temperature closures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .model import (
    D,
    U0S,
    AsymptoticParams,
    DomainError,
    IntegrationError,
    ModelParams,
    forcing_adhoc,
    support_cutoff,
)

CLOSURES = ("local", "uniform", "nonuniform")


class ProfileError(RuntimeError):
    """The forcing normalization is inconsistent with a real traveling wave."""


@dataclass(frozen=True)
class GridSpec:
    """Stretched grid on ``[xi_min, 0]``; ``stretch`` is log(max/min spacing)."""

    n: int = 2048
    stretch: float = 2.0
    xi_min: float | None = None

    def build(self, xi_min: float) -> np.ndarray:
        if self.n < 3:
            raise ValueError("grid needs at least 3 points")
        s = np.linspace(0.0, 1.0, self.n)
        if self.stretch == 0:
            xi = xi_min * s
        else:
            xi = xi_min * np.expm1(self.stretch * s) / math.expm1(self.stretch)
        xi = xi[::-1].copy()  # ascending, ends at 0
        xi[-1] = 0.0
        xi[0] = xi_min
        return xi


@dataclass(frozen=True, eq=False)
class SteadyProfile:
    """Discretized ZND wave. Arrays are on the ascending grid ``xi`` ending at 0."""

    params: ModelParams
    xi: np.ndarray
    u0: np.ndarray
    c0: np.ndarray
    b0: np.ndarray
    p: np.ndarray
    f: np.ndarray
    du0: np.ndarray
    D: float = D
    u0s: float = U0S
    delta: float = 0.0
    _dense: Callable | None = field(default=None, repr=False)

    @property
    def xi_min(self) -> float:
        return float(self.xi[0])

    @property
    def cj(self) -> bool:
        return self.delta == 0.0

    def coefficients(self, xi):
        """``(c0, u0', b0, p)`` at arbitrary points of ``[xi_min, 0]``.

        Uses the dense ODE solution, so accuracy matches the grid values.
        """
        if self._dense is None:
            raise RuntimeError("profile has no dense representation")
        xi = np.asarray(xi, dtype=float)
        integral, p = self._dense(xi)
        c0 = np.sqrt(np.maximum(self.D**2 - 2.0 * integral, 0.0))
        fe = forcing_adhoc(np.minimum(xi, 0.0), self.u0s, self.params)
        du0 = np.divide(fe.value, c0, out=np.zeros_like(c0), where=c0 > 0)
        b0 = fe.dvalue_dus + 0.5 * du0
        return c0, du0, b0, p

    def to_csv_rows(self):
        yield ("xi", "u0", "c0", "b0", "p")
        for row in zip(self.xi, self.u0, self.c0, self.b0, self.p):
            yield tuple(float(v) for v in row)


def compute_znd_profile(params: ModelParams, grid: GridSpec | None = None, *,
                        allow_cj: bool = False, rtol: float = 1e-13) -> SteadyProfile:
    """Steady wave ``u0 = D + sqrt(D^2 - 2 int_xi^0 f(z, u0s) dz)``.

    The release integral and ``p = int_xi^0 dz / c0`` are integrated together
    from the shock with an adaptive 8th-order Runge-Kutta scheme.
    """
    grid = grid or GridSpec()
    if not params.overdriven and not allow_cj:
        raise DomainError("zeta = 1 requires allow_cj=True (profile-only work)")
    xi_min = grid.xi_min if grid.xi_min is not None else support_cutoff(params)
    xi = grid.build(xi_min)
    cj = not params.overdriven

    def rhs(x, y):
        f = forcing_adhoc(x, U0S, params).value
        rad = D * D - 2.0 * y[0]
        if cj:
            return [-f, 0.0]
        return [-f, -1.0 / math.sqrt(max(rad, 1e-300))]

    sol = solve_ivp(rhs, (0.0, xi_min), [0.0, 0.0], method="DOP853", rtol=rtol,
                    atol=1e-16, dense_output=True)
    if sol.status != 0:
        raise IntegrationError(f"profile integration failed: {sol.message}", float(sol.t[-1]))
    integral, p = sol.sol(xi)
    rad = D * D - 2.0 * integral
    if rad.min() < -1e-12:
        raise ProfileError(f"negative radicand {rad.min():.3e}: forcing releases more than D^2/2")
    c0 = np.sqrt(np.maximum(rad, 0.0))
    u0 = D + c0
    fe = forcing_adhoc(xi, U0S, params)
    du0 = np.divide(fe.value, c0, out=np.zeros_like(c0), where=c0 > 0)
    b0 = fe.dvalue_dus + 0.5 * du0
    if cj:
        p = np.full_like(xi, np.nan)
        delta = 0.0
    else:
        delta = 0.5 * math.sqrt(1.0 - params.zeta**-2)

    return SteadyProfile(params=params, xi=xi, u0=u0, c0=c0, b0=b0, p=p, f=fe.value,
                         du0=du0, delta=delta, _dense=sol.sol)


def profile_residual(profile: SteadyProfile) -> float:
    """Max interior residual of ``(u0 - D) u0' = f`` with 3-point differences."""
    x, u = profile.xi, profile.u0
    h0 = x[1:-1] - x[:-2]
    h1 = x[2:] - x[1:-1]
    du = (-h1 / (h0 * (h0 + h1)) * u[:-2]
          + (h1 - h0) / (h0 * h1) * u[1:-1]
          + h0 / (h1 * (h0 + h1)) * u[2:])
    res = (u[1:-1] - profile.D) * du - profile.f[1:-1]
    return float(np.max(np.abs(res))) if res.size else 0.0


# -- Arrhenius model with temperature closures --------------------------------

@dataclass(frozen=True, eq=False)
class AsymptoticProfile:
    xi: np.ndarray
    lam: np.ndarray
    u: np.ndarray
    T: np.ndarray
    closure: str
    params: AsymptoticParams


def _closure_temperature(closure, lam, u, params: AsymptoticParams):
    eps = params.epsilon
    if closure == "local":
        return u * eps + lam
    if closure == "uniform":
        return 2.0 * params.D * eps + lam
    return lam


def compute_asymptotic_profile(params: AsymptoticParams, closure: str,
                               xi: np.ndarray | None = None,
                               lam_end: float = 1.0 - 1e-12) -> AsymptoticProfile:
    """1D wave of the Arrhenius model with ``u = D + sqrt(D^2 - lambda)``.

    ``lambda`` is integrated backward from the shock in ``w = -log(1-lambda)``;
    once ``lambda`` reaches ``lam_end`` it is held there (complete reaction).
    """
    if closure not in CLOSURES:
        raise ValueError(f"closure must be one of {CLOSURES}, got {closure!r}")
    if xi is None:
        xi = np.linspace(-10.0, 0.0, 2001)
    xi = np.asarray(xi, dtype=float)
    if np.any(xi > 0):
        raise DomainError("profile grid must satisfy xi <= 0")
    Dw = params.D
    aq = params.theta * params.q
    w_end = -math.log1p(-lam_end)

    def state(w):
        lam = -np.expm1(-w)
        u = Dw + np.sqrt(np.maximum(Dw * Dw - lam, 0.0))
        return lam, u

    def rhs(x, y):
        lam, u = state(y[0])
        T = _closure_temperature(closure, lam, u, params)
        if T < params.T_ignition:
            return [0.0]
        return [-params.k_rate * math.exp(aq * T)]

    def done(x, y):
        return y[0] - w_end
    done.terminal = True

    lo = float(xi.min())
    sol = solve_ivp(rhs, (0.0, lo), [0.0], method="DOP853", rtol=1e-11, atol=1e-13,
                    dense_output=True, events=done)
    if sol.status == -1:
        raise IntegrationError(f"asymptotic profile integration failed: {sol.message}",
                               float(sol.t[-1]))
    x_end = float(sol.t[-1])
    w = np.where(xi >= x_end, sol.sol(np.maximum(xi, x_end))[0], w_end)
    w = np.minimum(w, w_end)
    lam, u = state(w)
    T = _closure_temperature(closure, lam, u, params)
    return AsymptoticProfile(xi=xi, lam=lam, u=u, T=T, closure=closure, params=params)


def closure_distance(a: AsymptoticProfile, b: AsymptoticProfile) -> float:
    """Sup-norm distance between the velocity profiles of two closures."""
    if a.xi.shape != b.xi.shape or np.any(a.xi != b.xi):
        raise ValueError("profiles must share a grid")
    return float(np.max(np.abs(a.u - b.u)))
