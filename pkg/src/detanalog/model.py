"""Model parameters and forcing functions.

All internal work uses the dimensionless variables in which the steady
post-shock state is ``u0s = 1`` and the wave speed is ``D = 1/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import erf

# Wave speed and post-shock state of the steady wave (dimensionless).
D = 0.5
U0S = 1.0

# erfc(z)/2 < 1e-14 for z >= 5.3; sets the left support cutoff of the Gaussian.
_TAIL_Z = 5.3


class DomainError(ValueError):
    """Raised when an argument lies outside the physical domain of the model."""


class IntegrationError(RuntimeError):
    """Raised when an ODE integration fails; ``xi_last`` is the last good point."""

    def __init__(self, message: str, xi_last: float | None = None):
        super().__init__(message)
        self.xi_last = xi_last


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the ad hoc Gaussian forcing.

    ``alpha``, ``beta`` and ``zeta`` are the dimensionless controls; ``q`` and
    ``k`` (heat release and induction length) only matter when converting to
    or from dimensional variables.
    """

    alpha: float
    beta: float
    zeta: float
    q: float = 2.0
    k: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta", "q", "k"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive, got {value!r}")
        if not (math.isfinite(self.zeta) and self.zeta >= 1.0):
            raise DomainError(f"zeta must be >= 1, got {self.zeta!r}")

    @property
    def overdriven(self) -> bool:
        return self.zeta > 1.0

    def require_overdriven(self) -> None:
        """Multidimensional stability is only formulated for zeta > 1."""
        if not self.overdriven:
            raise DomainError("stability analysis requires an overdriven wave (zeta > 1)")

    # -- dimensional scaling -------------------------------------------------
    @property
    def u0s_dimensional(self) -> float:
        """Post-shock state 2D with D = zeta*sqrt(2 * q/2)."""
        return 2.0 * self.zeta * math.sqrt(self.q)

    @property
    def beta_dimensional(self) -> float:
        return self.beta * self.k

    def to_dimensionless(self, x=None, y=None, t=None, u=None, v=None) -> dict:
        """Convert dimensional coordinates/fields to the scaled variables."""
        us = self.u0s_dimensional
        out = {}
        if x is not None:
            out["x"] = np.asarray(x) / self.k
        if y is not None:
            out["y"] = np.asarray(y) * math.sqrt(us) / self.k
        if t is not None:
            out["t"] = np.asarray(t) * us / self.k
        if u is not None:
            out["u"] = np.asarray(u) / us
        if v is not None:
            out["v"] = np.asarray(v) / us**1.5
        return out

    def to_dimensional(self, x=None, y=None, t=None, u=None, v=None) -> dict:
        us = self.u0s_dimensional
        out = {}
        if x is not None:
            out["x"] = np.asarray(x) * self.k
        if y is not None:
            out["y"] = np.asarray(y) * self.k / math.sqrt(us)
        if t is not None:
            out["t"] = np.asarray(t) * self.k / us
        if u is not None:
            out["u"] = np.asarray(u) * us
        if v is not None:
            out["v"] = np.asarray(v) * us**1.5
        return out


@dataclass(frozen=True)
class AsymptoticParams:
    """Parameters of the Arrhenius reaction model used for closure comparisons.

    ``zeta`` sets the traveling-wave speed ``D = zeta`` (the total release of
    ``-lambda_x / 2`` is 1/2, so zeta = 1 is the Chapman-Jouguet speed).
    """

    q: float
    theta: float
    T_ignition: float = 0.0
    k_rate: float = 1.0
    zeta: float = 1.0
    epsilon: float = field(init=False)

    def __post_init__(self):
        if not (math.isfinite(self.q) and self.q > 0):
            raise DomainError(f"q must be positive, got {self.q!r}")
        if not (math.isfinite(self.theta) and self.theta >= 0):
            raise DomainError(f"theta must be >= 0, got {self.theta!r}")
        if not self.k_rate > 0:
            raise DomainError(f"k_rate must be positive, got {self.k_rate!r}")
        if not self.zeta >= 1.0:
            raise DomainError(f"zeta must be >= 1, got {self.zeta!r}")
        object.__setattr__(self, "epsilon", 1.0 / math.sqrt(self.q))

    @property
    def D(self) -> float:
        return self.zeta


@dataclass(frozen=True)
class ForcingEval:
    value: np.ndarray | float
    dvalue_dus: np.ndarray | float


def _check_us(u_s):
    u_s = np.asarray(u_s, dtype=float)
    if np.any(~(u_s > 0)):
        raise DomainError("shock state u_s must be positive (entropy condition)")
    return u_s


def support_cutoff(params: ModelParams, u_s: float = U0S) -> float:
    """Left end of the effective support of the Gaussian forcing."""
    return -(u_s ** (-params.alpha) + 2.0 * _TAIL_Z * math.sqrt(params.beta))


def forcing_adhoc(xi, u_s, params: ModelParams) -> ForcingEval:
    """Gaussian forcing and its exact derivative with respect to ``u_s``.

    Vectorized over ``xi`` and ``u_s`` (broadcast together). Zero for xi > 0.
    """
    u_s = _check_us(u_s)
    xi = np.asarray(xi, dtype=float)
    a, b, z = params.alpha, params.beta, params.zeta
    sb = math.sqrt(b)

    shift = u_s ** (-a)
    dshift = -a * u_s ** (-a - 1.0)
    e = erf(shift / (2.0 * sb))
    amp = 1.0 / (4.0 * z * z * (1.0 + e))
    # d amp / d shift
    derf = np.exp(-(shift / (2.0 * sb)) ** 2) / (math.sqrt(math.pi) * sb)
    damp = -amp * derf / (1.0 + e)

    s = xi + shift
    g = np.exp(-s * s / (4.0 * b)) / math.sqrt(4.0 * math.pi * b)
    dg = -s / (2.0 * b) * g

    ahead = xi > 0
    value = np.where(ahead, 0.0, amp * g)
    dvalue = np.where(ahead, 0.0, (damp * g + amp * dg) * dshift)
    if value.ndim == 0:
        return ForcingEval(float(value), float(dvalue))
    return ForcingEval(value, dvalue)


def forcing_energy(u_s, params: ModelParams, *, dimensional: bool = False) -> float:
    """Total release of the ad hoc forcing, integrated over xi <= 0.

    Dimensionless this is 1/(8 zeta^2) for every ``u_s``; dimensional it is q/2.
    """
    u_s = float(_check_us(u_s))
    shift = u_s ** (-params.alpha)
    sb = math.sqrt(params.beta)
    amp = 1.0 / (4.0 * params.zeta**2 * (1.0 + erf(shift / (2.0 * sb))))
    # half-line mass of the unit Gaussian centred at -shift
    mass = 0.5 * (1.0 + erf(shift / (2.0 * sb)))
    total = amp * mass
    if dimensional:
        # f scales as u0s^2 / k and x as k, with u0s^2 = 4 zeta^2 q
        return total * params.u0s_dimensional**2
    return total


# -- Arrhenius-based nonlocal forcing ------------------------------------------

@dataclass(frozen=True)
class ArrheniusForcing:
    """Reaction progress and forcing from integrating the Arrhenius rate."""

    xi: np.ndarray
    lam: np.ndarray
    value: np.ndarray
    dvalue_dus: np.ndarray


def _arrhenius_rate(lam, u_s, p: AsymptoticParams):
    return p.k_rate * (1.0 - lam) * np.exp(p.theta * p.q * (u_s / math.sqrt(p.q) + lam))


def arrhenius_progress(xi, u_s: float, params: AsymptoticParams, rtol: float = 1e-11) -> np.ndarray:
    """Integrate ``lambda_x = -k (1-lambda) exp(theta q (u_s/sqrt(q) + lambda))``
    from ``lambda(0) = 0`` to the requested points ``xi <= 0``."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if np.any(xi > 0):
        raise DomainError("Arrhenius forcing is only defined for xi <= 0")
    u_s = float(_check_us(u_s))
    lo = float(xi.min())
    if lo == 0.0:
        return np.zeros_like(xi)

    a = params.theta * params.q
    b = params.theta * math.sqrt(params.q) * u_s

    # Integrate w = -log(1 - lambda), which stays well scaled as lambda -> 1.
    def rhs(x, w):
        return -params.k_rate * np.exp(b - a * np.expm1(-w))

    order = np.argsort(-xi)
    sol = solve_ivp(rhs, (0.0, lo), [0.0], method="DOP853", rtol=rtol, atol=1e-13,
                    t_eval=xi[order], dense_output=False)
    if sol.status != 0:
        xi_last = float(sol.t[-1]) if sol.t.size else 0.0
        raise IntegrationError(f"Arrhenius progress integration failed: {sol.message}", xi_last)
    lam = np.empty_like(xi)
    lam[order] = -np.expm1(-sol.y[0])
    return lam


def forcing_arrhenius_nonlocal(xi, u_s: float, params: AsymptoticParams,
                               rel_step: float = 1e-6) -> ArrheniusForcing:
    """Nonlocal forcing ``f = -F_xi / 2`` built from the Arrhenius progress.

    The derivative with respect to ``u_s`` is a one-sided difference of the
    whole construction with step ``rel_step * u_s``.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    lam = arrhenius_progress(xi, u_s, params)
    value = 0.5 * _arrhenius_rate(lam, u_s, params)
    h = rel_step * u_s
    lam_h = arrhenius_progress(xi, u_s + h, params)
    value_h = 0.5 * _arrhenius_rate(lam_h, u_s + h, params)
    return ArrheniusForcing(xi=xi, lam=lam, value=value, dvalue_dus=(value_h - value) / h)
