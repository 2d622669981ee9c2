"""Linear stability of the steady wave to transverse perturbations.

The stability function is

    R(sigma, l) = theta(0) . [sigma, -i l u0s / 2]
                  - int_{xi_min}^0 theta . [sigma b0 / c0, -i l u0' / 2] dz

where ``theta`` solves the adjoint system ``theta' = -C^T theta`` and decays at
``-infinity``.  The adjoint is integrated from ``xi_min`` to the shock in the
scaled variable ``phi = exp(sigma p) theta`` (``p = int_xi^0 dz/c0``), which
strips off the ``sigma/c0`` growth common to both components.  The running
integral is carried as ``K = exp(sigma p) J`` so nothing oscillates at high
``Im sigma``; since ``p(0) = 0`` the values at the shock are unchanged.

The sign of the ``u0'`` term follows from eliminating ``V_s`` with the
linearized jump condition ``sigma V_s = -i l u0s U_s / 2``; it is confirmed by
``linearized_growth_oracle``, which marches the linear PDE directly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .model import DomainError, IntegrationError
from .steady import SteadyProfile

SIGMA_FLOOR = 1e-3

# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = _B - np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
                    187 / 2100, 1 / 40])


def adjoint_eigenvalues(sigma, ell, delta):
    """Eigenvalues ``(lambda1, lambda2)`` of the far-field matrix ``C_{-inf}``."""
    ell = np.asarray(ell, dtype=float)
    root = np.sqrt(4.0 * delta * ell**2 + np.asarray(sigma, dtype=complex) ** 2)
    l1 = (-sigma - root) / (2.0 * delta)
    # product form avoids cancellation in -sigma + root at small ell
    return l1, -ell**2 / (delta * l1)


def adjoint_seed(sigma, ell, delta):
    """Far-field eigenvector of the adjoint system that decays at ``-infinity``."""
    sigma = np.asarray(sigma, dtype=complex)
    root = np.sqrt(4.0 * ell * ell * delta + sigma * sigma)
    return 0.5 * (sigma + root), np.full_like(sigma, 1j * ell)


@dataclass
class AdjointSolution:
    """Adjoint solution for one ``(sigma, ell)``.

    ``theta1`` holds ``theta`` on ``xi`` divided by ``exp(log_scale)``; the
    scale is kept separate so that deep far fields do not overflow.
    """

    xi: np.ndarray
    theta1: np.ndarray
    log_scale: np.ndarray
    lambda1: complex
    lambda2: complex
    sigma: complex
    ell: float
    R: complex = 0j


@dataclass
class SpectralRoot:
    sigma: complex
    ell: float
    residual: float
    iterations: int = 0
    converged: bool = True


@dataclass
class DispersionCurve:
    ell_values: np.ndarray
    growth: np.ndarray
    frequency: np.ndarray
    residual: np.ndarray
    roots: list = field(default_factory=list)

    def argmax(self):
        i = int(np.argmax(self.growth))
        return float(self.ell_values[i]), float(self.growth[i])

    def to_csv_rows(self):
        yield ("ell", "sigma_r", "sigma_i", "residual")
        for row in zip(self.ell_values, self.growth, self.frequency, self.residual):
            yield tuple(float(v) for v in row)


def _check_args(profile: SteadyProfile, sigma):
    if profile.cj or profile.delta <= 0:
        raise DomainError("stability requires an overdriven profile (delta > 0)")
    sigma = np.atleast_1d(np.asarray(sigma, dtype=complex))
    if np.any(sigma.real <= 0):
        raise DomainError("the Laplace variable must satisfy Re(sigma) > 0")
    return sigma


def _integrate(profile, sigma, ell, *, rtol=1e-9, atol=1e-12, seed_scale=1.0,
               record=False, max_steps=200000):
    """Batched adaptive integration of the scaled adjoint system.

    Returns ``(phi1, phi2, K, log_scale)`` at the shock plus, when ``record``
    is set, ``phi`` and ``log_scale`` at every profile grid point (steps are
    shortened to land on them).
    """
    s1, s2 = adjoint_seed(sigma, ell, profile.delta)
    y = np.empty((3, sigma.size), dtype=complex)
    y[0] = s1 * seed_scale
    y[1] = s2 * seed_scale
    y[2] = 0.0
    # start at unit size so the absolute tolerance means the same for any seed
    norm0 = np.maximum(np.abs(y[0]), np.abs(y[1]))
    y /= norm0
    log_scale = np.log(norm0)
    il = 1j * ell

    def rhs(x, y):
        c0, du0, b0, _ = profile.coefficients(x)
        c0 = float(c0)
        du0 = float(du0)
        b0 = float(b0)
        inv = 1.0 / c0
        out = np.empty_like(y)
        out[0] = du0 * inv * y[0] - il * y[1]
        out[1] = il * inv * y[0] - sigma * inv * y[1]
        out[2] = -sigma * inv * y[2] + sigma * (b0 * inv) * y[0] - 0.5 * il * du0 * y[1]
        return out

    x = profile.xi_min
    x_end = 0.0
    h = min(0.01, (x_end - x) / 10)
    k = [None] * 7
    k[0] = rhs(x, y)
    rec_y, rec_s = [], []
    stops = profile.xi
    nxt = 1
    if record:
        rec_y.append(y[:2].copy())
        rec_s.append(log_scale.copy())
        max_steps += stops.size
    steps = 0
    while x < x_end:
        if steps > max_steps:
            raise IntegrationError("adjoint integration exceeded the step budget", x)
        h = min(h, x_end - x)
        h_free = h
        if record:
            h = min(h, stops[nxt] - x)
        if h < 1e-12:
            raise IntegrationError("adjoint integration step size underflow", x)
        for i in range(1, 7):
            yi = y + h * sum(a * k[j] for j, a in enumerate(_A[i]) if a != 0.0)
            k[i] = rhs(x + _C[i] * h, yi)
        y_new = y + h * sum(b * k[j] for j, b in enumerate(_B) if b != 0.0)
        err = h * sum(e * k[j] for j, e in enumerate(_E))
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        en = math.sqrt(float(np.max(np.mean(np.abs(err / scale) ** 2, axis=0))))
        steps += 1
        if en <= 1.0:
            landed = record and h == stops[nxt] - x
            x = stops[nxt] if landed else x + h
            y = y_new
            k[0] = k[6]
            norm = np.maximum(np.abs(y[0]), np.abs(y[1]))
            big = norm > 10.0
            if np.any(big):
                y[:, big] /= norm[big]
                k[0][:, big] /= norm[big]
                log_scale[big] += np.log(norm[big])
            if landed:
                rec_y.append(y[:2].copy())
                rec_s.append(log_scale.copy())
                nxt += 1
            fac = 0.9 * en ** -0.2 if en > 0 else 5.0
            # a step clipped at a grid point does not shrink the next one
            h = max(h, h_free) if landed and en < 1.0 else h
            h *= min(5.0, max(0.2, fac))
        else:
            h *= max(0.2, 0.9 * en ** -0.2)
    out = (y[0], y[1], y[2], log_scale)
    if record:
        return out, (np.array(rec_y), np.array(rec_s))
    return out


def _assemble(profile, sigma, ell, phi1, phi2, K, log_scale):
    r = phi1 * sigma - 0.5j * ell * profile.u0s * phi2 - K
    # restore the renormalization so R stays analytic in sigma
    return r * np.exp(np.minimum(log_scale, 700.0))


def stability_function(profile: SteadyProfile, sigma, ell: float, *, rtol=1e-9,
                       seed_scale=1.0):
    """Evaluate ``R(sigma, ell)``; vectorized over ``sigma``."""
    scalar = np.ndim(sigma) == 0
    s = _check_args(profile, sigma)
    phi1, phi2, K, ls = _integrate(profile, s, float(ell), rtol=rtol, seed_scale=seed_scale)
    r = _assemble(profile, s, float(ell), phi1, phi2, K, ls)
    return complex(r[0]) if scalar else r


def integrate_adjoint(profile: SteadyProfile, sigma: complex, ell: float, *,
                      rtol=1e-9) -> AdjointSolution:
    """Solve the adjoint problem and return ``theta`` on the profile grid."""
    s = _check_args(profile, sigma)
    (phi1, phi2, K, ls), (yr, sr) = _integrate(profile, s, float(ell), rtol=rtol, record=True)
    sig = complex(s[0])
    xi = profile.xi
    ph1, ph2, ls_grid = yr[:, 0, 0], yr[:, 1, 0], sr[:, 0]
    # undo the exp(sigma p) factor; it is folded into the complex amplitude
    # except for its modulus, which goes to the log-scale
    phase = np.exp(-1j * sig.imag * profile.p)
    theta = np.vstack([ph1 * phase, ph2 * phase])
    log_scale = ls_grid - sig.real * profile.p
    l1, l2 = adjoint_eigenvalues(sig, float(ell), profile.delta)
    R = complex(_assemble(profile, s, float(ell), phi1, phi2, K, ls)[0])
    return AdjointSolution(xi=xi, theta1=theta, log_scale=log_scale, lambda1=complex(l1),
                           lambda2=complex(l2), sigma=sig, ell=float(ell), R=R)


# -- 1D relation by direct quadrature ------------------------------------------

class _Dispersion1D:
    """``c0(0) - int b0 exp(-sigma p) dz`` on composite Gauss-Legendre panels."""

    def __init__(self, profile: SteadyProfile, panels: int = 1024, order: int = 8):
        if profile.cj:
            raise DomainError("1D relation requires an overdriven profile")
        nodes, weights = np.polynomial.legendre.leggauss(order)
        # refine panels near the shock where b0 varies fastest
        edges = profile.xi_min * (np.expm1(2.0 * np.linspace(1, 0, panels + 1)) / math.expm1(2.0))
        a, b = edges[:-1], edges[1:]
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        z = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
        self.w = (half[:, None] * weights[None, :]).ravel()
        _, _, self.b0, self.p = profile.coefficients(z)
        self.c00 = float(profile.c0[-1])

    def __call__(self, sigma):
        sigma = np.atleast_1d(np.asarray(sigma, dtype=complex))
        out = np.empty(sigma.shape, dtype=complex)
        wb = self.w * self.b0
        for i in range(0, sigma.size, 128):
            chunk = sigma[i:i + 128]
            out[i:i + 128] = self.c00 - np.exp(-np.outer(chunk, self.p)) @ wb
        return out


def dispersion_1d(profile: SteadyProfile, sigma):
    """Residual of the 1D pole relation ``c0(0) = int b0 exp(-sigma p) dz``."""
    scalar = np.ndim(sigma) == 0
    r = _Dispersion1D(profile)(sigma)
    return complex(r[0]) if scalar else r


# -- root finding ---------------------------------------------------------------

def muller(func, z0, z1, z2, *, tol=1e-12, ftol=1e-8, maxiter=60):
    """Muller's method for a complex scalar function.

    Returns ``(root, |f(root)|, iterations, converged)``.
    """
    with np.errstate(all="ignore"):
        return _muller(func, z0, z1, z2, tol, ftol, maxiter)


def _muller(func, z0, z1, z2, tol, ftol, maxiter):
    f0, f1, f2 = func(z0), func(z1), func(z2)
    it = 0
    for it in range(1, maxiter + 1):
        h1, h2 = z1 - z0, z2 - z1
        if h1 == 0 or h2 == 0 or (h1 + h2) == 0:
            break
        d1, d2 = (f1 - f0) / h1, (f2 - f1) / h2
        a = (d2 - d1) / (h2 + h1)
        b = a * h2 + d2
        disc = cmath.sqrt(b * b - 4.0 * a * f2)
        den = b + disc if abs(b + disc) >= abs(b - disc) else b - disc
        if den == 0:
            break
        dz = -2.0 * f2 / den
        z3 = z2 + dz
        f3 = func(z3)
        z0, z1, z2 = z1, z2, z3
        f0, f1, f2 = f1, f2, f3
        if abs(dz) <= tol * max(1.0, abs(z2)) and abs(f2) < ftol:
            return z2, abs(f2), it, True
        if not np.isfinite(f2):
            break
    return z2, abs(f2), it, abs(f2) < ftol


@dataclass(frozen=True)
class SearchBox:
    re: tuple = (SIGMA_FLOOR, 2.0)
    im: tuple = (0.0, 10.0)
    n_re: int = 40
    n_im: int = 80
    # only the entire 1D relation may be searched in Re(sigma) <= 0
    allow_left: bool = False

    def __post_init__(self):
        if self.re[0] <= 0 and not self.allow_left:
            raise DomainError("search box must lie in Re(sigma) > 0")
        if self.re[0] >= self.re[1] or self.im[0] >= self.im[1]:
            raise ValueError("search box must have positive extent")

    def grid(self):
        re = np.linspace(*self.re, self.n_re)
        im = np.linspace(*self.im, self.n_im)
        return re[:, None] + 1j * im[None, :]

    def contains(self, z, pad=0.0):
        return (self.re[0] - pad <= z.real <= self.re[1] + pad
                and self.im[0] - pad <= z.imag <= self.im[1] + pad)


def _local_minima(mag):
    """Indices of interior-or-edge local minima of a 2D array (8-neighbourhood)."""
    padded = np.pad(mag, 1, constant_values=np.inf)
    centre = padded[1:-1, 1:-1]
    is_min = np.ones_like(centre, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            nb = padded[1 + di:padded.shape[0] - 1 + di, 1 + dj:padded.shape[1] - 1 + dj]
            is_min &= centre < nb
    return np.argwhere(is_min)


def _polish_all(func, seeds, box, spacing, *, ftol, dedup):
    roots = []
    for z in seeds:
        h = spacing
        root, res, it, ok = muller(func, z - h, z + 1j * h, z, ftol=ftol)
        if not ok or not box.contains(root, pad=spacing):
            continue
        if root.real <= 0 and not box.allow_left:
            continue
        if any(abs(root - r[0]) < dedup for r in roots):
            continue
        roots.append((root, res, it))
    return roots


def find_roots(profile: SteadyProfile, ell: float, search_box: SearchBox | None = None,
               *, ftol=1e-8, seeds=(), rtol=1e-9, seed_scale=1.0,
               dedup=1e-6) -> list[SpectralRoot]:
    """Roots of ``R(., ell)`` in ``search_box``: coarse scan of ``|R|`` then Muller.

    ``seeds`` adds extra starting points (e.g. the root at a neighbouring ell).
    ``R`` is divided by the seed amplitude so ``ftol`` does not depend on it.
    """
    box = search_box or SearchBox()
    grid = box.grid()
    vals = stability_function(profile, grid.ravel(), ell, rtol=rtol,
                              seed_scale=seed_scale).reshape(grid.shape)
    norm = _theta0_norm(profile, grid, ell, seed_scale)
    mag = np.abs(vals / norm)
    cand = [grid[i, j] for i, j in _local_minima(mag)]
    cand = list(seeds) + cand
    spacing = 0.5 * min(np.ptp(box.re) / max(box.n_re - 1, 1), np.ptp(box.im) / max(box.n_im - 1, 1))

    def func(z):
        if z.real <= 0:
            z = complex(SIGMA_FLOOR * 0.5, z.imag)
        return stability_function(profile, z, ell, rtol=rtol, seed_scale=seed_scale) \
            / _theta0_norm(profile, np.array([z]), ell, seed_scale)[0]

    found = _polish_all(func, cand, box, spacing, ftol=ftol, dedup=dedup)
    roots = [SpectralRoot(sigma=z, ell=float(ell), residual=res, iterations=it)
             for z, res, it in found]
    roots.sort(key=lambda r: -r.sigma.real)
    return roots


def _theta0_norm(profile, sigma, ell, seed_scale):
    """Seed amplitude; dividing by it keeps R analytic and independent of the seed scale."""
    s1, _ = adjoint_seed(np.asarray(sigma), ell, profile.delta)
    return s1 * seed_scale


def dispersion_1d_roots(profile: SteadyProfile, search_box: SearchBox | None = None,
                        *, ftol=1e-10, seeds=()) -> list[SpectralRoot]:
    """Roots of the 1D relation by direct quadrature (no ODE solve)."""
    box = search_box or SearchBox()
    rel = _Dispersion1D(profile)
    grid = box.grid()
    mag = np.abs(rel(grid.ravel())).reshape(grid.shape)
    cand = list(seeds) + [grid[i, j] for i, j in _local_minima(mag)]
    spacing = 0.5 * min(np.ptp(box.re) / max(box.n_re - 1, 1), np.ptp(box.im) / max(box.n_im - 1, 1))
    found = _polish_all(lambda z: complex(rel(z)[0]), cand, box, spacing, ftol=ftol, dedup=1e-6)
    roots = [SpectralRoot(sigma=z, ell=0.0, residual=res, iterations=it) for z, res, it in found]
    roots.sort(key=lambda r: -r.sigma.real)
    return roots


def dispersion_curve(profile: SteadyProfile, ell_range=(0.0, 1.2), n_ell: int = 40,
                     search_box: SearchBox | None = None, *, rescan: bool = True,
                     ftol=1e-8) -> DispersionCurve:
    """Growth rate ``max Re sigma`` over a range of transverse wavenumbers.

    Each ell is seeded with the roots found at the previous one; the coarse
    scan runs at every ell when ``rescan`` is set, otherwise only when
    continuation finds nothing. No unstable root is recorded as growth 0.
    """
    if n_ell < 2:
        raise ValueError("n_ell must be >= 2")
    box = search_box or SearchBox()
    ells = np.linspace(ell_range[0], ell_range[1], n_ell)
    growth = np.zeros(n_ell)
    freq = np.zeros(n_ell)
    resid = np.zeros(n_ell)
    all_roots = []
    prev: list[SpectralRoot] = []
    for i, ell in enumerate(ells):
        roots = []
        if prev and not rescan:
            roots = _continue_roots(profile, ell, prev, box, ftol)
        if not roots:
            roots = find_roots(profile, ell, box, ftol=ftol, seeds=[r.sigma for r in prev])
        all_roots.append(roots)
        if roots:
            best = max(roots, key=lambda r: r.sigma.real)
            growth[i] = best.sigma.real
            freq[i] = best.sigma.imag
            resid[i] = best.residual
        prev = roots
    return DispersionCurve(ell_values=ells, growth=growth, frequency=freq, residual=resid,
                           roots=all_roots)


def _continue_roots(profile, ell, prev, box, ftol):
    def func(z):
        if z.real <= 0:
            z = complex(SIGMA_FLOOR * 0.5, z.imag)
        return stability_function(profile, z, ell) / _theta0_norm(profile, np.array([z]), ell, 1.0)[0]

    found = _polish_all(func, [r.sigma for r in prev], box, 1e-2, ftol=ftol, dedup=1e-6)
    return [SpectralRoot(sigma=z, ell=float(ell), residual=res, iterations=it)
            for z, res, it in found]


# -- time-marching oracle ------------------------------------------------------

@dataclass
class GrowthFit:
    growth: float
    frequency: float
    exponents: np.ndarray
    amplitudes: np.ndarray
    t: np.ndarray
    us: np.ndarray


def _upwind_derivative(u, h):
    """d/dtau for transport toward decreasing tau (information from larger tau).

    Fifth-order upwind-biased interior stencil, third-order one-sided closure
    at the shock, zero inflow beyond the far end.
    """
    n = u.shape[0]
    g = np.concatenate([u, np.zeros(3, dtype=u.dtype)])
    d = np.empty_like(u)
    k = np.arange(2, n)
    d[2:] = (3 * g[k - 2] - 30 * g[k - 1] - 20 * g[k] + 60 * g[k + 1] - 15 * g[k + 2]
             + 2 * g[k + 3]) / (60 * h)
    for k in (0, 1):
        d[k] = (-11 * g[k] + 18 * g[k + 1] - 9 * g[k + 2] + 2 * g[k + 3]) / (6 * h)
    return d


def linearized_growth_oracle(profile: SteadyProfile, ell: float, T_horizon: float = 200.0,
                             *, h: float = 0.05, p_max: float | None = None,
                             init=None, fit_order: int = 4) -> GrowthFit:
    """Growth rate of the ell-mode by direct time integration of the linear problem.

    The perturbation is marched on a uniform grid in ``tau = p(xi)``, the
    travel time to the shock, where the transport speed is exactly 1:

        u_t = u_tau - u0' u - i l v + b0 u_s
        v(tau) = v_s u0(xi)/u0s - i l int_0^tau u c0 dtau'
        v_s = -i l u0s s,   s_t = u_s / 2

    The growth rate and frequency come from a linear-prediction (Prony) fit
    of ``u_s(t)`` over the second half of the horizon.
    """
    if ell < 0:
        raise DomainError("ell must be >= 0")
    if profile.cj:
        raise DomainError("the oracle requires an overdriven profile")
    # u_s(t) only sees tau <= t, so a far field of depth T_horizon removes
    # any influence of the truncation on the fit
    p_edge = float(profile.p[0])
    P = max(p_edge, T_horizon) + 1.0 if p_max is None else p_max
    tau = np.arange(0.0, P, h)
    inside = tau <= p_edge
    # invert p(xi) on the profile grid (p decreases monotonically in xi)
    xi = np.where(inside, np.interp(tau, profile.p[::-1], profile.xi[::-1]),
                  profile.xi_min - profile.delta * (tau - p_edge))
    c0, du0, b0, _ = profile.coefficients(np.maximum(xi, profile.xi_min))
    c0 = np.where(inside, c0, profile.delta)
    du0 = np.where(inside, du0, 0.0)
    b0 = np.where(inside, b0, 0.0)
    u0 = profile.D + c0
    il = 1j * ell
    # trapezoid weights for int_0^tau (.) c0 dtau'
    wc = c0 * h

    def cumtrap(w):
        g = w * wc
        out = np.zeros_like(g)
        out[1:] = np.cumsum(0.5 * (g[1:] + g[:-1]))
        return out

    def rhs(state):
        u, s = state[:-1], state[-1]
        us = u[0]
        vs = -il * profile.u0s * s
        v = vs * u0 / profile.u0s - il * cumtrap(u)
        du = _upwind_derivative(u, h) - du0 * u - il * v + b0 * us
        return np.concatenate([du, [0.5 * us]])

    if init is None:
        init = np.exp(-((xi + 1.0) / 0.5) ** 2)
    state = np.concatenate([np.asarray(init, dtype=complex), [0j]])
    dt = 0.5 * h
    nsteps = int(math.ceil(T_horizon / dt))
    stride = max(1, int(round(0.25 / dt)))
    ts, us = [0.0], [state[0]]
    for n in range(1, nsteps + 1):
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * dt * k1)
        k3 = rhs(state + 0.5 * dt * k2)
        k4 = rhs(state + dt * k3)
        state = state + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if n % stride == 0:
            ts.append(n * dt)
            us.append(state[0])
        if not np.isfinite(state[0]):
            raise IntegrationError("linearized march produced non-finite values", float(n * dt))
    ts = np.array(ts)
    us = np.array(us)
    if not np.any(us):
        return GrowthFit(growth=-np.inf, frequency=0.0, exponents=np.array([]),
                         amplitudes=np.array([]), t=ts, us=us)
    half = ts >= 0.5 * ts[-1]
    if half.sum() < 4 * fit_order:
        raise IntegrationError("horizon too short for a clean fit", float(ts[-1]))
    expo, amp, contrib = prony_fit(us[half], ts[1] - ts[0], fit_order)
    sig = contrib > 0.05 * contrib.max()
    best = np.argmax(np.where(sig, expo.real, -np.inf))
    return GrowthFit(growth=float(expo[best].real), frequency=float(abs(expo[best].imag)),
                     exponents=expo, amplitudes=amp, t=ts, us=us)


def prony_fit(samples, dt, order, rank_tol=1e-7):
    """Exponents and amplitudes of a sum of complex exponentials (matrix pencil).

    At most ``order`` exponentials are kept, fewer when the Hankel matrix of
    the samples is numerically rank deficient. Amplitudes refer to the first
    sample.
    """
    x = np.asarray(samples, dtype=complex)
    scale = np.abs(x).max()
    x = x / scale
    n = x.size
    L = n // 2
    Y = np.array([x[i:i + L + 1] for i in range(n - L)])
    _, sv, Vh = np.linalg.svd(Y, full_matrices=False)
    m = int(min(order, np.sum(sv > rank_tol * sv[0])))
    V = Vh[:m].T
    z = np.linalg.eigvals(np.linalg.pinv(V[:-1]) @ V[1:])
    # column-scaled Vandermonde keeps the amplitude solve well conditioned
    k = np.arange(n)[:, None]
    logz = np.log(z)
    peak = np.maximum(0, (n - 1) * logz.real)
    M = np.exp(k * logz[None, :] - peak[None, :])
    coef, *_ = np.linalg.lstsq(M, x, rcond=None)
    amp = coef * np.exp(-peak) * scale
    contrib = np.abs(coef)
    return logz / dt, amp, contrib
