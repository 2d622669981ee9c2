"""Numerical soot foil: the lab-frame time integral of ``|grad v|``."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .solver import SimState


class TraceWarning(UserWarning):
    pass


@dataclass(eq=False)
class TraceAccumulator:
    """Accumulation grid over ``[lab_x0, lab_x1]`` times the channel width.

    Lab columns have the simulation spacing ``1/resolution``; rows match the
    simulation rows.
    """

    lab_x0: float
    lab_x1: float
    resolution: float
    ny: int
    dy: float
    data: np.ndarray = field(init=False)
    t_last: float = 0.0
    exhausted: bool = False

    def __post_init__(self):
        if not self.lab_x1 > self.lab_x0:
            raise ValueError("lab_x1 must exceed lab_x0")
        if not (self.resolution > 0 and self.ny > 0 and self.dy > 0):
            raise ValueError("resolution, ny and dy must be positive")
        n = int(round((self.lab_x1 - self.lab_x0) * self.resolution))
        self.data = np.zeros((n, self.ny))

    @classmethod
    def for_state(cls, state: SimState, lab_x0: float, lab_x1: float) -> "TraceAccumulator":
        acc = cls(lab_x0, lab_x1, 1.0 / state.u.dx, state.u.ny, state.u.dy)
        acc.t_last = state.t
        return acc

    @property
    def x(self) -> np.ndarray:
        return self.lab_x0 + (np.arange(self.data.shape[0]) + 0.5) / self.resolution

    @property
    def width(self) -> float:
        return self.ny * self.dy


def grad_v_magnitude(state: SimState) -> np.ndarray:
    """``|grad v|`` by centred differences (one-sided at the edges)."""
    v = state.v
    gx, gy = np.gradient(v.data, v.dx, v.dy)
    return np.hypot(gx, gy)


def accumulate(acc: TraceAccumulator, state: SimState, dt_effective: float) -> TraceAccumulator:
    """Deposit ``|grad v| * dt_effective`` at lab positions ``x + V t``.

    Each simulation column is split between the two nearest lab columns with
    linear-interpolation weights. Mutates and returns ``acc``.
    """
    if state.t < acc.t_last - 1e-12:
        raise ValueError("state time precedes the last accumulation")
    if dt_effective < 0:
        raise ValueError("dt_effective must be nonnegative")
    if state.u.ny != acc.ny or not math.isclose(state.u.dx * acc.resolution, 1.0, rel_tol=1e-9):
        raise ValueError("accumulator grid does not match the simulation grid")
    acc.t_last = state.t
    g = grad_v_magnitude(state) * dt_effective
    v = state.v
    # lab index of the first simulation column, in lab-cell units
    s0 = (v.x0 + 0.5 * v.dx + v.frame_speed * state.t - acc.lab_x0) * acc.resolution - 0.5
    k0 = math.floor(s0)
    w = s0 - k0
    n = acc.data.shape[0]
    hit = False
    for shift, weight in ((0, 1.0 - w), (1, w)):
        if weight == 0.0:
            continue
        lo = k0 + shift
        a = max(0, -lo)
        b = min(g.shape[0], n - lo)
        if b > a:
            acc.data[lo + a:lo + b] += weight * g[a:b]
            hit = True
    if not hit:
        if not acc.exhausted:
            warnings.warn("simulation window lies outside the lab accumulation extent",
                          TraceWarning, stacklevel=2)
        acc.exhausted = True
    return acc


class TraceCallback:
    """Run callback accumulating every ``stride`` steps with ``dt`` scaled to match."""

    def __init__(self, acc: TraceAccumulator, stride: int = 1):
        if stride < 1:
            raise ValueError("stride must be >= 1")
        self.acc = acc
        self.stride = stride
        self._pending = 0.0
        self._count = 0

    def __call__(self, state: SimState, dt: float) -> None:
        self._pending += dt
        self._count += 1
        if self._count % self.stride == 0:
            accumulate(self.acc, state, self._pending)
            self._pending = 0.0


def render_pgm(acc: TraceAccumulator, gamma: float = 1.0) -> bytes:
    """Binary 8-bit PGM, max-normalized; image rows are ``y`` (top = largest y)."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    data = acc.data
    peak = float(data.max()) if data.size else 0.0
    if peak <= 0.0:
        warnings.warn("trace is identically zero; rendering a black image", TraceWarning,
                      stacklevel=2)
        img = np.zeros(data.T.shape, dtype=np.uint8)
    else:
        norm = np.clip(data / peak, 0.0, 1.0) ** gamma
        img = np.round(255.0 * norm).astype(np.uint8).T
    img = img[::-1]
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(img).tobytes()


@dataclass
class CellMetrics:
    """Dominant transverse wavelength and regularity index per lab x-window."""

    x_centre: np.ndarray
    wavelength: np.ndarray
    regularity: np.ndarray
    degenerate: np.ndarray

    def to_csv_rows(self):
        yield ("x_centre", "wavelength", "regularity", "degenerate")
        for row in zip(self.x_centre, self.wavelength, self.regularity, self.degenerate):
            yield (float(row[0]), float(row[1]), float(row[2]), int(row[3]))


def transverse_spectrum(columns: np.ndarray) -> np.ndarray:
    """Column-averaged power spectrum along y, mean removed.

    Columns are mirrored about the wall first, so bin ``m`` of the result is
    the wall mode ``cos(pi m y / L_y)`` with wavelength ``2 L_y / m``.
    """
    c = columns - columns.mean(axis=1, keepdims=True)
    c = np.concatenate([c, c[:, ::-1]], axis=1)
    return np.mean(np.abs(np.fft.rfft(c, axis=1)) ** 2, axis=0)


def _peak(power: np.ndarray, width: float):
    """Refined peak wavelength and peak/total power ratio; DC bin excluded."""
    p = power[1:]
    total = p.sum()
    if p.size == 0 or total <= 0 or not np.isfinite(total):
        return math.nan, math.nan, True
    k = int(np.argmax(p))
    kk = k + 1.0
    if 0 < k < p.size - 1:
        y0, y1, y2 = p[k - 1], p[k], p[k + 1]
        den = y0 - 2 * y1 + y2
        if den < 0:
            kk += 0.5 * (y0 - y2) / den
    return width / kk, float(p[k] / total), False


def cell_metrics(acc: TraceAccumulator, n_windows: int = 4, *, x_range=None) -> CellMetrics:
    """Spectral cell size and regularity over ``n_windows`` equal lab x-windows.

    Only columns with a nonzero trace enter a window's spectrum; windows
    without any are flagged degenerate.
    """
    if n_windows < 1:
        raise ValueError("n_windows must be >= 1")
    x = acc.x
    lo, hi = x_range if x_range is not None else (acc.lab_x0, acc.lab_x1)
    edges = np.linspace(lo, hi, n_windows + 1)
    xc, lam, reg, bad = [], [], [], []
    for a, b in zip(edges[:-1], edges[1:]):
        sel = (x >= a) & (x < b)
        cols = acc.data[sel]
        cols = cols[cols.max(axis=1) > 0] if cols.size else cols
        xc.append(0.5 * (a + b))
        if cols.shape[0] == 0:
            lam.append(math.nan)
            reg.append(math.nan)
            bad.append(True)
            continue
        wl, r, degenerate = _peak(transverse_spectrum(cols), 2.0 * acc.width)
        lam.append(wl)
        reg.append(r)
        bad.append(degenerate)
    return CellMetrics(np.array(xc), np.array(lam), np.array(reg), np.array(bad))
