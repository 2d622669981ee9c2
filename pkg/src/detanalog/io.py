"""Binary snapshots, CSV tables and PGM files."""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .solver import SimState

MAGIC = b"DETA"
VERSION = 1
_HEADER = struct.Struct("<4sIII5d")


@dataclass(frozen=True, eq=False)
class Snapshot:
    nx: int
    ny: int
    dx: float
    dy: float
    x0: float
    t: float
    frame_speed: float
    u: np.ndarray
    v: np.ndarray


def encode_snapshot(state: SimState) -> bytes:
    """Header then ``u`` and ``v`` as little-endian f64, row-major ``(nx, ny)``."""
    u = state.u
    head = _HEADER.pack(MAGIC, VERSION, u.nx, u.ny, u.dx, u.dy, u.x0, state.t, u.frame_speed)
    body = (np.ascontiguousarray(u.data, dtype="<f8").tobytes()
            + np.ascontiguousarray(state.v.data, dtype="<f8").tobytes())
    return head + body


def decode_snapshot(buf: bytes) -> Snapshot:
    if len(buf) < _HEADER.size:
        raise ValueError("truncated snapshot header")
    magic, version, nx, ny, dx, dy, x0, t, speed = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    n = nx * ny
    expected = _HEADER.size + 16 * n
    if len(buf) != expected:
        raise ValueError(f"snapshot size {len(buf)} != expected {expected}")
    data = np.frombuffer(buf, dtype="<f8", offset=_HEADER.size, count=2 * n)
    u = data[:n].reshape(nx, ny).astype(float)
    v = data[n:].reshape(nx, ny).astype(float)
    return Snapshot(nx, ny, dx, dy, x0, t, speed, u, v)


def write_snapshot(path, state: SimState) -> Path:
    path = Path(path)
    path.write_bytes(encode_snapshot(state))
    return path


def read_snapshot(path) -> Snapshot:
    return decode_snapshot(Path(path).read_bytes())


def format_value(value) -> str:
    """Shortest round-trip text for floats; ``str`` for everything else."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


def write_csv(path, rows: Iterable[tuple]) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in rows:
            w.writerow([format_value(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Header and a float array of the numeric body."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        return [], np.empty((0, 0))
    return rows[0], np.array([[float(x) for x in r] for r in rows[1:]])


def centerline_rows(state: SimState):
    """``x, u, v`` along the middle row of the channel."""
    j = state.u.ny // 2
    yield ("x", "u", "v")
    for x, u, v in zip(state.u.x, state.u.data[:, j], state.v.data[:, j]):
        yield (float(x), float(u), float(v))


def write_pgm(path, image: bytes) -> Path:
    if not image.startswith(b"P5"):
        raise ValueError("not a binary PGM")
    path = Path(path)
    path.write_bytes(image)
    return path


def read_pgm(buf: bytes) -> np.ndarray:
    """Decode an 8-bit P5 image into a ``(rows, cols)`` uint8 array."""
    parts = buf.split(b"\n", 3)
    if parts[0] != b"P5" or len(parts) < 4:
        raise ValueError("not a binary PGM")
    w, h = (int(x) for x in parts[1].split())
    if int(parts[2]) != 255:
        raise ValueError("only 8-bit PGM is supported")
    return np.frombuffer(parts[3], dtype=np.uint8, count=w * h).reshape(h, w)
