"""On-disk artifacts: snapshots, the diagnostics series and the run manifest.

Snapshot layout: ASCII header lines ``key = value`` opened by the magic line
and closed by ``END``, then ``2*N*N`` little-endian float64 values, rho_I
first, each N x N block row-major over (x, y) physical cells.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .grid import Boundary, Grid, State, fill_ghosts

MAGIC = "LINDBLAD_KT_SNAPSHOT 1"
COMPONENTS = ("rho_I", "rho_R")
_DTYPE = np.dtype("<f8")


class SnapshotError(ValueError):
    pass


def write_snapshot(s: State, path, boundary: Boundary | str = Boundary.MIRROR_NEGATE) -> Path:
    path = Path(path)
    g = s.grid
    header = [
        MAGIC,
        f"n_cells = {g.n_cells}",
        f"extent_l = {g.extent_l!r}",
        f"time = {float(s.time)!r}",
        f"components = {' '.join(COMPONENTS)}",
        f"boundary = {Boundary(boundary).value}",
        "dtype = <f8",
        "END",
    ]
    payload = np.ascontiguousarray(s.physical, dtype=_DTYPE)
    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        fh.write(payload.tobytes())
    return path


def read_snapshot(path, boundary: Boundary | str | None = None) -> State:
    """Load a snapshot; ghosts are rebuilt with ``boundary`` or the stored policy."""
    data = Path(path).read_bytes()
    marker = b"\nEND\n"
    end = data.find(marker)
    if not data.startswith(MAGIC.encode()) or end < 0:
        raise SnapshotError(f"{path}: not a snapshot file")
    fields = {}
    for line in data[:end].decode("ascii").splitlines()[1:]:
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    try:
        n = int(fields["n_cells"])
        grid = Grid(float(fields["extent_l"]), n)
        time = float(fields["time"])
    except (KeyError, ValueError) as exc:
        raise SnapshotError(f"{path}: bad header ({exc})") from exc
    if tuple(fields.get("components", "").split()) != COMPONENTS:
        raise SnapshotError(f"{path}: unexpected components {fields.get('components')!r}")
    payload = data[end + len(marker):]
    expected = 2 * n * n * _DTYPE.itemsize
    if len(payload) != expected:
        raise SnapshotError(f"{path}: payload has {len(payload)} bytes, header implies {expected}")
    s = State.zeros(grid, time)
    s.u[grid.interior] = np.frombuffer(payload, dtype=_DTYPE).reshape(2, n, n)
    policy = boundary if boundary is not None else fields.get("boundary", Boundary.MIRROR_NEGATE)
    fill_ghosts(s.u, policy, grid.ghost_width)
    return s


def snapshot_name(index: int, time: float) -> str:
    return f"snapshot_{index:04d}_t{time:.6f}.bin"


class SeriesWriter:
    """Comma-separated ``t,N,I`` rows, flushed as they arrive."""

    HEADER = "t,N,I"

    def __init__(self, path):
        self.path = Path(path)
        self._fh = open(self.path, "w")
        self._fh.write(self.HEADER + "\n")

    def write(self, t: float, norm_dev: float, imag: float) -> None:
        self._fh.write(f"{t!r},{norm_dev!r},{imag!r}\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_series(path) -> np.ndarray:
    """Structured array with fields t, N, I."""
    return np.genfromtxt(path, delimiter=",", names=True)


def write_manifest(path, manifest: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    return path
