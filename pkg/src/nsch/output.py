"""Diagnostics CSV and binary snapshot persistence.

CSV files are self-describing: a fingerprint comment line, then the header
row, then one row per record with floats printed at 17 significant digits
so reruns of the same config are byte-identical.

Snapshots are little-endian binary: magic "NSCH1", u32 Nx, u32 Ny,
f64 Lx, f64 Ly, f64 t, u8 field count, then per field a u8 name length,
the ASCII name, and Nx*Ny row-major f64 samples.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .diagnostics import DiagnosticsRecord
from .dynamics import State
from .exceptions import DataError, IoError
from .spectral import Grid, ScalarField, VectorField

__all__ = [
    "DiagnosticsWriter",
    "write_diagnostics_csv",
    "read_diagnostics_csv",
    "state_fields",
    "write_snapshot",
    "read_snapshot",
    "SnapshotMeta",
]

_MAGIC = b"NSCH1"


def _fmt(x) -> str:
    return "%.17g" % float(x)


class DiagnosticsWriter:
    """Streaming CSV sink; one flushed row per record so partial output
    survives a failed run."""

    def __init__(self, path: str, fingerprint: str):
        try:
            self._fh = open(path, "w", encoding="ascii", newline="\n")
            self._fh.write(f"# nsch-fingerprint: {fingerprint}\n")
            self._fh.write(",".join(DiagnosticsRecord.columns()) + "\n")
            self._fh.flush()
        except OSError as exc:
            raise IoError(f"cannot write diagnostics CSV {path}: {exc}") from None

    def write(self, rec: DiagnosticsRecord):
        try:
            self._fh.write(",".join(_fmt(v) for v in rec.row()) + "\n")
            self._fh.flush()
        except OSError as exc:
            raise IoError(f"diagnostics CSV write failed: {exc}") from None

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def write_diagnostics_csv(path: str, records, fingerprint: str):
    with DiagnosticsWriter(path, fingerprint) as w:
        for rec in records:
            w.write(rec)


def read_diagnostics_csv(path: str):
    """Return (fingerprint, column names, rows as a float ndarray)."""
    try:
        with open(path, "r", encoding="ascii") as fh:
            first = fh.readline().strip()
            if not first.startswith("# nsch-fingerprint:"):
                raise DataError(f"{path}: missing fingerprint line")
            fingerprint = first.split(":", 1)[1].strip()
            header = fh.readline().strip().split(",")
            rows = [[float(tok) for tok in line.strip().split(",")]
                    for line in fh if line.strip()]
    except OSError as exc:
        raise IoError(f"cannot read diagnostics CSV {path}: {exc}") from None
    data = np.array(rows, dtype=float) if rows else np.empty((0, len(header)))
    return fingerprint, header, data


@dataclass(frozen=True)
class SnapshotMeta:
    Nx: int
    Ny: int
    Lx: float
    Ly: float


def state_fields(s: State) -> dict:
    fields = {"phi": s.phi.phys, "sigma": s.sigma.phys}
    if s.v is not None:
        fields["vx"] = s.v.x.phys
        fields["vy"] = s.v.y.phys
    return fields


def write_snapshot(path: str, s: State):
    g = s.grid
    fields = state_fields(s)
    try:
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<IIdd", g.Nx, g.Ny, g.Lx, g.Ly))
            fh.write(struct.pack("<d", s.t))
            fh.write(struct.pack("<B", len(fields)))
            for name, arr in fields.items():
                nm = name.encode("ascii")
                if len(nm) > 255:
                    raise DataError(f"field name too long: {name}")
                fh.write(struct.pack("<B", len(nm)))
                fh.write(nm)
                fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    except OSError as exc:
        raise IoError(f"cannot write snapshot {path}: {exc}") from None


def _read_exact(fh, n, path):
    buf = fh.read(n)
    if len(buf) != n:
        raise DataError(f"{path}: truncated snapshot")
    return buf


def read_snapshot(path: str):
    """Return (SnapshotMeta, t, {name: (Nx, Ny) float array})."""
    try:
        fh = open(path, "rb")
    except OSError as exc:
        raise IoError(f"cannot read snapshot {path}: {exc}") from None
    with fh:
        if _read_exact(fh, len(_MAGIC), path) != _MAGIC:
            raise DataError(f"{path}: bad snapshot magic")
        nx, ny, lx, ly = struct.unpack("<IIdd", _read_exact(fh, 24, path))
        (t,) = struct.unpack("<d", _read_exact(fh, 8, path))
        (count,) = struct.unpack("<B", _read_exact(fh, 1, path))
        fields = {}
        for _ in range(count):
            (nlen,) = struct.unpack("<B", _read_exact(fh, 1, path))
            name = _read_exact(fh, nlen, path).decode("ascii")
            raw = _read_exact(fh, 8 * nx * ny, path)
            fields[name] = np.frombuffer(raw, dtype="<f8").reshape(nx, ny).copy()
    return SnapshotMeta(Nx=nx, Ny=ny, Lx=lx, Ly=ly), t, fields


def state_from_snapshot(grid: Grid, path: str) -> State:
    """Rebuild a State on an existing grid from a snapshot file."""
    meta, t, fields = read_snapshot(path)
    if (meta.Nx, meta.Ny) != (grid.Nx, grid.Ny):
        raise DataError(
            f"{path}: snapshot is {meta.Nx}x{meta.Ny}, grid is "
            f"{grid.Nx}x{grid.Ny}")
    if "phi" not in fields or "sigma" not in fields:
        raise DataError(f"{path}: snapshot must contain phi and sigma")
    v = None
    if "vx" in fields and "vy" in fields:
        v = VectorField.from_phys(grid, fields["vx"], fields["vy"])
    return State(t=t, phi=ScalarField(grid, phys=fields["phi"]),
                 sigma=ScalarField(grid, phys=fields["sigma"]), v=v)
